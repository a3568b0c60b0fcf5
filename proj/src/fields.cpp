#include "rarelab/fields.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rarelab/errors.hpp"
#include "rarelab/euler_waves.hpp"

namespace rarelab {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

constexpr char kMagic[8] = {'R', 'L', 'F', 'S', 'E', 'T', '1', '\0'};

}  // namespace

SlabGrid SlabGrid::torus(double period, int dims, int n_transverse, int n1) {
    SlabGrid g;
    g.L = 0.5 * period;
    g.n1 = n1;
    g.period = period;
    g.dims = dims;
    g.n2 = dims >= 2 ? n_transverse : 1;
    g.n3 = dims >= 3 ? n_transverse : 1;
    g.periodic_normal = true;
    return g;
}

double SlabGrid::cell_volume() const { return h1() * transverse_area() / transverse_count(); }

double SlabGrid::transverse_area() const {
    return (dims >= 2 ? period : 1.0) * (dims >= 3 ? period : 1.0);
}

void SlabGrid::validate() const {
    auto need = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("grid: ") + what);
    };
    need(dims >= 1 && dims <= 3, "dims must be 1, 2 or 3");
    need(std::isfinite(L) && L > 0.0, "L must be > 0");
    need(std::isfinite(period) && period > 0.0, "period must be > 0");
    need(n1 >= 1, "n1 must be >= 1");
    need(periodic_normal || n1 >= 4, "n1 must be >= 4 with pinned boundaries");
    need(dims >= 2 || n2 == 1, "n2 must be 1 when dims < 2");
    need(dims >= 3 || n3 == 1, "n3 must be 1 when dims < 3");
    need(is_pow2(n2) && is_pow2(n3), "n2 and n3 must be powers of two");
    need(dims < 2 || n2 >= 4, "n2 must be >= 4 when dims >= 2");
    need(dims < 3 || n3 >= 4, "n3 must be >= 4 when dims = 3");
}

double SlabGrid::required_half_length(const RarefactionWave& wave, double horizon, double margin) {
    const auto& s = wave.spec();
    const double T = horizon + (s.shifted ? s.time_shift : 0.0);
    return std::fabs(wave.u1_minus()) * T + std::fabs(wave.lambda3_plus()) * T + 20.0 * s.delta + margin;
}

void SlabGrid::validate_fits(const RarefactionWave& wave, double horizon, double margin) const {
    const double need = required_half_length(wave, horizon, margin);
    if (!periodic_normal && L < need) {
        std::ostringstream os;
        os << "grid: L=" << L << " too small for the fan over the horizon (need >= " << need << ")";
        throw ConfigError(os.str());
    }
}

FieldSet::FieldSet(const SlabGrid& g) : grid(g) {
    for (auto& c : q) c.assign(g.size(), 0.0);
}

ScalarField FieldSet::component(int c) const {
    ScalarField s;
    s.grid = grid;
    s.v = q.at(c);
    return s;
}

double total_energy(const GasParams& g, double rho, const std::array<double, 3>& u, double theta) {
    return rho * (g.cv() * theta + 0.5 * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]));
}

Primitives compute_primitives(const FieldSet& f, const GasParams& g) {
    const std::size_t n = f.grid.size();
    Primitives p;
    p.rho = f.rho();
    p.theta.resize(n);
    p.p.resize(n);
    for (auto& u : p.u) u.resize(n);
    const double inv_cv = 1.0 / g.cv();
    for (std::size_t i = 0; i < n; ++i) {
        const double r = f.q[0][i];
        const double u1 = f.q[1][i] / r, u2 = f.q[2][i] / r, u3 = f.q[3][i] / r;
        p.u[0][i] = u1;
        p.u[1][i] = u2;
        p.u[2][i] = u3;
        p.theta[i] = (f.q[4][i] / r - 0.5 * (u1 * u1 + u2 * u2 + u3 * u3)) * inv_cv;
        p.p[i] = g.R * r * p.theta[i];
    }
    return p;
}

std::vector<double> derivative(const SlabGrid& g, const std::vector<double>& f, int dir) {
    std::vector<double> out(f.size(), 0.0);
    const int n = dir == 0 ? g.n1 : dir == 1 ? g.n2 : g.n3;
    if (dir >= g.dims || n < 2 || (dir == 0 && g.dims < 1)) return out;
    const double h = dir == 0 ? g.h1() : dir == 1 ? g.h2() : g.h3();
    const bool periodic = dir > 0 || g.periodic_normal;
    const std::size_t stride = dir == 0 ? 1 : dir == 1 ? static_cast<std::size_t>(g.n1)
                                                       : static_cast<std::size_t>(g.n1) * g.n2;
    const double ih2 = 0.5 / h;
    for (int k = 0; k < g.n3; ++k)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const int pos = dir == 0 ? i : dir == 1 ? j : k;
                const std::size_t id = g.index(i, j, k);
                const std::size_t base = id - static_cast<std::size_t>(pos) * stride;
                auto at = [&](int p) { return f[base + static_cast<std::size_t>(p) * stride]; };
                if (pos > 0 && pos < n - 1) {
                    out[id] = (at(pos + 1) - at(pos - 1)) * ih2;
                } else if (periodic) {
                    out[id] = (at((pos + 1) % n) - at((pos - 1 + n) % n)) * ih2;
                } else if (n >= 3) {
                    out[id] = pos == 0 ? (-3.0 * at(0) + 4.0 * at(1) - at(2)) * ih2
                                       : (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) * ih2;
                } else {
                    out[id] = (at(1) - at(0)) / h;
                }
            }
    return out;
}

void write_binary(const FieldSet& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    const auto& g = f.grid;
    const std::int32_t ints[5] = {g.dims, g.n1, g.n2, g.n3, g.periodic_normal ? 1 : 0};
    const double reals[6] = {g.L, g.period, g.h1(), g.h2(), g.h3(), f.time};
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(ints), sizeof ints);
    out.write(reinterpret_cast<const char*>(reals), sizeof reals);
    for (const auto& c : f.q) out.write(reinterpret_cast<const char*>(c.data()), c.size() * sizeof(double));
    if (!out) throw ConfigError("write failed: " + path);
}

FieldSet read_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    char magic[8];
    std::int32_t ints[5];
    double reals[6];
    in.read(magic, sizeof magic);
    in.read(reinterpret_cast<char*>(ints), sizeof ints);
    in.read(reinterpret_cast<char*>(reals), sizeof reals);
    if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw ConfigError("not a field file: " + path);
    SlabGrid g;
    g.dims = ints[0];
    g.n1 = ints[1];
    g.n2 = ints[2];
    g.n3 = ints[3];
    g.periodic_normal = ints[4] != 0;
    g.L = reals[0];
    g.period = reals[1];
    g.validate();
    FieldSet f(g);
    f.time = reals[5];
    for (auto& c : f.q) in.read(reinterpret_cast<char*>(c.data()), c.size() * sizeof(double));
    if (!in) throw ConfigError("truncated field file: " + path);
    return f;
}

void write_csv(const FieldSet& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    const auto& g = f.grid;
    out << std::setprecision(17);
    out << "# time=" << f.time << "\n";
    out << "i,j,k,x1,x2,x3,rho,m1,m2,m3,E\n";
    for (int k = 0; k < g.n3; ++k)
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const auto id = g.index(i, j, k);
                out << i << ',' << j << ',' << k << ',' << g.x1(i) << ',' << g.x2(j) << ',' << g.x3(k);
                for (const auto& c : f.q) out << ',' << c[id];
                out << '\n';
            }
}

}  // namespace rarelab
