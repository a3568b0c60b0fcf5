#include "rarelab/perturbation.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "rarelab/errors.hpp"

namespace rarelab {

namespace {

struct Mode {
    int k[3];
    double a[FieldSet::kComponents];
    double b[FieldSet::kComponents];
};

bool positive_half(int k1, int k2, int k3) {
    if (k1 != 0) return k1 > 0;
    if (k2 != 0) return k2 > 0;
    return k3 > 0;
}

std::vector<std::complex<double>> phase_table(int n, double origin, double h, double kappa) {
    std::vector<std::complex<double>> t(n);
    for (int i = 0; i < n; ++i) t[i] = std::polar(1.0, kappa * (origin + (i + 0.5) * h));
    return t;
}

}  // namespace

FieldSet make_perturbation(const PerturbationSpec& spec, const SlabGrid& grid) {
    grid.validate();
    FieldSet out(grid);
    if (!(spec.eta >= 0.0)) throw ConfigError("perturbation: eta must be >= 0");
    if (spec.mode_cap < 0) throw ConfigError("perturbation: mode_cap must be >= 0");
    if (spec.eta == 0.0) return out;

    const int c2 = grid.dims >= 2 ? spec.mode_cap : 0;
    const int c3 = grid.dims >= 3 ? spec.mode_cap : 0;
    const int c1 = spec.normal_cap();
    if (grid.dims >= 2 && 2 * c2 >= grid.n2)
        throw ConfigError("perturbation: mode_cap exceeds the Nyquist limit of n2");
    if (grid.dims >= 3 && 2 * c3 >= grid.n3)
        throw ConfigError("perturbation: mode_cap exceeds the Nyquist limit of n3");
    if (c1 > 0 && !(grid.n1 > 1 && 2.0 * c1 * grid.h1() < grid.period))
        throw ConfigError("perturbation: normal_mode_cap exceeds the Nyquist limit of n1");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Mode> modes;
    double norm2 = 0.0;
    for (int k1 = -c1; k1 <= c1; ++k1)
        for (int k2 = -c2; k2 <= c2; ++k2)
            for (int k3 = -c3; k3 <= c3; ++k3) {
                if (!positive_half(k1, k2, k3)) continue;
                Mode m{{k1, k2, k3}, {}, {}};
                const double kk = 4.0 * std::numbers::pi * std::numbers::pi * (k1 * k1 + k2 * k2 + k3 * k3);
                const double weight = 1.0 + kk + kk * kk;
                for (int c = 0; c < FieldSet::kComponents; ++c) {
                    m.a[c] = normal(rng);
                    m.b[c] = normal(rng);
                    norm2 += weight * 0.5 * (m.a[c] * m.a[c] + m.b[c] * m.b[c]);
                }
                modes.push_back(m);
            }
    if (modes.empty()) throw ConfigError("perturbation: no admissible modes (all caps are 0)");
    const double scale = spec.eta / std::sqrt(norm2);

    const double base = 2.0 * std::numbers::pi / grid.period;
    for (const auto& m : modes) {
        const auto e1 = phase_table(grid.n1, -grid.L, grid.h1(), base * m.k[0]);
        const auto e2 = phase_table(grid.n2, 0.0, grid.h2(), base * m.k[1]);
        const auto e3 = phase_table(grid.n3, 0.0, grid.h3(), base * m.k[2]);
        std::complex<double> coef[FieldSet::kComponents];
        for (int c = 0; c < FieldSet::kComponents; ++c) coef[c] = {scale * m.a[c], -scale * m.b[c]};
        for (int k = 0; k < grid.n3; ++k)
            for (int j = 0; j < grid.n2; ++j) {
                const auto e23 = e2[j] * e3[k];
                const std::size_t row = grid.index(0, j, k);
                for (int i = 0; i < grid.n1; ++i) {
                    const auto e = e1[i] * e23;
                    for (int c = 0; c < FieldSet::kComponents; ++c)
                        out.q[c][row + i] += coef[c].real() * e.real() - coef[c].imag() * e.imag();
                }
            }
    }
    return out;
}

FieldSet assemble_initial(const RarefactionWave& wave, const FieldSet* pert, const SlabGrid& grid, double t) {
    grid.validate();
    if (pert && !(pert->grid == grid)) throw ConfigError("assemble_initial: perturbation grid mismatch");
    const auto& g = wave.gas();
    FieldSet f(grid);
    f.time = t;
    std::vector<ProfilePoint> line(grid.n1);
    for (int i = 0; i < grid.n1; ++i) line[i] = wave.profile(t, grid.x1(i));

    double worst = INFINITY;
    std::size_t worst_cell = 0;
    double worst_rho = 0.0, worst_theta = 0.0;
    for (int k = 0; k < grid.n3; ++k)
        for (int j = 0; j < grid.n2; ++j)
            for (int i = 0; i < grid.n1; ++i) {
                const auto id = grid.index(i, j, k);
                const auto& p = line[i];
                double q[5] = {p.rho, p.rho * p.u1, 0.0, 0.0, total_energy(g, p.rho, {p.u1, 0.0, 0.0}, p.theta)};
                if (pert)
                    for (int c = 0; c < 5; ++c) q[c] += pert->q[c][id];
                for (int c = 0; c < 5; ++c) f.q[c][id] = q[c];
                const double rho = q[0];
                const double theta =
                    rho > 0.0 ? (q[4] / rho - 0.5 * (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]) / (rho * rho)) / g.cv()
                              : -INFINITY;
                const double score = std::min(rho / p.rho, theta / p.theta);
                if (score < worst) {
                    worst = score;
                    worst_cell = id;
                    worst_rho = rho;
                    worst_theta = theta;
                }
            }
    if (!(worst_rho > 0.0) || !(worst_theta > 0.0)) {
        std::ostringstream os;
        os << "initial data not positive: worst cell " << worst_cell << " (i=" << worst_cell % grid.n1
           << ") rho=" << worst_rho << " theta=" << worst_theta;
        throw ConfigError(os.str());
    }
    return f;
}

}  // namespace rarelab
