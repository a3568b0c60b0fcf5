#include "rarelab/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "rarelab/errors.hpp"

namespace rarelab {

double pairwise_sum(const double* v, std::size_t n, std::size_t stride) {
    if (n == 0) return 0.0;
    if (n == 1) return v[0];
    if (n == 2) return v[0] + v[stride];
    const std::size_t half = n / 2;
    return pairwise_sum(v, half, stride) + pairwise_sum(v + half * stride, n - half, stride);
}

ModeSplit decompose(const ScalarField& f) {
    const auto& g = f.grid;
    ModeSplit s;
    s.planar = g.dims < 2;
    s.zero.resize(g.n1);
    const std::size_t nt = static_cast<std::size_t>(g.transverse_count());
    for (int i = 0; i < g.n1; ++i) s.zero[i] = pairwise_sum(&f.v[i], nt, g.n1) / static_cast<double>(nt);
    s.nonzero = ScalarField(g);
    for (std::size_t m = 0; m < nt; ++m)
        for (int i = 0; i < g.n1; ++i) {
            const std::size_t id = i + m * g.n1;
            s.nonzero.v[id] = s.planar ? 0.0 : f.v[id] - s.zero[i];
        }
    if (s.planar) return s;
    // Quantize each line of the non-zero part to a common power-of-two step fine enough that
    // every partial sum is exact, then cancel the integer residual; D0 of it is then bitwise 0.
    double* nz = s.nonzero.v.data();
    const int log_nt = std::ilogb(static_cast<double>(nt)) + 1;
    for (int i = 0; i < g.n1; ++i) {
        double big = 0.0;
        std::size_t at = 0;
        for (std::size_t m = 0; m < nt; ++m)
            if (std::fabs(nz[i + m * g.n1]) > big) big = std::fabs(nz[i + (at = m) * g.n1]);
        if (big == 0.0) continue;
        const int e = std::ilogb(big) + 1 + log_nt - 52;
        long long total = 0;
        for (std::size_t m = 0; m < nt; ++m) {
            const long long k = std::llround(std::ldexp(nz[i + m * g.n1], -e));
            total += k;
            nz[i + m * g.n1] = std::ldexp(static_cast<double>(k), e);
        }
        nz[i + at * g.n1] -= std::ldexp(static_cast<double>(total), e);
    }
    return s;
}

ScalarField tile_zero_mode(const std::vector<double>& zero, const SlabGrid& grid) {
    if (zero.size() != static_cast<std::size_t>(grid.n1)) throw DomainError("tile_zero_mode: size mismatch");
    ScalarField out(grid);
    for (std::size_t m = 0; m < static_cast<std::size_t>(grid.transverse_count()); ++m)
        std::copy(zero.begin(), zero.end(), out.v.begin() + m * grid.n1);
    return out;
}

double lp_norm(const std::vector<double>& v, const SlabGrid& grid, double p) {
    if (p <= 0.0) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::fabs(x));
        return m;
    }
    double s = 0.0;
    if (p == 2.0)
        for (double x : v) s += x * x;
    else
        for (double x : v) s += std::pow(std::fabs(x), p);
    return std::pow(s * grid.cell_volume(), 1.0 / p);
}

ProjectionReport projection_bounds_check(const ScalarField& f, double p) {
    if (!(p == 1.0 || p == 2.0 || p == 4.0 || p <= 0.0 || std::isinf(p)))
        throw DomainError("projection_bounds_check: p must be 1, 2, 4 or infinity");
    const double pp = std::isinf(p) ? 0.0 : p;
    const auto split = decompose(f);
    ProjectionReport r;
    r.p = p;
    r.norm_f = lp_norm(f.v, f.grid, pp);
    r.norm_zero = lp_norm(tile_zero_mode(split.zero, f.grid).v, f.grid, pp);
    r.norm_nonzero = lp_norm(split.nonzero.v, f.grid, pp);
    const double slack = 1.0 + 1e-12;
    r.zero_ok = r.norm_zero <= slack * r.norm_f;
    r.nonzero_ok = r.norm_nonzero <= 2.0 * slack * r.norm_f;
    return r;
}

namespace {

struct Derivs {
    std::array<std::vector<double>, 3> d1;
    std::array<std::array<std::vector<double>, 3>, 3> d2;
};

Derivs derivs(const SlabGrid& g, const std::vector<double>& f, bool second) {
    Derivs out;
    for (int d = 0; d < 3; ++d) out.d1[d] = derivative(g, f, d);
    if (second)
        for (int d = 0; d < 3; ++d)
            for (int l = d; l < 3; ++l) {
                out.d2[d][l] = derivative(g, out.d1[d], l);
                if (l != d) out.d2[l][d] = out.d2[d][l];
            }
    return out;
}

double grad_sq(const Derivs& D, std::size_t i) {
    return D.d1[0][i] * D.d1[0][i] + D.d1[1][i] * D.d1[1][i] + D.d1[2][i] * D.d1[2][i];
}

double hess_sq(const Derivs& D, std::size_t i) {
    double s = 0.0;
    for (int d = 0; d < 3; ++d)
        for (int l = 0; l < 3; ++l) s += D.d2[d][l][i] * D.d2[d][l][i];
    return s;
}

}  // namespace

EnergyReport energy_report(const FieldSet& solution, const FieldSet& ansatz, const RarefactionWave& wave,
                           const GasParams& g, double wave_time) {
    const auto& grid = solution.grid;
    if (!(ansatz.grid == grid)) throw DomainError("energy_report: grid mismatch");
    const auto S = compute_primitives(solution, g);
    const auto A = compute_primitives(ansatz, g);
    const std::size_t n = grid.size();
    for (std::size_t i = 0; i < n; ++i)
        if (!(S.rho[i] > 0.0) || !(S.theta[i] > 0.0) || !(A.rho[i] > 0.0) || !(A.theta[i] > 0.0))
            throw DomainError("energy_report: nonpositive density or temperature");

    std::vector<double> phi(n), zeta(n);
    std::array<std::vector<double>, 3> psi;
    for (auto& v : psi) v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        phi[i] = S.rho[i] - A.rho[i];
        zeta[i] = S.theta[i] - A.theta[i];
        for (int k = 0; k < 3; ++k) psi[k][i] = S.u[k][i] - A.u[k][i];
    }
    const auto Dphi = derivs(grid, phi, true);
    const auto Dzeta = derivs(grid, zeta, true);
    std::array<Derivs, 3> Dpsi;
    for (int k = 0; k < 3; ++k) Dpsi[k] = derivs(grid, psi[k], true);

    const auto split_phi = decompose(ScalarField{grid, phi});
    const auto split_zeta = decompose(ScalarField{grid, zeta});
    std::array<ModeSplit, 3> split_psi;
    for (int k = 0; k < 3; ++k) split_psi[k] = decompose(ScalarField{grid, psi[k]});

    std::vector<double> rbar(grid.n1), tbar(grid.n1);
    for (int i = 0; i < grid.n1; ++i) {
        const auto p = wave.profile(wave_time, grid.x1(i));
        rbar[i] = p.rho;
        tbar[i] = p.theta;
    }

    EnergyReport r;
    r.tau = solution.time;
    const double gm = g.gamma;
    for (std::size_t id = 0; id < n; ++id) {
        const int i = static_cast<int>(id % grid.n1);
        const double rb = rbar[i], tb = tbar[i];
        double psi2 = 0.0, gpsi = 0.0, hpsi = 0.0, nz_psi = 0.0;
        for (int k = 0; k < 3; ++k) {
            psi2 += psi[k][id] * psi[k][id];
            gpsi += grad_sq(Dpsi[k], id);
            hpsi += hess_sq(Dpsi[k], id);
            nz_psi += split_psi[k].nonzero.v[id] * split_psi[k].nonzero.v[id];
        }
        r.basic += std::pow(rb, gm - 2.0) * phi[id] * phi[id] + rb * psi2 + std::pow(rb, 2.0 - gm) * zeta[id] * zeta[id];
        r.first_order += tb / rb * grad_sq(Dphi, id) + rb * gpsi + rb / tb * grad_sq(Dzeta, id);
        r.second_order += tb / rb * hess_sq(Dphi, id) + rb * hpsi + rb / tb * hess_sq(Dzeta, id);
        r.dissipation += std::pow(tb, g.alpha) * gpsi + std::pow(tb, g.alpha - 1.0) * grad_sq(Dzeta, id);
        const double rho = S.rho[id], th = S.theta[id], rt = A.rho[id], tt = A.theta[id];
        r.relative_entropy +=
            g.R * rho * tt * phi_hat(rt / rho) + 0.5 * rho * psi2 + g.cv() * rho * tt * phi_hat(th / tt);
        const double pn = split_phi.nonzero.v[id], zn = split_zeta.nonzero.v[id];
        r.nonzero_energy += tb / rb * pn * pn + rb * nz_psi + rb / tb * zn * zn;
        if (rho < 0.5 * rt || rho > 1.5 * rt || th < 0.5 * tt || th > 1.5 * tt) ++r.sandwich_violations;
    }
    const double vol = grid.cell_volume();
    r.basic *= vol;
    r.first_order *= vol;
    r.second_order *= vol;
    r.dissipation *= vol;
    r.relative_entropy *= vol;
    r.nonzero_energy *= vol;
    return r;
}

const std::vector<GnCase>& all_gn_cases() {
    static const std::vector<GnCase> v = {GnCase::l4_slab,  GnCase::l6_slab,  GnCase::linf_slab,
                                          GnCase::l4_torus, GnCase::l6_torus, GnCase::linf_torus};
    return v;
}

std::string to_string(GnCase c) {
    switch (c) {
        case GnCase::l4_slab: return "L4-slab";
        case GnCase::l6_slab: return "L6-slab";
        case GnCase::linf_slab: return "Linf-slab";
        case GnCase::l4_torus: return "L4-torus";
        case GnCase::l6_torus: return "L6-torus";
        case GnCase::linf_torus: return "Linf-torus";
    }
    return "?";
}

GnCase parse_gn_case(const std::string& s) {
    for (auto c : all_gn_cases())
        if (to_string(c) == s) return c;
    throw ConfigError("unknown G-N case '" + s + "'");
}

GnReport gn_check(const ScalarField& u, GnCase which) {
    const auto& g = u.grid;
    const bool torus = which == GnCase::l4_torus || which == GnCase::l6_torus || which == GnCase::linf_torus;
    if (g.dims != 3) throw DomainError("gn_check: needs a 3-D grid");
    if (torus && !(g.periodic_normal && std::fabs(2.0 * g.L - g.period) <= 1e-12 * g.period))
        throw DomainError("gn_check: torus cases need a fully periodic cube");
    if (!torus && g.periodic_normal) throw DomainError("gn_check: slab cases need a non-periodic normal axis");

    GnReport r;
    r.which = which;
    const auto D = derivs(g, u.v, true);
    const std::size_t n = g.size();
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s0 += u.v[i] * u.v[i];
        s1 += grad_sq(D, i);
        s2 += hess_sq(D, i);
    }
    const double vol = g.cell_volume();
    const double a = std::sqrt(s0 * vol), b = std::sqrt(s1 * vol), c = std::sqrt(s2 * vol);
    r.norm_u = a;
    r.norm_grad = b;
    r.norm_hess = c;
    const double L = g.period;
    switch (which) {
        case GnCase::l4_slab:
            r.lhs = lp_norm(u.v, g, 4.0);
            r.rhs = std::pow(L, -0.5) * std::pow(b, 0.25) * std::pow(a, 0.75) +
                    std::pow(L, -0.25) * std::pow(b, 0.5) * std::pow(a, 0.5) + std::pow(b, 0.75) * std::pow(a, 0.25);
            break;
        case GnCase::l6_slab:
            r.lhs = lp_norm(u.v, g, 6.0);
            r.rhs = std::pow(L, -2.0 / 3.0) * std::cbrt(b) * std::pow(a, 2.0 / 3.0) +
                    std::pow(L, -1.0 / 3.0) * std::pow(b, 2.0 / 3.0) * std::cbrt(a) + b;
            break;
        case GnCase::linf_slab:
            r.lhs = lp_norm(u.v, g, 0.0);
            r.rhs = std::sqrt(b * a) / L + b / std::sqrt(L) + std::pow(c, 0.75) * std::pow(a, 0.25);
            break;
        case GnCase::l4_torus:
            r.lhs = lp_norm(u.v, g, 4.0);
            r.rhs = std::pow(b, 0.75) * std::pow(a, 0.25) + std::pow(L, -0.75) * a;
            break;
        case GnCase::l6_torus:
            r.lhs = lp_norm(u.v, g, 6.0);
            r.rhs = b + a / L;
            break;
        case GnCase::linf_torus:
            r.lhs = lp_norm(u.v, g, 0.0);
            r.rhs = std::pow(c, 0.75) * std::pow(a, 0.25) + std::pow(L, -1.5) * a;
            break;
    }
    r.ratio = r.lhs == 0.0 ? 0.0 : r.lhs / r.rhs;
    return r;
}

Distance sup_distance(const FieldSet& solution, const RarefactionWave& wave, const GasParams& g, double t, double h,
                      double x_scale) {
    Distance d;
    if (!(t >= h) || !(t > 0.0)) return d;
    d.included = true;
    const auto& grid = solution.grid;
    std::vector<WaveSample> ex(grid.n1);
    for (int i = 0; i < grid.n1; ++i) ex[i] = wave.exact(x_scale * grid.x1(i) / t);
    const double inv_cv = 1.0 / g.cv();
    for (std::size_t id = 0; id < grid.size(); ++id) {
        const int i = static_cast<int>(id % grid.n1);
        const double r = solution.q[0][id];
        const double m1 = solution.q[1][id];
        const double ke =
            r > 0.0 ? 0.5 * (m1 * m1 + solution.q[2][id] * solution.q[2][id] + solution.q[3][id] * solution.q[3][id]) / r
                    : 0.0;
        const double n = (solution.q[4][id] - ke) * inv_cv;  // rho theta
        const double dr = std::fabs(r - ex[i].state.rho), dm = std::fabs(m1 - ex[i].m), dn = std::fabs(n - ex[i].n);
        d.rho = std::max(d.rho, dr);
        d.m = std::max(d.m, dm);
        d.n = std::max(d.n, dn);
        const double loc = std::max({dr, dm, dn});
        if (loc > d.max) {
            d.max = loc;
            d.argmax_x1 = x_scale * grid.x1(i);
            d.argmax_component = loc == dr ? 0 : loc == dm ? 1 : 2;
        }
    }
    return d;
}

}  // namespace rarelab
