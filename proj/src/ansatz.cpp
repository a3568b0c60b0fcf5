#include "rarelab/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rarelab {

std::array<double, 5> constant_conserved(const GasParams& g, const PrimState& s) {
    return {s.rho, s.rho * s.u1, 0.0, 0.0, total_energy(g, s.rho, {s.u1, 0.0, 0.0}, s.theta)};
}

BackgroundRun evolve_periodic_background(const PrimState& state, const FieldSet& pert, const GasParams& g,
                                         SolverConfig cfg, double horizon, const BackgroundOptions& opts) {
    if (!pert.grid.periodic_normal) throw ConfigError("background: perturbation must live on a torus grid");
    cfg.boundary = BoundaryMode::fully_periodic;
    const auto base = constant_conserved(g, state);
    FieldSet init = pert;
    init.time = 0.0;
    for (int c = 0; c < 5; ++c)
        for (auto& v : init.q[c]) v += base[c];

    BackgroundRun out;
    out.state = state;
    const std::size_t n = init.grid.size();
    RunOptions ro;
    ro.sample_times = opts.sample_times;
    ro.on_sample = [&](const FieldSet& f, const StepDiagnostics&) {
        BackgroundSample s;
        s.t = f.time;
        for (int c = 0; c < 5; ++c) {
            double mx = 0.0, sum = 0.0, comp = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = f.q[c][i] - base[c];
                mx = std::max(mx, std::fabs(d));
                // Neumaier summation keeps the mean drift check at round-off level
                const double t = sum + d;
                comp += std::fabs(sum) >= std::fabs(d) ? (sum - t) + d : (d - t) + sum;
                sum = t;
            }
            s.dev_comp_inf[c] = mx;
            s.dev_mean[c] = (sum + comp) / static_cast<double>(n);
            s.dev_inf = std::max(s.dev_inf, mx);
        }
        out.series.push_back(s);
        if (opts.keep_snapshots) out.snapshots.push_back(f);
    };
    NavierStokesSolver solver(g, cfg, init.grid, nullptr);
    const auto res = solver.run(init, horizon, ro);
    out.steps = res.steps;

    if (!out.series.empty()) {
        const auto& first = out.series.front();
        for (const auto& s : out.series)
            for (int c = 0; c < 5; ++c)
                out.max_mean_drift = std::max(out.max_mean_drift, std::fabs(s.dev_mean[c] - first.dev_mean[c]));
    }
    std::vector<double> xs, ys;
    for (const auto& s : out.series)
        if (s.t >= opts.fit_from * horizon && s.dev_inf > 0.0) {
            xs.push_back(s.t);
            ys.push_back(s.dev_inf);
        }
    if (xs.size() >= 3) {
        out.fit = fit_rate(xs, ys, RateModel::exponential);
        out.fit_valid = true;
    }
    return out;
}

FieldSet tile_deviation(const FieldSet& bg, const std::array<double, 5>& constant, const SlabGrid& grid) {
    const auto& b = bg.grid;
    if (!b.periodic_normal) throw ConfigError("tile: background must live on a torus grid");
    if (b.n2 != grid.n2 || b.n3 != grid.n3 || b.dims != grid.dims || std::fabs(b.period - grid.period) > 1e-12 * grid.period)
        throw ConfigError("tile: transverse layout of background and slab differ");
    long offset = 0;
    if (b.n1 > 1) {
        if (std::fabs(b.h1() - grid.h1()) > 1e-9 * grid.h1())
            throw ConfigError("tile: background x1 spacing differs from the slab spacing");
        const double s = (0.5 * b.period - grid.L) / grid.h1();
        if (std::fabs(s - std::round(s)) > 1e-6) throw ConfigError("tile: background cell is not aligned with the slab");
        offset = std::lround(s);
    }
    FieldSet out(grid);
    out.time = bg.time;
    const long nb = b.n1;
    for (int k = 0; k < grid.n3; ++k)
        for (int j = 0; j < grid.n2; ++j)
            for (int i = 0; i < grid.n1; ++i) {
                const int ib = nb == 1 ? 0 : static_cast<int>(((i + offset) % nb + nb) % nb);
                const auto src = b.index(ib, j, k), dst = grid.index(i, j, k);
                for (int c = 0; c < 5; ++c) out.q[c][dst] = bg.q[c][src] - constant[c];
            }
    return out;
}

Ansatz build_ansatz(const FieldSet* minus, const FieldSet* plus, const RarefactionWave& wave, const SlabGrid& grid,
                    double t) {
    const auto& g = wave.gas();
    const auto cm = constant_conserved(g, wave.cutoff_left());
    const auto cp = constant_conserved(g, wave.right());
    FieldSet dm, dp;
    if (minus) dm = tile_deviation(*minus, cm, grid);
    if (plus) dp = tile_deviation(*plus, cp, grid);

    const double den[3] = {cp[0] - cm[0], cp[1] - cm[1], cp[4] - cm[4]};
    for (int w = 0; w < 3; ++w)
        if (std::fabs(den[w]) < 1e-14 * (1.0 + std::fabs(cp[w == 2 ? 4 : w])))
            throw ConfigError("ansatz: end states give a zero weight denominator");

    Ansatz a;
    a.cons = FieldSet(grid);
    a.cons.time = t;
    for (auto& v : a.weight) v.resize(grid.n1);
    std::vector<std::array<double, 5>> bar(grid.n1);
    for (int i = 0; i < grid.n1; ++i) {
        const auto p = wave.profile(t, grid.x1(i));
        bar[i] = {p.rho, p.rho * p.u1, 0.0, 0.0, total_energy(g, p.rho, {p.u1, 0.0, 0.0}, p.theta)};
        a.weight[0][i] = (bar[i][0] - cm[0]) / den[0];
        a.weight[1][i] = (bar[i][1] - cm[1]) / den[1];
        a.weight[2][i] = (bar[i][4] - cm[4]) / den[2];
    }
    static constexpr int which[5] = {0, 1, 1, 1, 2};
    for (int k = 0; k < grid.n3; ++k)
        for (int j = 0; j < grid.n2; ++j)
            for (int i = 0; i < grid.n1; ++i) {
                const auto id = grid.index(i, j, k);
                for (int c = 0; c < 5; ++c) {
                    const double eta = a.weight[which[c]][i];
                    double v = bar[i][c];
                    if (minus) v += (1.0 - eta) * dm.q[c][id];
                    if (plus) v += eta * dp.q[c][id];
                    a.cons.q[c][id] = v;
                }
                if (!(a.cons.q[0][id] > 0.0)) {
                    std::ostringstream os;
                    os << "ansatz: nonpositive density at cell " << id << " (x1=" << grid.x1(i) << ")";
                    throw ConfigError(os.str());
                }
            }
    a.prim = compute_primitives(a.cons, g);
    return a;
}

double AnsatzErrors::norm_inf(const std::vector<double>& v) const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

AnsatzErrors ansatz_errors(const Ansatz& prev, const Ansatz& cur, const Ansatz& next, double dt, const GasParams& g,
                           double mult, const RarefactionWave& wave, double t) {
    const auto& grid = cur.cons.grid;
    const std::size_t n = grid.size();
    const auto& q = cur.cons.q;
    const auto& P = cur.prim;
    AnsatzErrors err;
    std::vector<double>* res[5] = {&err.e0, &err.e[0], &err.e[1], &err.e[2], &err.e4};
    for (int c = 0; c < 5; ++c) {
        res[c]->assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) (*res[c])[i] = (next.cons.q[c][i] - prev.cons.q[c][i]) / (2.0 * dt);
    }
    auto add_div = [&](std::vector<double>& dst, const std::vector<double>& flux, int d, double s) {
        const auto df = derivative(grid, flux, d);
        for (std::size_t i = 0; i < n; ++i) dst[i] += s * df[i];
    };

    std::array<std::array<std::vector<double>, 3>, 3> G;  // G[k][d] = d_d u_k
    for (int k = 0; k < 3; ++k)
        for (int d = 0; d < 3; ++d) G[k][d] = derivative(grid, P.u[k], d);
    std::vector<double> mu(n), lam(n), kap(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto tr = transport(g, std::max(P.theta[i], 0.0));
        mu[i] = tr.mu;
        lam[i] = tr.lambda;
        kap[i] = tr.kappa;
    }
    std::vector<double> flux(n);
    for (int d = 0; d < 3; ++d) {
        if (d >= grid.dims) continue;
        for (std::size_t i = 0; i < n; ++i) flux[i] = q[1 + d][i];
        add_div(err.e0, flux, d, 1.0);
        std::vector<double> work(n, 0.0);
        for (int k = 0; k < 3; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                double tau = mu[i] * (G[k][d][i] + G[d][k][i]);
                if (k == d) tau += lam[i] * (G[0][0][i] + G[1][1][i] + G[2][2][i]);
                work[i] += tau * P.u[k][i];
                flux[i] = q[1 + k][i] * P.u[d][i] + (k == d ? P.p[i] : 0.0) - mult * tau;
            }
            add_div(err.e[k], flux, d, 1.0);
        }
        const auto dth = derivative(grid, P.theta, d);
        for (std::size_t i = 0; i < n; ++i)
            flux[i] = (q[4][i] + P.p[i]) * P.u[d][i] - mult * (kap[i] * dth[i] + work[i]);
        add_div(err.e4, flux, d, 1.0);
    }

    err.e1_corrected = err.e[0];
    err.e4_corrected = err.e4;
    const double visc = 2.0 * g.mu1 + g.lambda1;
    for (int i = 0; i < grid.n1; ++i) {
        const auto p = wave.profile(t, grid.x1(i));
        const double ta = std::pow(p.theta, g.alpha);
        const double ta1 = g.alpha * std::pow(p.theta, g.alpha - 1.0);
        const double a1 = ta1 * p.d_theta * p.d_u1 + ta * p.dd_u1;
        const double b = ta1 * p.d_theta * p.d_theta + ta * p.dd_theta;
        const double c = ta1 * p.d_theta * p.u1 * p.d_u1 + ta * (p.d_u1 * p.d_u1 + p.u1 * p.dd_u1);
        for (int k = 0; k < grid.n3; ++k)
            for (int j = 0; j < grid.n2; ++j) {
                const auto id = grid.index(i, j, k);
                err.e1_corrected[id] += mult * visc * a1;
                err.e4_corrected[id] += mult * (g.kappa1 * b + visc * c);
            }
    }
    return err;
}

}  // namespace rarelab
