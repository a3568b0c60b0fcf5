#include "rarelab/ns_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rarelab {

namespace {

inline double minmod(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    return std::fabs(a) < std::fabs(b) ? a : b;
}

}  // namespace

void SolverConfig::validate() const {
    auto need = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("solver: ") + what);
    };
    need(std::isfinite(eps) && eps >= 0.0, "eps must be >= 0");
    need(cfl > 0.0 && cfl < 1.0, "cfl must lie in (0, 1)");
    need(visc_safety > 0.0 && visc_safety <= 1.0, "visc_safety must lie in (0, 1]");
    need(floor_rho > 0.0 && floor_theta > 0.0, "floors must be > 0");
    need(fixed_dt >= 0.0, "fixed_dt must be >= 0");
    need(min_dt > 0.0, "min_dt must be > 0");
}

NavierStokesSolver::NavierStokesSolver(const GasParams& g, const SolverConfig& cfg, const SlabGrid& grid,
                                       const RarefactionWave* wave)
    : gas_(g), cfg_(cfg), grid_(grid), wave_(wave) {
    gas_.validate();
    cfg_.validate();
    grid_.validate();
    if (cfg_.boundary == BoundaryMode::fully_periodic && !grid_.periodic_normal)
        throw ConfigError("solver: fully-periodic boundary needs a grid with periodic_normal");
    if (cfg_.boundary == BoundaryMode::pinned_profile) {
        if (grid_.periodic_normal) throw ConfigError("solver: pinned boundary on a periodic grid");
        if (!wave_ || !(wave_->spec().nu > 0.0))
            throw ConfigError("solver: pinned boundary needs a smooth wave with nu > 0");
    }
    if (cfg_.framing == Framing::scaled && cfg_.boundary == BoundaryMode::pinned_profile && !(cfg_.eps > 0.0))
        throw ConfigError("solver: scaled framing needs eps > 0");

    o2_ = grid_.dims >= 2 ? ng_ : 0;
    o3_ = grid_.dims >= 3 ? ng_ : 0;
    p1_ = grid_.n1 + 2 * ng_;
    p2_ = grid_.n2 + 2 * o2_;
    p3_ = grid_.n3 + 2 * o3_;
    stride_[0] = 1;
    stride_[1] = p1_;
    stride_[2] = static_cast<std::ptrdiff_t>(p1_) * p2_;
    h_[0] = grid_.h1();
    h_[1] = grid_.h2();
    h_[2] = grid_.h3();
    active_[0] = grid_.n1 > 1;
    active_[1] = grid_.dims >= 2;
    active_[2] = grid_.dims >= 3;
    const std::size_t np = static_cast<std::size_t>(p1_) * p2_ * p3_;
    for (auto& v : w_) v.assign(np, 0.0);
    for (auto& v : tend_) v.assign(grid_.size(), 0.0);
    for (auto& s : stage_)
        for (auto& v : s) v.assign(grid_.size(), 0.0);
    for (auto& v : acc_) v.assign(grid_.size(), 0.0);
}

void NavierStokesSolver::load_primitives(const std::array<std::vector<double>, 5>& q, double t) {
    const auto& g = grid_;
    const double inv_cv = 1.0 / gas_.cv();
    double min_rho = INFINITY, min_theta = INFINITY;
    std::size_t bad = std::numeric_limits<std::size_t>::max();
    for (int k = 0; k < g.n3; ++k)
        for (int j = 0; j < g.n2; ++j) {
            const std::size_t u0 = g.index(0, j, k), p0 = pid(0, j, k);
            for (int i = 0; i < g.n1; ++i) {
                const double r = q[0][u0 + i];
                const double ir = 1.0 / r;
                const double u1 = q[1][u0 + i] * ir, u2 = q[2][u0 + i] * ir, u3 = q[3][u0 + i] * ir;
                const double th = (q[4][u0 + i] * ir - 0.5 * (u1 * u1 + u2 * u2 + u3 * u3)) * inv_cv;
                const std::size_t p = p0 + i;
                w_[0][p] = r;
                w_[1][p] = u1;
                w_[2][p] = u2;
                w_[3][p] = u3;
                w_[4][p] = th;
                w_[5][p] = gas_.R * r * th;
                if (!(r >= cfg_.floor_rho) || !(th >= cfg_.floor_theta)) bad = std::min(bad, u0 + i);
                min_rho = std::min(min_rho, r);
                min_theta = std::min(min_theta, th);
            }
        }
    if (bad != std::numeric_limits<std::size_t>::max()) {
        StepDiagnostics d;
        d.time = t;
        d.min_rho = min_rho;
        d.min_theta = min_theta;
        std::ostringstream os;
        os << "positivity floor violated at t=" << t << " cell " << bad << " (i=" << bad % g.n1
           << "): rho=" << q[0][bad] << " min_rho=" << min_rho << " min_theta=" << min_theta;
        throw RunFailure(os.str(), d);
    }
    fill_ghosts(t);
}

void NavierStokesSolver::fill_ghosts(double t) {
    const auto& g = grid_;
    if (g.dims >= 2)
        for (auto& v : w_)
            for (int k = 0; k < g.n3; ++k)
                for (int s = 1; s <= ng_; ++s) {
                    std::copy_n(&v[pid(0, g.n2 - s, k)], g.n1, &v[pid(0, -s, k)]);
                    std::copy_n(&v[pid(0, s - 1, k)], g.n1, &v[pid(0, g.n2 + s - 1, k)]);
                }
    if (g.dims >= 3)
        for (auto& v : w_)
            for (int s = 1; s <= ng_; ++s)
                for (int j = -o2_; j < g.n2 + o2_; ++j) {
                    std::copy_n(&v[pid(0, j, g.n3 - s)], g.n1, &v[pid(0, j, -s)]);
                    std::copy_n(&v[pid(0, j, s - 1)], g.n1, &v[pid(0, j, g.n3 + s - 1)]);
                }

    double ghost[2 * 2][6];
    const int gi[4] = {-2, -1, g.n1, g.n1 + 1};
    if (cfg_.boundary == BoundaryMode::pinned_profile) {
        const bool scaled = cfg_.framing == Framing::scaled;
        for (int s = 0; s < 4; ++s) {
            const double x = g.x1(gi[s]);
            const auto p = scaled ? wave_->profile(cfg_.eps * t, cfg_.eps * x) : wave_->profile(t, x);
            ghost[s][0] = p.rho;
            ghost[s][1] = p.u1;
            ghost[s][2] = 0.0;
            ghost[s][3] = 0.0;
            ghost[s][4] = p.theta;
            ghost[s][5] = gas_.R * p.rho * p.theta;
        }
    }
    for (int k = -o3_; k < g.n3 + o3_; ++k)
        for (int j = -o2_; j < g.n2 + o2_; ++j) {
            const std::size_t row = pid(0, j, k);
            for (int s = 0; s < 4; ++s) {
                const std::size_t dst = row + gi[s];
                if (cfg_.boundary == BoundaryMode::pinned_profile) {
                    for (int c = 0; c < 6; ++c) w_[c][dst] = ghost[s][c];
                } else {
                    const int src = ((gi[s] % g.n1) + g.n1) % g.n1;
                    for (int c = 0; c < 6; ++c) w_[c][dst] = w_[c][row + src];
                }
            }
        }
}

inline void NavierStokesSolver::face_flux(std::size_t a, std::size_t b, std::ptrdiff_t sd, int d,
                                          double* flux) const {
    for (int c = 0; c < 5; ++c) flux[c] = 0.0;
    const double gam = gas_.gamma;

    if (cfg_.convective != ConvectiveScheme::none) {
        static constexpr int vars[5] = {0, 1, 2, 3, 5};
        double L[5], R[5];
        bool ok = false;
        if (cfg_.convective == ConvectiveScheme::rusanov_muscl) {
            for (int n = 0; n < 5; ++n) {
                const double* v = w_[vars[n]].data();
                const double dc = v[b] - v[a];
                L[n] = v[a] + 0.5 * minmod(v[a] - v[a - sd], dc);
                R[n] = v[b] - 0.5 * minmod(dc, v[b + sd] - v[b]);
            }
            ok = L[0] > 0.0 && R[0] > 0.0 && L[4] > 0.0 && R[4] > 0.0;
        }
        if (!ok)
            for (int n = 0; n < 5; ++n) {
                L[n] = w_[vars[n]][a];
                R[n] = w_[vars[n]][b];
            }
        const double unL = L[1 + d], unR = R[1 + d];
        const double keL = 0.5 * L[0] * (L[1] * L[1] + L[2] * L[2] + L[3] * L[3]);
        const double keR = 0.5 * R[0] * (R[1] * R[1] + R[2] * R[2] + R[3] * R[3]);
        const double EL = L[4] / (gam - 1.0) + keL, ER = R[4] / (gam - 1.0) + keR;
        const double cL = std::sqrt(gam * L[4] / L[0]), cR = std::sqrt(gam * R[4] / R[0]);
        const double smax = std::max(std::fabs(unL) + cL, std::fabs(unR) + cR);
        const double mL = L[0] * unL, mR = R[0] * unR;
        flux[0] = 0.5 * (mL + mR) - 0.5 * smax * (R[0] - L[0]);
        for (int k = 0; k < 3; ++k)
            flux[1 + k] = 0.5 * (mL * L[1 + k] + mR * R[1 + k]) - 0.5 * smax * (R[0] * R[1 + k] - L[0] * L[1 + k]);
        flux[1 + d] += 0.5 * (L[4] + R[4]);
        flux[4] = 0.5 * ((EL + L[4]) * unL + (ER + R[4]) * unR) - 0.5 * smax * (ER - EL);
    }

    const double mult = cfg_.viscous_multiplier();
    if (cfg_.viscous && mult > 0.0) {
        const double th_f = 0.5 * (w_[4][a] + w_[4][b]);
        const double pw = mult * std::pow(th_f, gas_.alpha);
        const double mu = gas_.mu1 * pw, lam = gas_.lambda1 * pw, kap = gas_.kappa1 * pw;
        // grad[k][l] = d_l u_k at the face
        double grad[3][3] = {};
        const double ih = 1.0 / h_[d];
        for (int k = 0; k < 3; ++k) grad[k][d] = (w_[1 + k][b] - w_[1 + k][a]) * ih;
        for (int t = 0; t < 3; ++t) {
            if (t == d || !active_[t]) continue;
            const std::ptrdiff_t st = stride_[t];
            const double q = 0.25 / h_[t];
            for (int k = 0; k < 3; ++k) {
                const double* u = w_[1 + k].data();
                grad[k][t] = (u[a + st] - u[a - st] + u[b + st] - u[b - st]) * q;
            }
        }
        const double div = grad[0][0] + grad[1][1] + grad[2][2];
        double work = 0.0;
        for (int k = 0; k < 3; ++k) {
            double tau = mu * (grad[k][d] + grad[d][k]);
            if (k == d) tau += lam * div;
            flux[1 + k] -= tau;
            work += tau * 0.5 * (w_[1 + k][a] + w_[1 + k][b]);
        }
        flux[4] -= work + kap * (w_[4][b] - w_[4][a]) * ih;
    }
}

void NavierStokesSolver::compute_tendency(double t, std::vector<double>* out, std::array<double, 5>& brate) {
    const auto& g = grid_;
    for (int c = 0; c < 5; ++c) std::fill(out[c].begin(), out[c].end(), 0.0);
    brate.fill(0.0);
    double flux[5];

    if (active_[0]) {
        const double ih = 1.0 / h_[0];
        const double face_area = g.cell_volume() / g.h1();
        for (int k = 0; k < g.n3; ++k)
            for (int j = 0; j < g.n2; ++j) {
                const std::size_t u0 = g.index(0, j, k), p0 = pid(0, j, k);
                for (int f = 0; f <= g.n1; ++f) {
                    const std::size_t a = p0 + f - 1;
                    face_flux(a, a + 1, 1, 0, flux);
                    if (f >= 1)
                        for (int c = 0; c < 5; ++c) out[c][u0 + f - 1] -= flux[c] * ih;
                    if (f < g.n1)
                        for (int c = 0; c < 5; ++c) out[c][u0 + f] += flux[c] * ih;
                    if (f == 0)
                        for (int c = 0; c < 5; ++c) brate[c] += flux[c] * face_area;
                    if (f == g.n1)
                        for (int c = 0; c < 5; ++c) brate[c] -= flux[c] * face_area;
                }
            }
    }
    for (int d = 1; d < 3; ++d) {
        if (!active_[d]) continue;
        const double ih = 1.0 / h_[d];
        const int nd = d == 1 ? g.n2 : g.n3;
        const std::ptrdiff_t sd = stride_[d];
        for (int outer = 0; outer < (d == 1 ? g.n3 : g.n2); ++outer)
            for (int f = 0; f <= nd; ++f) {
                const int j = d == 1 ? f - 1 : outer;
                const int k = d == 1 ? outer : f - 1;
                const std::size_t pa = pid(0, j, k);
                for (int i = 0; i < g.n1; ++i) {
                    face_flux(pa + i, pa + i + sd, sd, d, flux);
                    if (f >= 1) {
                        const std::size_t ua = d == 1 ? g.index(i, f - 1, k) : g.index(i, j, f - 1);
                        for (int c = 0; c < 5; ++c) out[c][ua] -= flux[c] * ih;
                    }
                    if (f < nd) {
                        const std::size_t ub = d == 1 ? g.index(i, f, k) : g.index(i, j, f);
                        for (int c = 0; c < 5; ++c) out[c][ub] += flux[c] * ih;
                    }
                }
            }
    }
    if (forcing_) {
        double s[5];
        for (int k = 0; k < g.n3; ++k)
            for (int j = 0; j < g.n2; ++j)
                for (int i = 0; i < g.n1; ++i) {
                    forcing_(t, g.x1(i), g.x2(j), g.x3(k), s);
                    const std::size_t u = g.index(i, j, k);
                    for (int c = 0; c < 5; ++c) out[c][u] += s[c];
                }
    }
}

FieldSet NavierStokesSolver::rhs(const FieldSet& f, std::array<double, 5>* boundary_rate) {
    if (!(f.grid == grid_)) throw ConfigError("solver: field grid mismatch");
    load_primitives(f.q, f.time);
    std::array<double, 5> br;
    FieldSet out(grid_);
    out.time = f.time;
    compute_tendency(f.time, out.q.data(), br);
    if (boundary_rate) *boundary_rate = br;
    return out;
}

double NavierStokesSolver::stable_dt(const FieldSet& f) {
    load_primitives(f.q, f.time);
    const auto& g = grid_;
    const double mult = cfg_.viscous ? cfg_.viscous_multiplier() : 0.0;
    double conv = 0.0, diff = 0.0;
    double inv_h2 = 0.0;
    for (int d = 0; d < 3; ++d)
        if (active_[d]) inv_h2 += 1.0 / (h_[d] * h_[d]);
    const double dcoef = std::max(2.0 * gas_.mu1 + gas_.lambda1, gas_.mu1);
    const double kcoef = gas_.kappa1 / gas_.cv();
    for (int k = 0; k < g.n3; ++k)
        for (int j = 0; j < g.n2; ++j) {
            const std::size_t p0 = pid(0, j, k);
            for (int i = 0; i < g.n1; ++i) {
                const std::size_t p = p0 + i;
                const double c = std::sqrt(gas_.gamma * w_[5][p] / w_[0][p]);
                double s = 0.0;
                if (cfg_.convective != ConvectiveScheme::none)
                    for (int d = 0; d < 3; ++d)
                        if (active_[d]) s += (std::fabs(w_[1 + d][p]) + c) / h_[d];
                conv = std::max(conv, s);
                if (mult > 0.0) diff = std::max(diff, std::pow(w_[4][p], gas_.alpha) / w_[0][p]);
            }
        }
    double dt = INFINITY;
    if (conv > 0.0) dt = cfg_.cfl / conv;
    if (mult > 0.0 && diff > 0.0)
        dt = std::min(dt, cfg_.visc_safety / (2.0 * mult * diff * std::max(dcoef, kcoef) * inv_h2));
    return dt;
}

StepDiagnostics NavierStokesSolver::diagnose(const FieldSet& f) const {
    StepDiagnostics d;
    d.time = f.time;
    const auto& g = grid_;
    const double vol = g.cell_volume();
    const double inv_cv = 1.0 / gas_.cv();
    d.min_rho = INFINITY;
    d.min_theta = INFINITY;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = f.q[0][i];
        const double ke = 0.5 * (f.q[1][i] * f.q[1][i] + f.q[2][i] * f.q[2][i] + f.q[3][i] * f.q[3][i]) / r;
        const double th = (f.q[4][i] - ke) / r * inv_cv;
        d.min_rho = std::min(d.min_rho, r);
        d.min_theta = std::min(d.min_theta, th);
        d.max_speed = std::max(d.max_speed, std::sqrt(2.0 * ke / r) + std::sqrt(gas_.gamma * gas_.R * std::max(th, 0.0)));
    }
    for (int c = 0; c < 5; ++c) {
        double s = 0.0;
        for (double v : f.q[c]) s += v;
        d.totals[c] = s * vol;
    }
    return d;
}

StepDiagnostics NavierStokesSolver::step(FieldSet& f, double dt_cap) {
    if (!(f.grid == grid_)) throw ConfigError("solver: field grid mismatch");
    const double t = f.time;
    const double adaptive = stable_dt(f);  // also loads stage-0 primitives
    double dt = cfg_.fixed_dt > 0.0 ? cfg_.fixed_dt : adaptive;
    if (dt_cap > 0.0) dt = std::min(dt, dt_cap);
    if (!(dt >= cfg_.min_dt) || !std::isfinite(dt)) {
        auto d = diagnose(f);
        d.dt = dt;
        std::ostringstream os;
        os << "time step underflow at t=" << t << ": dt=" << dt;
        throw RunFailure(os.str(), d);
    }
    const std::size_t n = grid_.size();
    std::array<double, 5> b0, b1, b2;
    std::array<double, 5> s0{}, s1{}, s2{};
    auto source_total = [&](std::array<double, 5>& s, double time) {
        if (!forcing_) return;
        double v[5];
        const double vol = grid_.cell_volume();
        for (int k = 0; k < grid_.n3; ++k)
            for (int j = 0; j < grid_.n2; ++j)
                for (int i = 0; i < grid_.n1; ++i) {
                    forcing_(time, grid_.x1(i), grid_.x2(j), grid_.x3(k), v);
                    for (int c = 0; c < 5; ++c) s[c] += v[c] * vol;
                }
    };

    // SSP-RK3 in increment form, so that zero tendencies leave the state bitwise unchanged
    compute_tendency(t, tend_.data(), b0);
    source_total(s0, t);
    auto& u1 = stage_[0];
    for (int c = 0; c < 5; ++c)
        for (std::size_t i = 0; i < n; ++i) {
            acc_[c][i] = tend_[c][i];
            u1[c][i] = f.q[c][i] + dt * tend_[c][i];
        }

    load_primitives(u1, t + dt);
    compute_tendency(t + dt, tend_.data(), b1);
    source_total(s1, t + dt);
    auto& u2 = stage_[1];
    const double quarter = 0.25 * dt;
    for (int c = 0; c < 5; ++c)
        for (std::size_t i = 0; i < n; ++i) {
            acc_[c][i] += tend_[c][i];
            u2[c][i] = f.q[c][i] + quarter * acc_[c][i];
        }

    load_primitives(u2, t + 0.5 * dt);
    compute_tendency(t + 0.5 * dt, tend_.data(), b2);
    source_total(s2, t + 0.5 * dt);
    constexpr double two_thirds = 2.0 / 3.0;
    const double sixth = dt / 6.0;
    for (int c = 0; c < 5; ++c)
        for (std::size_t i = 0; i < n; ++i) f.q[c][i] += sixth * (acc_[c][i] + 4.0 * tend_[c][i]);
    f.time = t + dt;

    auto d = diagnose(f);
    d.dt = dt;
    for (int c = 0; c < 5; ++c) {
        d.boundary_flux[c] = dt * (b0[c] / 6.0 + b1[c] / 6.0 + two_thirds * b2[c]);
        d.source[c] = dt * (s0[c] / 6.0 + s1[c] / 6.0 + two_thirds * s2[c]);
    }
    return d;
}

RunResult NavierStokesSolver::run(const FieldSet& initial, double horizon, const RunOptions& opts) {
    if (!(horizon >= 0.0)) throw ConfigError("run: horizon must be >= 0");
    RunResult res;
    res.final = initial;
    FieldSet& f = res.final;
    const double t0 = initial.time;
    const double t_end = t0 + horizon;
    std::vector<double> samples;
    for (double s : opts.sample_times)
        if (s >= t0 - 1e-12 && s <= t_end + 1e-12) samples.push_back(s);
    std::sort(samples.begin(), samples.end());
    std::size_t next = 0;
    res.last = diagnose(f);
    auto tol = [](double t) { return 1e-12 * std::max(1.0, std::fabs(t)); };
    while (next < samples.size() && samples[next] <= t0 + tol(t0)) {
        if (opts.on_sample) opts.on_sample(f, res.last);
        ++next;
    }
    if (horizon == 0.0) return res;
    while (f.time < t_end - tol(t_end)) {
        if (res.steps >= opts.max_steps) throw RunFailure("run: step limit reached", res.last);
        const double target = next < samples.size() ? std::min(samples[next], t_end) : t_end;
        auto d = step(f, target - f.time);
        if (std::fabs(f.time - target) <= tol(target)) f.time = target;
        d.time = f.time;
        d.step = ++res.steps;
        for (int c = 0; c < 5; ++c) res.boundary_flux_total[c] += d.boundary_flux[c];
        res.last = d;
        if (opts.on_step) opts.on_step(f, d);
        while (next < samples.size() && samples[next] <= f.time + tol(f.time)) {
            if (opts.on_sample) opts.on_sample(f, d);
            ++next;
        }
    }
    return res;
}

FieldSet rhs(const FieldSet& f, const GasParams& g, const SolverConfig& cfg, const RarefactionWave* wave) {
    return NavierStokesSolver(g, cfg, f.grid, wave).rhs(f);
}

StepDiagnostics step(FieldSet& f, const GasParams& g, const SolverConfig& cfg, const RarefactionWave* wave) {
    return NavierStokesSolver(g, cfg, f.grid, wave).step(f);
}

RunResult run(const FieldSet& initial, const GasParams& g, const SolverConfig& cfg, double horizon,
              const RunOptions& opts, const RarefactionWave* wave) {
    return NavierStokesSolver(g, cfg, initial.grid, wave).run(initial, horizon, opts);
}

std::string to_string(ConvectiveScheme s) {
    switch (s) {
        case ConvectiveScheme::none: return "none";
        case ConvectiveScheme::rusanov: return "rusanov";
        case ConvectiveScheme::rusanov_muscl: return "rusanov-muscl";
    }
    return "?";
}

ConvectiveScheme parse_convective(const std::string& s) {
    if (s == "none") return ConvectiveScheme::none;
    if (s == "rusanov") return ConvectiveScheme::rusanov;
    if (s == "rusanov-muscl") return ConvectiveScheme::rusanov_muscl;
    throw ConfigError("solver.convective: unknown scheme '" + s + "' (none | rusanov | rusanov-muscl)");
}

std::string to_string(BoundaryMode b) {
    return b == BoundaryMode::pinned_profile ? "pinned-profile" : "fully-periodic";
}

BoundaryMode parse_boundary(const std::string& s) {
    if (s == "pinned-profile") return BoundaryMode::pinned_profile;
    if (s == "fully-periodic") return BoundaryMode::fully_periodic;
    throw ConfigError("solver.boundary: unknown mode '" + s + "' (pinned-profile | fully-periodic)");
}

std::string to_string(Framing f) { return f == Framing::physical ? "physical" : "scaled"; }

Framing parse_framing(const std::string& s) {
    if (s == "physical") return Framing::physical;
    if (s == "scaled") return Framing::scaled;
    throw ConfigError("solver.framing: unknown framing '" + s + "' (physical | scaled)");
}

}  // namespace rarelab
