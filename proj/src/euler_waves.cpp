#include "rarelab/euler_waves.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "rarelab/errors.hpp"

namespace rarelab {

namespace {

struct TanhData {
    double w0, d1, d2;
};

TanhData tanh_data(double mid, double half, double delta, double x) {
    const double s = x / delta;
    const double th = std::tanh(s);
    const double e = std::exp(-2.0 * std::fabs(s));
    const double sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
    return {mid + half * th, half / delta * sech2, -2.0 * half / (delta * delta) * sech2 * th};
}

}  // namespace

RiemannInvariants riemann_invariants(const GasParams& g, const PrimState& s) {
    if (s.is_vacuum()) return {s.u1, 0.0, false};
    return {s.u1 - 2.0 * sound_speed(g, s) / (g.gamma - 1.0), rarelab::entropy(g, s), true};
}

WaveSample make_sample(const PrimState& s, Branch b) {
    WaveSample out;
    out.state = s;
    out.branch = b;
    if (!s.is_vacuum()) {
        out.m = s.rho * s.u1;
        out.n = s.rho * s.theta;
    }
    return out;
}

RarefactionWave::RarefactionWave(const WaveSpec& spec) : spec_(spec) {
    spec_.gas.validate();
    const auto& r = spec_.right;
    if (!(r.rho > 0.0) || !(r.theta > 0.0) || !std::isfinite(r.u1))
        throw ConfigError("wave: right state needs rho > 0 and theta > 0");
    if (!(spec_.nu >= 0.0) || !(spec_.nu < r.rho))
        throw ConfigError("wave: nu must satisfy 0 <= nu < rho_plus");
    if (!(spec_.delta > 0.0)) throw ConfigError("wave: delta must be > 0");
    if (!(spec_.time_shift >= 0.0)) throw ConfigError("wave: time_shift must be >= 0");

    const auto inv = riemann_invariants(spec_.gas, r);
    r31_ = inv.r31;
    entropy_ = inv.entropy;
    lambda3_plus_ = lambda3_speed(spec_.gas, r);
    w_plus_ = lambda3_plus_;
    if (spec_.nu > 0.0) {
        theta_nu_ = temperature_on_isentrope(spec_.gas, spec_.nu, entropy_);
        const double c_nu = sound_speed(spec_.gas, theta_nu_);
        u1_nu_ = r31_ + 2.0 * c_nu / (spec_.gas.gamma - 1.0);
        w_minus_ = u1_nu_ + c_nu;
    } else {
        u1_nu_ = r31_;
        w_minus_ = r31_;
    }
}

PrimState RarefactionWave::cutoff_left() const {
    if (!(spec_.nu > 0.0)) throw ConfigError("wave: cut-off left state needs nu > 0");
    return {spec_.nu, u1_nu_, theta_nu_};
}

PrimState RarefactionWave::fan_state(double xi) const {
    const auto& g = spec_.gas;
    const double c = std::max(0.0, (xi - r31_) * (g.gamma - 1.0) / (g.gamma + 1.0));
    const double theta = c * c / (g.gamma * g.R);
    const double rho =
        std::pow(g.R * theta / g.A, 1.0 / (g.gamma - 1.0)) * std::exp(-entropy_ / g.R);
    return PrimState::make(rho, xi - c, theta);
}

WaveSample RarefactionWave::exact(double xi) const {
    if (xi < r31_) return make_sample({0.0, r31_, 0.0}, Branch::left);
    if (xi > lambda3_plus_) return make_sample(spec_.right, Branch::right);
    return make_sample(fan_state(xi), Branch::fan);
}

WaveSample RarefactionWave::cutoff(double xi) const {
    if (!(spec_.nu > 0.0)) return exact(xi);
    if (xi < w_minus_) return make_sample(cutoff_left(), Branch::left);
    if (xi > lambda3_plus_) return make_sample(spec_.right, Branch::right);
    return make_sample(fan_state(xi), Branch::fan);
}

double RarefactionWave::burgers_data(double x) const {
    return tanh_data(0.5 * (w_plus_ + w_minus_), 0.5 * (w_plus_ - w_minus_), spec_.delta, x).w0;
}

BurgersPoint RarefactionWave::burgers(double t, double x1) const {
    const double mid = 0.5 * (w_plus_ + w_minus_);
    const double half = 0.5 * (w_plus_ - w_minus_);
    const double delta = spec_.delta;
    auto finish = [&](double x0) {
        const auto d = tanh_data(mid, half, delta, x0);
        const double inv = 1.0 / (1.0 + t * d.d1);
        return BurgersPoint{d.w0, x0, d.d1 * inv, d.d2 * inv * inv * inv};
    };
    if (t == 0.0) return finish(x1);

    double lo = std::min(x1 - w_plus_ * t, x1 - w_minus_ * t);
    double hi = std::max(x1 - w_plus_ * t, x1 - w_minus_ * t);
    double x0 = std::clamp(x1 - mid * t, lo, hi);
    constexpr double tol = 1e-13;
    double f_prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 300; ++it) {
        const auto d = tanh_data(mid, half, delta, x0);
        const double f = x0 + t * d.w0 - x1;
        if (std::fabs(f) < tol) return finish(x0);
        if (f < 0.0) lo = x0; else hi = x0;
        const double fp = 1.0 + t * d.d1;
        double next = x0 - f / fp;
        // Newton cycles near the tanh inflection; bisect whenever it stops halving |f|
        if (!(next > lo && next < hi) || !(fp > 0.0) || std::fabs(f) > 0.5 * f_prev) next = 0.5 * (lo + hi);
        f_prev = std::fabs(f);
        if (next == x0 || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(x0)))
            return finish(next);
        x0 = next;
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "burgers: no convergence at t=%.17g x1=%.17g bracket=[%.17g, %.17g]", t,
                  x1, lo, hi);
    throw NumericalError(buf);
}

ProfilePoint RarefactionWave::profile(double t, double x1) const {
    if (!(spec_.nu > 0.0)) throw ConfigError("wave: smooth profile needs nu > 0");
    const auto& g = spec_.gas;
    const double ts = t + (spec_.shifted ? spec_.time_shift : 0.0);
    const auto b = burgers(ts, x1);
    const double k = (g.gamma - 1.0) / (g.gamma + 1.0);
    const double q = 2.0 / (g.gamma - 1.0);
    const double c = k * (b.w - r31_);

    ProfilePoint p;
    p.w = b.w;
    p.u1 = b.w - c;
    p.theta = c * c / (g.gamma * g.R);
    p.rho = std::pow(g.R * p.theta / g.A, 1.0 / (g.gamma - 1.0)) * std::exp(-entropy_ / g.R);

    const double u_w = 1.0 - k;
    const double th_w = 2.0 * c * k / (g.gamma * g.R);
    const double th_ww = 2.0 * k * k / (g.gamma * g.R);
    const double rho_w = q * k * p.rho / c;
    const double rho_ww = q * (q - 1.0) * k * k * p.rho / (c * c);
    const double wx2 = b.w_x * b.w_x;
    p.d_u1 = u_w * b.w_x;
    p.d_theta = th_w * b.w_x;
    p.d_rho = rho_w * b.w_x;
    p.dd_u1 = u_w * b.w_xx;
    p.dd_theta = th_ww * wx2 + th_w * b.w_xx;
    p.dd_rho = rho_ww * wx2 + rho_w * b.w_xx;
    return p;
}

PlanarResidual RarefactionWave::planar_residual(double t, double x1, double h) const {
    const auto& g = spec_.gas;
    const auto c = profile(t, x1);
    const auto tp = profile(t + h, x1), tm = profile(t - h, x1);
    const auto xp = profile(t, x1 + h), xm = profile(t, x1 - h);
    const double inv = 0.5 / h;
    const double rho_t = (tp.rho - tm.rho) * inv;
    const double u_t = (tp.u1 - tm.u1) * inv;
    const double th_t = (tp.theta - tm.theta) * inv;
    const double flux_x = (xp.rho * xp.u1 - xm.rho * xm.u1) * inv;
    const double u_x = (xp.u1 - xm.u1) * inv;
    const double th_x = (xp.theta - xm.theta) * inv;
    const double p_x = (pressure(g, xp.rho, xp.theta) - pressure(g, xm.rho, xm.theta)) * inv;

    PlanarResidual r;
    r.continuity = rho_t + flux_x;
    r.momentum[0] = c.rho * (u_t + c.u1 * u_x) + p_x;
    r.energy = g.cv() * c.rho * (th_t + c.u1 * th_x) + pressure(g, c.rho, c.theta) * u_x;
    return r;
}

WaveSample exact_rarefaction(const WaveSpec& spec, double xi) { return RarefactionWave(spec).exact(xi); }
WaveSample cutoff_rarefaction(const WaveSpec& spec, double xi) { return RarefactionWave(spec).cutoff(xi); }
double burgers_smooth(const WaveSpec& spec, double t, double x1) { return RarefactionWave(spec).burgers(t, x1).w; }
ProfilePoint smooth_profile(const WaveSpec& spec, double t, double x1) {
    return RarefactionWave(spec).profile(t, x1);
}
PlanarResidual planar_wave_residual(const WaveSpec& spec, double t, double x1, double h) {
    return RarefactionWave(spec).planar_residual(t, x1, h);
}

}  // namespace rarelab
