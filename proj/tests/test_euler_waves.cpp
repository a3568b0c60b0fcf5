#include <doctest.h>

#include <chrono>
#include <cmath>

#include "rarelab/errors.hpp"
#include "rarelab/euler_waves.hpp"

using namespace rarelab;

namespace {

WaveSpec canonical(double nu = 0.0, double delta = 0.1) {
    WaveSpec s;
    s.gas = GasParams::normalized(5.0 / 3.0);
    s.nu = nu;
    s.delta = delta;
    return s;
}

// Density on the right state's isentrope and 3-invariant curve with lambda3 = xi, by bisection.
double bisect_fan_density(const WaveSpec& s, double xi) {
    const auto& g = s.gas;
    const double S = entropy(g, s.right);
    const double r31 = s.right.u1 - 2.0 * sound_speed(g, s.right) / (g.gamma - 1.0);
    auto lam = [&](double rho) {
        const double c = sound_speed(g, temperature_on_isentrope(g, rho, S));
        return r31 + 2.0 * c / (g.gamma - 1.0) + c;
    };
    double lo = 0.0, hi = s.right.rho;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (lam(mid) < xi ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("euler_waves") {

TEST_CASE("fan states match the bisection oracle") {
    const RarefactionWave w(canonical());
    for (double xi : {-3.0, -2.0, -0.790569, 0.0, 0.5, 1.0}) {
        const double rho = bisect_fan_density(w.spec(), xi);
        CHECK(w.exact(xi).state.rho == doctest::Approx(rho).epsilon(1e-10));
    }
    const auto mid = w.exact(0.0).state;
    CHECK(mid.rho == doctest::Approx(0.421875).epsilon(1e-12));
    CHECK(mid.u1 == doctest::Approx(-0.790569).epsilon(1e-6));
    CHECK(mid.theta == doctest::Approx(0.5625).epsilon(1e-12));
}

TEST_CASE("invariants of the canonical wave") {
    const auto s = canonical();
    const RarefactionWave w(s);
    CHECK(w.r31() == doctest::Approx(-3.0 * std::sqrt(10.0 / 9.0)).epsilon(1e-14));
    CHECK(w.r31() == doctest::Approx(-3.162278).epsilon(1e-6));
    CHECK(std::fabs(w.entropy()) < 1e-14);
    const auto left = riemann_invariants(s.gas, {0.0, w.u1_minus(), 0.0});
    CHECK(std::fabs(left.r31 - riemann_invariants(s.gas, s.right).r31) < 1e-12);
    CHECK_FALSE(left.entropy_defined);

    auto shifted = s;
    shifted.right.u1 += 0.37;
    CHECK(RarefactionWave(shifted).r31() - w.r31() == doctest::Approx(0.37).epsilon(1e-14));
}

TEST_CASE("fan consistency on 1000 samples") {
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = canonical();
    const RarefactionWave w(s);
    const auto inv = riemann_invariants(s.gas, s.right);
    double worst_l = 0.0, worst_r = 0.0, worst_s = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double xi = w.u1_minus() + (w.lambda3_plus() - w.u1_minus()) * (i + 0.5) / 1000.0;
        const auto st = w.exact(xi).state;
        if (st.is_vacuum()) continue;
        worst_l = std::max(worst_l, std::fabs(lambda3_speed(s.gas, st) - xi));
        const auto ri = riemann_invariants(s.gas, st);
        worst_r = std::max(worst_r, std::fabs(ri.r31 - inv.r31));
        worst_s = std::max(worst_s, std::fabs(ri.entropy - inv.entropy));
    }
    CHECK(worst_l < 1e-10);
    CHECK(worst_r < 1e-10);
    CHECK(worst_s < 1e-10);
    CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 1.0);
}

TEST_CASE("exact wave branches and monotonicity") {
    const RarefactionWave w(canonical());
    const auto far = w.exact(-10.0);
    CHECK(far.state.rho == 0.0);
    CHECK(far.state.theta == 0.0);
    CHECK(far.state.u1 == doctest::Approx(-3.162278).epsilon(1e-6));
    CHECK(far.m == 0.0);
    CHECK(far.n == 0.0);
    CHECK(far.branch == Branch::left);
    const auto right = w.exact(2.0);
    CHECK(right.state == PrimState{1.0, 0.0, 1.0});
    CHECK(right.branch == Branch::right);
    PrimState prev = w.exact(-5.0).state;
    for (double xi = -5.0; xi <= 3.0; xi += 1e-3) {
        const auto s = w.exact(xi).state;
        CHECK(s.rho >= prev.rho);
        CHECK(s.u1 >= prev.u1 - 1e-15);
        CHECK(s.theta >= prev.theta);
        prev = s;
    }
}

TEST_CASE("cut-off wave") {
    const RarefactionWave w(canonical(0.01));
    const auto left = w.cutoff_left();
    CHECK(left.rho == 0.01);
    CHECK(left.u1 == doctest::Approx(-2.480985).epsilon(2e-7));
    CHECK(left.theta == doctest::Approx(std::pow(0.01, 2.0 / 3.0)).epsilon(1e-12));
    CHECK(left.theta == doctest::Approx(0.046416).epsilon(1e-5));
    CHECK(w.cutoff(-50.0).state == left);
    CHECK(w.w_minus() == doctest::Approx(lambda3_speed(w.gas(), left)).epsilon(1e-14));
    // continuity at the cut-off edge
    const auto a = w.cutoff(w.w_minus() - 1e-12).state, b = w.cutoff(w.w_minus() + 1e-12).state;
    CHECK(a.rho == doctest::Approx(b.rho).epsilon(1e-9));
    // nu = 0 coincides with the exact wave
    const RarefactionWave z(canonical(0.0));
    for (double xi : {-4.0, -2.0, 0.0, 0.9, 2.0}) CHECK(z.cutoff(xi).state == z.exact(xi).state);
    CHECK_THROWS_AS(z.cutoff_left(), ConfigError);
}

TEST_CASE("Burgers solution") {
    const RarefactionWave w(canonical(0.05, 0.2));
    const double mid = 0.5 * (w.w_plus() + w.w_minus());
    for (double x : {-1.0, 0.0, 0.3}) CHECK(w.burgers(0.0, x).w == w.burgers_data(x));
    CHECK(w.burgers(1.0, mid).w == doctest::Approx(mid).epsilon(1e-12));
    for (double t : {0.5, 2.0, 8.0}) {
        const double far = 40.0 * 0.2 + std::fabs(w.w_minus()) * t + 1.0;
        CHECK(std::fabs(w.burgers(t, -far).w - w.w_minus()) < 1e-10);
        CHECK(std::fabs(w.burgers(t, far + w.w_plus() * t).w - w.w_plus()) < 1e-10);
        double prev = -1e300;
        for (double x = -12.0; x < 12.0; x += 0.01) {
            const auto b = w.burgers(t, x);
            CHECK(std::fabs(b.x0 + t * b.w - x) < 1e-12);
            CHECK(b.w >= prev);
            prev = b.w;
        }
        const double h = 1e-5, x = 0.4 * t;
        const double fd1 = (w.burgers(t, x + h).w - w.burgers(t, x - h).w) / (2 * h);
        const double fd2 = (w.burgers(t, x + h).w - 2 * w.burgers(t, x).w + w.burgers(t, x - h).w) / (h * h);
        CHECK(w.burgers(t, x).w_x == doctest::Approx(fd1).epsilon(1e-7));
        CHECK(w.burgers(t, x).w_xx == doctest::Approx(fd2).epsilon(1e-3));
    }
}

TEST_CASE("steep data does not stall the characteristic solve") {
    const RarefactionWave w(canonical(0.05, 0.0125));
    for (double x = -6.0; x < 4.0; x += 0.0037) CHECK_NOTHROW(w.burgers(2.0, x));
}

TEST_CASE("smooth profile derivatives and identities") {
    auto s = canonical(0.02, 0.15);
    s.shifted = false;
    const RarefactionWave w(s);
    const auto& g = s.gas;
    const double h = 1e-5;
    for (double t : {0.0, 0.7, 3.0})
        for (double x : {-2.5 * std::max(t, 0.3), -0.4, 0.0, 0.3 * t}) {
            const auto p = w.profile(t, x);
            const auto pp = w.profile(t, x + h), pm = w.profile(t, x - h);
            CHECK(std::fabs(lambda3_speed(g, {p.rho, p.u1, p.theta}) - p.w) < 1e-10);
            CHECK(p.d_rho == doctest::Approx((pp.rho - pm.rho) / (2 * h)).epsilon(1e-7));
            CHECK(p.d_u1 == doctest::Approx((pp.u1 - pm.u1) / (2 * h)).epsilon(1e-7));
            CHECK(p.d_theta == doctest::Approx((pp.theta - pm.theta) / (2 * h)).epsilon(1e-7));
            CHECK(p.dd_u1 == doctest::Approx((pp.u1 - 2 * p.u1 + pm.u1) / (h * h)).epsilon(1e-3));
            CHECK(p.dd_theta == doctest::Approx((pp.theta - 2 * p.theta + pm.theta) / (h * h)).epsilon(1e-3));
            // temperature identity with the (gamma-1)^2/(2 R gamma) coefficient
            const double dth_du = p.d_theta / p.d_u1;
            const double rhs = (g.gamma - 1.0) * (g.gamma - 1.0) / (2.0 * g.R * g.gamma) * p.d_u1 * p.d_u1 + dth_du * p.dd_u1;
            CHECK(p.dd_theta == doctest::Approx(rhs).epsilon(1e-10));
            // first-order identities: d theta = (gamma-1) theta/c d u ... expressed through the sound speed
            const double c = sound_speed(g, p.theta);
            CHECK(p.d_theta == doctest::Approx((g.gamma - 1.0) * c / (g.gamma * g.R) * p.d_u1).epsilon(1e-10));
            CHECK(p.d_rho == doctest::Approx(p.rho / c * p.d_u1).epsilon(1e-10));
            CHECK(p.d_u1 >= 0.0);
        }
}

TEST_CASE("profile end states and time shift") {
    auto s = canonical(0.05, 0.1);
    const RarefactionWave shifted(s);
    s.shifted = false;
    const RarefactionWave plain(s);
    const auto a = shifted.profile(1.5, 0.2), b = plain.profile(2.5, 0.2);
    CHECK(a.rho == b.rho);
    CHECK(a.u1 == b.u1);
    const auto left = plain.profile(1.0, -30.0), right = plain.profile(1.0, 30.0);
    CHECK(left.rho == doctest::Approx(0.05).epsilon(1e-10));
    CHECK(left.u1 == doctest::Approx(plain.cutoff_left().u1).epsilon(1e-10));
    CHECK(right.rho == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(right.theta == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(RarefactionWave(canonical(0.0)).profile(1.0, 0.0), ConfigError);
}

TEST_CASE("planar residual converges at second order") {
    auto s = canonical(0.05, 0.3);
    s.shifted = false;
    const RarefactionWave w(s);
    auto norm = [&](double h) {
        double m = 0.0;
        for (double x = -3.0; x <= 1.5; x += 0.25) {
            const auto r = w.planar_residual(1.0, x, h);
            m = std::max({m, std::fabs(r.continuity), std::fabs(r.momentum[0]), std::fabs(r.energy)});
            CHECK(r.momentum[1] == 0.0);
            CHECK(r.momentum[2] == 0.0);
        }
        return m;
    };
    const double e1 = norm(1e-2), e2 = norm(5e-3);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 1.7);
    CHECK(order <= 2.3);
    const auto flat = w.planar_residual(1.0, 40.0, 1e-3);
    CHECK(std::fabs(flat.continuity) < 1e-12);
    CHECK(std::fabs(flat.momentum[0]) < 1e-12);
    CHECK(std::fabs(flat.energy) < 1e-12);
}

TEST_CASE("wave construction rejects bad specs") {
    auto s = canonical(1.0);
    CHECK_THROWS_AS(RarefactionWave{s}, ConfigError);
    s = canonical(0.1, 0.0);
    CHECK_THROWS_AS(RarefactionWave{s}, ConfigError);
}

}
