#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "rarelab/ansatz.hpp"
#include "rarelab/ns_solver.hpp"

namespace rarelab::testing {

inline const GasParams kMmsGas = GasParams::normalized(5.0 / 3.0);

inline double l2_error(const std::vector<double>& a, const std::vector<double>& b, double h) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s * h);
}

// Steady manufactured 1-D solution on the unit torus.
struct Manufactured {
    double rho(double x) const { return 1.0 + 0.2 * std::sin(2 * std::numbers::pi * x); }
    double u(double x) const { return 0.3 * std::sin(2 * std::numbers::pi * x + 1.0); }
    double theta(double x) const { return 1.0 + 0.25 * std::cos(2 * std::numbers::pi * x); }
    double u_x(double x) const { return 0.6 * std::numbers::pi * std::cos(2 * std::numbers::pi * x + 1.0); }
    double theta_x(double x) const { return -0.5 * std::numbers::pi * std::sin(2 * std::numbers::pi * x); }

    // Physical flux of (rho, m1, E); viscous part scaled by eps.
    void flux(double x, double eps, bool convective, double* f) const {
        const double r = rho(x), v = u(x), th = theta(x);
        const double p = kMmsGas.R * r * th;
        const double E = total_energy(kMmsGas, r, {v, 0.0, 0.0}, th);
        const double pw = eps * std::pow(th, kMmsGas.alpha);
        const double tau = (2.0 * kMmsGas.mu1 + kMmsGas.lambda1) * pw * u_x(x);
        f[0] = convective ? r * v : 0.0;
        f[1] = (convective ? r * v * v + p : 0.0) - tau;
        f[2] = (convective ? (E + p) * v : 0.0) - tau * v - kMmsGas.kappa1 * pw * theta_x(x);
    }

    Forcing forcing(double eps, bool convective) const {
        return [this, eps, convective](double, double x, double, double, double* out) {
            const double h = 1e-3;
            double fp2[3], fp1[3], fm1[3], fm2[3];
            flux(x + 2 * h, eps, convective, fp2);
            flux(x + h, eps, convective, fp1);
            flux(x - h, eps, convective, fm1);
            flux(x - 2 * h, eps, convective, fm2);
            double d[3];
            for (int c = 0; c < 3; ++c) d[c] = (-fp2[c] + 8 * fp1[c] - 8 * fm1[c] + fm2[c]) / (12 * h);
            out[0] = d[0];
            out[1] = d[1];
            out[2] = 0.0;
            out[3] = 0.0;
            out[4] = d[2];
        };
    }

    FieldSet fields(const SlabGrid& g) const {
        FieldSet f(g);
        for (int i = 0; i < g.n1; ++i) {
            const double x = g.x1(i);
            const auto q = constant_conserved(kMmsGas, {rho(x), u(x), theta(x)});
            for (int c = 0; c < 5; ++c) f.q[c][i] = q[c];
        }
        return f;
    }
};

// L2 error (m1, E) of a run started on the manufactured solution, at time T.
inline double mms_error(int n, ConvectiveScheme scheme, double T) {
    const Manufactured ms;
    const auto g = SlabGrid::torus(1.0, 1, 1, n);
    SolverConfig cfg;
    cfg.eps = scheme == ConvectiveScheme::none ? 1.0 : 0.05;
    cfg.boundary = BoundaryMode::fully_periodic;
    cfg.convective = scheme;
    NavierStokesSolver solver(kMmsGas, cfg, g);
    solver.set_forcing(ms.forcing(cfg.eps, scheme != ConvectiveScheme::none));
    const auto init = ms.fields(g);
    const auto out = solver.run(init, T).final;
    return l2_error(out.m(0), init.m(0), g.h1()) + l2_error(out.E(), init.E(), g.h1()) +
           l2_error(out.rho(), init.rho(), g.h1());
}

}  // namespace rarelab::testing
