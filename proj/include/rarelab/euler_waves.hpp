#pragma once

#include "rarelab/gas_model.hpp"

namespace rarelab {

struct WaveSpec {
    GasParams gas;
    PrimState right{1.0, 0.0, 1.0};
    double nu = 0.0;      // cut-off density; 0 selects the exact vacuum wave
    double delta = 0.1;   // tanh smoothing width of the Burgers data
    bool shifted = true;  // evaluate the Burgers solution at t + time_shift
    double time_shift = 1.0;

    bool operator==(const WaveSpec&) const = default;
};

enum class Branch { left, fan, right };

struct WaveSample {
    PrimState state;
    double m = 0.0;  // rho u1
    double n = 0.0;  // rho theta
    Branch branch = Branch::right;
};

struct RiemannInvariants {
    double r31 = 0.0;
    double entropy = 0.0;
    bool entropy_defined = false;
};

struct BurgersPoint {
    double w = 0.0;
    double x0 = 0.0;  // characteristic foot
    double w_x = 0.0;
    double w_xx = 0.0;
};

// Smooth planar wave at one point. Time derivatives follow from d_t f = -w d_x f.
struct ProfilePoint {
    double rho = 0.0, u1 = 0.0, theta = 0.0;
    double d_rho = 0.0, d_u1 = 0.0, d_theta = 0.0;
    double dd_rho = 0.0, dd_u1 = 0.0, dd_theta = 0.0;
    double w = 0.0;
};

struct PlanarResidual {
    double continuity = 0.0;
    double momentum[3] = {0.0, 0.0, 0.0};
    double energy = 0.0;
};

RiemannInvariants riemann_invariants(const GasParams& g, const PrimState& s);

class RarefactionWave {
public:
    explicit RarefactionWave(const WaveSpec& spec);

    const WaveSpec& spec() const { return spec_; }
    const GasParams& gas() const { return spec_.gas; }
    double r31() const { return r31_; }
    double entropy() const { return entropy_; }
    // Velocity at the vacuum edge of the exact wave.
    double u1_minus() const { return r31_; }
    double lambda3_plus() const { return lambda3_plus_; }
    PrimState right() const { return spec_.right; }
    // Constant left state of the cut-off wave; requires nu > 0.
    PrimState cutoff_left() const;
    double w_minus() const { return w_minus_; }
    double w_plus() const { return w_plus_; }

    // Point on the rarefaction curve through the right state with lambda3 = xi.
    PrimState fan_state(double xi) const;
    WaveSample exact(double xi) const;
    WaveSample cutoff(double xi) const;
    BurgersPoint burgers(double t, double x1) const;
    // Applies the configured time shift before solving the Burgers problem.
    ProfilePoint profile(double t, double x1) const;
    PlanarResidual planar_residual(double t, double x1, double h) const;

    double burgers_data(double x) const;

private:
    WaveSpec spec_;
    double r31_ = 0.0;
    double entropy_ = 0.0;
    double lambda3_plus_ = 0.0;
    double u1_nu_ = 0.0;
    double theta_nu_ = 0.0;
    double w_minus_ = 0.0;
    double w_plus_ = 0.0;
};

WaveSample exact_rarefaction(const WaveSpec& spec, double xi);
WaveSample cutoff_rarefaction(const WaveSpec& spec, double xi);
double burgers_smooth(const WaveSpec& spec, double t, double x1);
ProfilePoint smooth_profile(const WaveSpec& spec, double t, double x1);
PlanarResidual planar_wave_residual(const WaveSpec& spec, double t, double x1, double h);

WaveSample make_sample(const PrimState& s, Branch b);

}  // namespace rarelab
