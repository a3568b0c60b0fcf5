#pragma once

#include <array>
#include <vector>

#include "rarelab/euler_waves.hpp"
#include "rarelab/fields.hpp"
#include "rarelab/ns_solver.hpp"
#include "rarelab/rates.hpp"

namespace rarelab {

struct BackgroundSample {
    double t = 0.0;
    double dev_inf = 0.0;                 // max over cells and components of |field - constant|
    std::array<double, 5> dev_comp_inf{};  // per component
    std::array<double, 5> dev_mean{};      // cell average of the deviation
};

struct BackgroundRun {
    PrimState state;
    std::vector<BackgroundSample> series;
    std::vector<FieldSet> snapshots;  // at the sample times, when requested
    FitResult fit;                    // exponential fit of dev_inf over the fit window
    bool fit_valid = false;
    double max_mean_drift = 0.0;  // max |dev_mean(t) - dev_mean(0)| over components and samples
    long steps = 0;
};

struct BackgroundOptions {
    std::vector<double> sample_times;
    bool keep_snapshots = false;
    double fit_from = 0.5;  // fit over samples with t >= fit_from * horizon
};

// Conserved fields of a constant state with zero transverse velocity.
std::array<double, 5> constant_conserved(const GasParams& g, const PrimState& s);

// Fully periodic run of constant state + perturbation on the perturbation's torus grid.
BackgroundRun evolve_periodic_background(const PrimState& state, const FieldSet& pert, const GasParams& g,
                                         SolverConfig cfg, double horizon, const BackgroundOptions& opts);

struct Ansatz {
    FieldSet cons;  // rho~, m~, E~
    Primitives prim;
    std::array<std::vector<double>, 3> weight;  // eta1 (density), eta2 (momentum), eta3 (energy), per x1
};

// Background deviation (field minus its constant state) tiled onto the slab grid.
FieldSet tile_deviation(const FieldSet& background, const std::array<double, 5>& constant, const SlabGrid& grid);

// minus/plus: background solutions at wave time t on their torus grids. Null means zero deviation.
Ansatz build_ansatz(const FieldSet* minus, const FieldSet* plus, const RarefactionWave& wave, const SlabGrid& grid,
                    double t);

struct AnsatzErrors {
    std::vector<double> e0;
    std::array<std::vector<double>, 3> e;
    std::vector<double> e4;
    // e1 + d1[(2 mu1 + lambda1) theta^alpha eps d1 u1] and the matching energy correction,
    // both using the smooth-wave profile.
    std::vector<double> e1_corrected;
    std::vector<double> e4_corrected;

    double norm_inf(const std::vector<double>& v) const;
};

// Conservative-form residuals of the ansatz with time derivatives by central differences
// over (prev, next) separated by 2*dt. `mult` is the viscous multiplier.
AnsatzErrors ansatz_errors(const Ansatz& prev, const Ansatz& cur, const Ansatz& next, double dt,
                           const GasParams& g, double mult, const RarefactionWave& wave, double t);

}  // namespace rarelab
