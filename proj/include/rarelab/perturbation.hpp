#pragma once

#include <cstdint>

#include "rarelab/euler_waves.hpp"
#include "rarelab/fields.hpp"

namespace rarelab {

struct PerturbationSpec {
    double eta = 0.0;
    int mode_cap = 2;          // transverse wavenumber cap
    int normal_mode_cap = -1;  // x1 wavenumber cap; negative means mode_cap
    std::uint64_t seed = 42;

    int normal_cap() const { return normal_mode_cap < 0 ? mode_cap : normal_mode_cap; }
    bool operator==(const PerturbationSpec&) const = default;
};

// Norm used to scale the perturbation: the mean-square H^2 norm on the period cell rescaled
// to unit side, summed over the five components, evaluated from the Fourier coefficients.
//   ||f||^2 = sum_k (1 + |2 pi k|^2 + |2 pi k|^4) (a_k^2 + b_k^2) / 2
// Returns (V, W1, W2, W3, Z) in the FieldSet component slots. Periodic with `period` in
// every direction, including x1.
FieldSet make_perturbation(const PerturbationSpec& spec, const SlabGrid& grid);

// Smooth-wave conserved fields at time t plus the perturbation (which may be empty).
FieldSet assemble_initial(const RarefactionWave& wave, const FieldSet* pert, const SlabGrid& grid,
                          double t = 0.0);

}  // namespace rarelab
