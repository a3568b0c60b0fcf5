#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rarelab/euler_waves.hpp"
#include "rarelab/fields.hpp"
#include "rarelab/rates.hpp"

namespace rarelab {

struct ModeSplit {
    std::vector<double> zero;  // transverse mean, one value per x1 cell
    ScalarField nonzero;       // f minus the tiled zero mode
    bool planar = false;       // grid has no transverse direction; nonzero is identically 0
};

ModeSplit decompose(const ScalarField& f);
ScalarField tile_zero_mode(const std::vector<double>& zero, const SlabGrid& grid);
// Pairwise sum; exact for n identical values when n is a power of two.
double pairwise_sum(const double* v, std::size_t n, std::size_t stride = 1);

// L^p norm over the grid with the cell-volume measure; p <= 0 means the sup norm.
double lp_norm(const std::vector<double>& v, const SlabGrid& grid, double p);

struct ProjectionReport {
    double p = 2.0;
    double norm_f = 0.0;
    double norm_zero = 0.0;     // ||D0 f|| measured on the slab (zero mode tiled)
    double norm_nonzero = 0.0;
    bool zero_ok = false;       // ||D0 f|| <= ||f||
    bool nonzero_ok = false;    // ||D!=0 f|| <= 2 ||f||
};

ProjectionReport projection_bounds_check(const ScalarField& f, double p);

struct EnergyReport {
    double tau = 0.0;
    double basic = 0.0;
    double first_order = 0.0;
    double second_order = 0.0;
    double dissipation = 0.0;
    double relative_entropy = 0.0;
    long sandwich_violations = 0;
    double nonzero_energy = 0.0;  // weighted energy of the non-zero modes of (phi, psi, zeta)
};

inline double phi_hat(double s) { return s - std::log(s) - 1.0; }

// solution and ansatz share the grid; weights come from the smooth wave at `wave_time`.
EnergyReport energy_report(const FieldSet& solution, const FieldSet& ansatz, const RarefactionWave& wave,
                           const GasParams& g, double wave_time);

enum class GnCase { l4_slab, l6_slab, linf_slab, l4_torus, l6_torus, linf_torus };

struct GnReport {
    GnCase which = GnCase::l4_slab;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    double norm_u = 0.0, norm_grad = 0.0, norm_hess = 0.0;
};

// Lambda is the transverse period of the grid. Slab cases need dims = 3; torus cases a
// fully periodic grid.
GnReport gn_check(const ScalarField& u, GnCase which);
std::string to_string(GnCase c);
GnCase parse_gn_case(const std::string& s);
const std::vector<GnCase>& all_gn_cases();

struct Distance {
    bool included = false;
    double rho = 0.0, m = 0.0, n = 0.0;
    double max = 0.0;
    double argmax_x1 = 0.0;
    int argmax_component = 0;  // 0 rho, 1 m, 2 n
};

// Sup distance of (rho, m1, rho theta) to the exact wave at time t >= h. Grid coordinates are
// multiplied by x_scale to obtain physical x1 (eps for the scaled framing).
Distance sup_distance(const FieldSet& solution, const RarefactionWave& wave, const GasParams& g, double t, double h,
                      double x_scale = 1.0);

}  // namespace rarelab
