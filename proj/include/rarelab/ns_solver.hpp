#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "rarelab/errors.hpp"
#include "rarelab/euler_waves.hpp"
#include "rarelab/fields.hpp"

namespace rarelab {

enum class ConvectiveScheme { none, rusanov, rusanov_muscl };
enum class BoundaryMode { pinned_profile, fully_periodic };
// physical: viscous multiplier eps, coordinates (t, x).
// scaled: multiplier 1, coordinates (tau, y) = (t, x)/eps; pinned ghosts read the profile at (eps tau, eps y).
enum class Framing { physical, scaled };

struct SolverConfig {
    double eps = 0.02;
    double cfl = 0.4;
    double visc_safety = 0.4;
    ConvectiveScheme convective = ConvectiveScheme::rusanov_muscl;
    bool viscous = true;
    double floor_rho = 1e-10;
    double floor_theta = 1e-10;
    BoundaryMode boundary = BoundaryMode::pinned_profile;
    Framing framing = Framing::physical;
    double fixed_dt = 0.0;  // > 0 disables the adaptive step
    double min_dt = 1e-12;

    double viscous_multiplier() const { return framing == Framing::physical ? eps : 1.0; }
    void validate() const;
    bool operator==(const SolverConfig&) const = default;
};

struct StepDiagnostics {
    long step = 0;
    double time = 0.0;
    double dt = 0.0;
    double max_speed = 0.0;
    double min_rho = 0.0;
    double min_theta = 0.0;
    std::array<double, 5> totals{};         // integrals of rho, m1, m2, m3, E
    std::array<double, 5> boundary_flux{};  // net inflow through x1 faces during this step
    std::array<double, 5> source{};         // forcing integral during this step
};

class RunFailure : public NumericalError {
public:
    RunFailure(const std::string& what, const StepDiagnostics& d) : NumericalError(what), diagnostics(d) {}
    StepDiagnostics diagnostics;
};

// Extra source term S(t, x1, x2, x3) added to the tendency of (rho, m1, m2, m3, E).
using Forcing = std::function<void(double t, double x1, double x2, double x3, double* out)>;

struct RunOptions {
    std::vector<double> sample_times;  // absolute times; the step is clipped to land on them
    std::function<void(const FieldSet&, const StepDiagnostics&)> on_sample;
    std::function<void(const FieldSet&, const StepDiagnostics&)> on_step;
    long max_steps = 50'000'000;
};

struct RunResult {
    FieldSet final;
    long steps = 0;
    StepDiagnostics last;
    std::array<double, 5> boundary_flux_total{};
};

class NavierStokesSolver {
public:
    // `wave` supplies the pinned ghost values and must outlive the solver; it may be null
    // for fully periodic runs.
    NavierStokesSolver(const GasParams& g, const SolverConfig& cfg, const SlabGrid& grid,
                       const RarefactionWave* wave = nullptr);

    void set_forcing(Forcing f) { forcing_ = std::move(f); }
    const SolverConfig& config() const { return cfg_; }
    const GasParams& gas() const { return gas_; }

    // Semi-discrete tendency; `boundary_rate` receives the net x1-boundary inflow rate.
    FieldSet rhs(const FieldSet& f, std::array<double, 5>* boundary_rate = nullptr);
    double stable_dt(const FieldSet& f);
    StepDiagnostics step(FieldSet& f, double dt_cap = 0.0);
    RunResult run(const FieldSet& initial, double horizon, const RunOptions& opts = {});

    StepDiagnostics diagnose(const FieldSet& f) const;

private:
    void load_primitives(const std::array<std::vector<double>, 5>& q, double t);
    void fill_ghosts(double t);
    void compute_tendency(double t, std::vector<double>* out, std::array<double, 5>& brate);
    void face_flux(std::size_t a, std::size_t b, std::ptrdiff_t sd, int d, double* flux) const;
    std::size_t pid(int i, int j, int k) const {
        return static_cast<std::size_t>(i + ng_) +
               static_cast<std::size_t>(p1_) * (static_cast<std::size_t>(j + o2_) + static_cast<std::size_t>(p2_) * (k + o3_));
    }

    GasParams gas_;
    SolverConfig cfg_;
    SlabGrid grid_;
    const RarefactionWave* wave_;
    Forcing forcing_;

    int ng_ = 2, o2_ = 0, o3_ = 0, p1_ = 0, p2_ = 0, p3_ = 0;
    std::ptrdiff_t stride_[3] = {1, 0, 0};
    double h_[3] = {1.0, 1.0, 1.0};
    bool active_[3] = {false, false, false};
    // padded primitive arrays: rho, u1, u2, u3, theta, p
    std::array<std::vector<double>, 6> w_;
    std::array<std::vector<double>, 5> tend_;
    std::array<std::vector<double>, 5> stage_[2];
    std::array<std::vector<double>, 5> acc_;
};

FieldSet rhs(const FieldSet& f, const GasParams& g, const SolverConfig& cfg, const RarefactionWave* wave = nullptr);
StepDiagnostics step(FieldSet& f, const GasParams& g, const SolverConfig& cfg, const RarefactionWave* wave = nullptr);
RunResult run(const FieldSet& initial, const GasParams& g, const SolverConfig& cfg, double horizon,
              const RunOptions& opts = {}, const RarefactionWave* wave = nullptr);

std::string to_string(ConvectiveScheme s);
ConvectiveScheme parse_convective(const std::string& s);
std::string to_string(BoundaryMode b);
BoundaryMode parse_boundary(const std::string& s);
std::string to_string(Framing f);
Framing parse_framing(const std::string& s);

}  // namespace rarelab
