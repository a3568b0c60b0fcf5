#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "rarelab/analysis.hpp"
#include "rarelab/euler_waves.hpp"
#include "rarelab/fields.hpp"
#include "rarelab/ns_solver.hpp"
#include "rarelab/rates.hpp"

namespace rarelab {

struct ExperimentConfig {
    // [gas]
    double gamma = 5.0 / 3.0;
    double alpha = 0.5;
    double mu1 = 1.0;
    double lambda1 = 1.0;
    double kappa1 = 1.0;
    bool normalized = true;
    double R = 2.0 / 3.0;
    double A = 2.0 / 3.0;
    // [wave]
    double rho_plus = 1.0;
    double u_plus = 0.0;
    double theta_plus = 1.0;
    double nu = 0.05;
    double delta = 0.1;
    double nu_coef = 0.0;  // > 0: nu = nu_coef * eps^nu_power
    double nu_power = 1.0;
    double delta_coef = 0.0;  // > 0: delta = delta_coef * eps^delta_power
    double delta_power = 1.0;
    bool shifted = true;
    double time_shift = 1.0;
    // [grid]
    int dims = 1;
    int n1 = 512;
    int n2 = 1;
    int n3 = 1;
    double period = 0.5;
    double L = 0.0;  // 0: derived from the fan extent over the horizon
    double margin = 0.5;
    // [solver]
    double eps = 0.02;
    double cfl = 0.4;
    double visc_safety = 0.4;
    std::string convective = "rusanov-muscl";
    bool viscous = true;
    double floor_rho = 1e-10;
    double floor_theta = 1e-10;
    std::string boundary = "pinned-profile";
    std::string framing = "physical";
    double fixed_dt = 0.0;
    // [experiment]
    std::string kind = "simulate";
    std::vector<double> sweep;
    std::vector<double> times{0.0, 1.0, 2.0, 4.0, 8.0};
    std::vector<double> deltas{0.2, 0.1, 0.05, 0.025, 0.0125};
    std::vector<double> lambdas{1.0, 0.5, 0.25};
    double horizon = 1.0;
    double h = 0.25;
    double eta = 0.0;
    double b = 0.0;  // > 0: transverse period eps^b
    std::uint64_t seed = 42;
    int mode_cap = 1;
    int normal_mode_cap = -1;
    int samples = 21;
    int xi_points = 200001;
    int gn_samples = 50;
    double t_distance = 2.0;
    double band_factor = 2.0;
    double exponent_tol = 0.15;
    double target_exponent = 1.0;
    double r2_min = 0.95;
    double rate_tol = 0.2;
    double gn_band = 3.0;
    double fit_from = 1.0 / 3.0;
    double refine_tol = 0.25;
    bool refine_check = true;
    bool control_run = true;
    bool use_ansatz = true;
    bool paper_scaling = false;
    int jobs = 1;
    // [output]
    std::string dir = "out";
    std::string prefix;
    bool snapshots = false;

    bool operator==(const ExperimentConfig&) const = default;
};

// "section.key" -> value pairs applied on top of the file before validation.
using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

ExperimentConfig parse_config(const std::string& path, const ConfigOverrides& overrides = {});
ExperimentConfig parse_config_text(const std::string& text, const ConfigOverrides& overrides = {});
std::string emit_config_text(const ExperimentConfig& cfg);
void emit_config(const ExperimentConfig& cfg, const std::string& path);
// Cross-field constraints; throws ConfigError naming the key.
void validate(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);
nlohmann::json config_json(const ExperimentConfig& cfg);

GasParams gas_params(const ExperimentConfig& cfg);
// nu and delta resolved for the given eps (experiment.paper_scaling, eps link, or fixed values).
WaveSpec wave_spec(const ExperimentConfig& cfg, double eps);
SolverConfig solver_config(const ExperimentConfig& cfg, double eps);
double transverse_period(const ExperimentConfig& cfg, double eps);
SlabGrid slab_grid(const ExperimentConfig& cfg, const RarefactionWave& wave, double eps, int n1_override = 0,
                   int n2_override = 0);

struct Verdict {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct StudyReport {
    std::string kind;
    std::vector<std::string> columns;  // numeric columns; status and wall time are appended on output
    std::vector<std::vector<double>> rows;
    std::vector<std::string> status;
    std::vector<double> wall;
    std::vector<Verdict> verdicts;
    std::vector<std::pair<std::string, std::string>> meta;
    std::string config_hash;
    std::string commit;
    std::uint64_t seed = 0;
    nlohmann::json config;

    void add_row(std::vector<double> row, double wall_s, std::string st = "ok");
    void add_meta(const std::string& k, double v);
    void add_meta(const std::string& k, const std::string& v);
    bool all_pass() const;
    double column(std::size_t row, const std::string& name) const;
};

// CSV at `path` plus a JSON sidecar at path + ".json".
void emit_report(const StudyReport& report, const std::string& path);
std::string report_csv(const StudyReport& report);

StudyReport run_cutoff_study(const ExperimentConfig& cfg);
StudyReport run_profile_study(const ExperimentConfig& cfg);
StudyReport run_viscosity_sweep(const ExperimentConfig& cfg);
StudyReport run_nonzero_decay(const ExperimentConfig& cfg);
StudyReport run_background_decay(const ExperimentConfig& cfg);
StudyReport run_gn_study(const ExperimentConfig& cfg);
// Single run with snapshots under cfg.dir and an observer table as the report.
StudyReport run_simulation(const ExperimentConfig& cfg);
// Exact, cut-off and smooth profiles sampled on the grid at t = horizon.
StudyReport run_wave_table(const ExperimentConfig& cfg);
StudyReport run_experiment(const ExperimentConfig& cfg);

// Runs tasks[i] for all i on at most `jobs` threads; returns when all are done.
void run_pool(int jobs, std::size_t count, const std::function<void(std::size_t)>& task);

std::string build_commit();

// Profile-law quadrature: ||d1 u1||_{L^p(R)} of the smooth profile at time t (p <= 0: sup),
// integrated in the characteristic foot variable.
double profile_gradient_norm(const RarefactionWave& wave, double t, double p);
// Sup over a dense xi grid of the componentwise distance between cut-off and exact wave.
Distance cutoff_distance(const RarefactionWave& wave, int xi_points);
// Sup over x1 of the (rho, m, n) distance between the smooth profile and the cut-off wave at t.
Distance smooth_cutoff_distance(const RarefactionWave& wave, double t, int points);

// Band-limited test functions for the G-N sweep.
ScalarField gn_sample(const SlabGrid& grid, std::uint64_t seed, bool torus);

}  // namespace rarelab
