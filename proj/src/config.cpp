#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rarelab/errors.hpp"
#include "rarelab/experiments.hpp"

namespace rarelab {

namespace {

using Cfg = ExperimentConfig;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
        throw ConfigError(key + ": expected a finite number, got '" + raw + "'");
    return v;
}

long long to_integer(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || errno == ERANGE) throw ConfigError(key + ": expected an integer, got '" + raw + "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "off" || s == "no" || s == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + raw + "'");
}

struct Key {
    std::string section, name;
    std::function<void(Cfg&, const std::string&, const std::string&)> set;
    std::function<std::string(const Cfg&)> get;
    bool hashed = true;
};

template <class T>
Key bind(const char* section, const char* name, T Cfg::*member) {
    Key k{section, name, {}, {}};
    if constexpr (std::is_same_v<T, double>) {
        k.set = [member](Cfg& c, const std::string& key, const std::string& v) { c.*member = to_double(key, v); };
        k.get = [member](const Cfg& c) { return fmt(c.*member); };
    } else if constexpr (std::is_same_v<T, bool>) {
        k.set = [member](Cfg& c, const std::string& key, const std::string& v) { c.*member = to_bool(key, v); };
        k.get = [member](const Cfg& c) { return std::string(c.*member ? "true" : "false"); };
    } else if constexpr (std::is_same_v<T, int>) {
        k.set = [member](Cfg& c, const std::string& key, const std::string& v) {
            const long long x = to_integer(key, v);
            if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(key + ": integer out of range");
            c.*member = static_cast<int>(x);
        };
        k.get = [member](const Cfg& c) { return std::to_string(c.*member); };
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        k.set = [member](Cfg& c, const std::string& key, const std::string& v) {
            const std::string s = trim(v);
            char* end = nullptr;
            errno = 0;
            const unsigned long long x = std::strtoull(s.c_str(), &end, 10);
            if (s.empty() || s[0] == '-' || *end != '\0' || errno == ERANGE)
                throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
            c.*member = x;
        };
        k.get = [member](const Cfg& c) { return std::to_string(c.*member); };
    } else if constexpr (std::is_same_v<T, std::string>) {
        k.set = [member](Cfg& c, const std::string&, const std::string& v) { c.*member = trim(v); };
        k.get = [member](const Cfg& c) { return c.*member; };
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        k.set = [member](Cfg& c, const std::string& key, const std::string& v) {
            std::vector<double> out;
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!trim(item).empty()) out.push_back(to_double(key, item));
            c.*member = out;
        };
        k.get = [member](const Cfg& c) {
            std::string s;
            for (std::size_t i = 0; i < (c.*member).size(); ++i) s += (i ? ", " : "") + fmt((c.*member)[i]);
            return s;
        };
    }
    return k;
}

const std::vector<std::string>& sections() {
    static const std::vector<std::string> s{"gas", "wave", "grid", "solver", "experiment", "output"};
    return s;
}

const std::vector<Key>& registry() {
    static const std::vector<Key> keys = [] {
        std::vector<Key> k{
            bind("gas", "gamma", &Cfg::gamma),
            bind("gas", "alpha", &Cfg::alpha),
            bind("gas", "mu1", &Cfg::mu1),
            bind("gas", "lambda1", &Cfg::lambda1),
            bind("gas", "kappa1", &Cfg::kappa1),
            bind("gas", "normalized", &Cfg::normalized),
            bind("gas", "R", &Cfg::R),
            bind("gas", "A", &Cfg::A),
            bind("wave", "rho_plus", &Cfg::rho_plus),
            bind("wave", "u_plus", &Cfg::u_plus),
            bind("wave", "theta_plus", &Cfg::theta_plus),
            bind("wave", "nu", &Cfg::nu),
            bind("wave", "delta", &Cfg::delta),
            bind("wave", "nu_coef", &Cfg::nu_coef),
            bind("wave", "nu_power", &Cfg::nu_power),
            bind("wave", "delta_coef", &Cfg::delta_coef),
            bind("wave", "delta_power", &Cfg::delta_power),
            bind("wave", "shifted", &Cfg::shifted),
            bind("wave", "time_shift", &Cfg::time_shift),
            bind("grid", "dims", &Cfg::dims),
            bind("grid", "n1", &Cfg::n1),
            bind("grid", "n2", &Cfg::n2),
            bind("grid", "n3", &Cfg::n3),
            bind("grid", "period", &Cfg::period),
            bind("grid", "L", &Cfg::L),
            bind("grid", "margin", &Cfg::margin),
            bind("solver", "eps", &Cfg::eps),
            bind("solver", "cfl", &Cfg::cfl),
            bind("solver", "visc_safety", &Cfg::visc_safety),
            bind("solver", "convective", &Cfg::convective),
            bind("solver", "viscous", &Cfg::viscous),
            bind("solver", "floor_rho", &Cfg::floor_rho),
            bind("solver", "floor_theta", &Cfg::floor_theta),
            bind("solver", "boundary", &Cfg::boundary),
            bind("solver", "framing", &Cfg::framing),
            bind("solver", "fixed_dt", &Cfg::fixed_dt),
            bind("experiment", "kind", &Cfg::kind),
            bind("experiment", "sweep", &Cfg::sweep),
            bind("experiment", "times", &Cfg::times),
            bind("experiment", "deltas", &Cfg::deltas),
            bind("experiment", "lambdas", &Cfg::lambdas),
            bind("experiment", "horizon", &Cfg::horizon),
            bind("experiment", "h", &Cfg::h),
            bind("experiment", "eta", &Cfg::eta),
            bind("experiment", "b", &Cfg::b),
            bind("experiment", "seed", &Cfg::seed),
            bind("experiment", "mode_cap", &Cfg::mode_cap),
            bind("experiment", "normal_mode_cap", &Cfg::normal_mode_cap),
            bind("experiment", "samples", &Cfg::samples),
            bind("experiment", "xi_points", &Cfg::xi_points),
            bind("experiment", "gn_samples", &Cfg::gn_samples),
            bind("experiment", "t_distance", &Cfg::t_distance),
            bind("experiment", "band_factor", &Cfg::band_factor),
            bind("experiment", "exponent_tol", &Cfg::exponent_tol),
            bind("experiment", "target_exponent", &Cfg::target_exponent),
            bind("experiment", "r2_min", &Cfg::r2_min),
            bind("experiment", "rate_tol", &Cfg::rate_tol),
            bind("experiment", "gn_band", &Cfg::gn_band),
            bind("experiment", "fit_from", &Cfg::fit_from),
            bind("experiment", "refine_tol", &Cfg::refine_tol),
            bind("experiment", "refine_check", &Cfg::refine_check),
            bind("experiment", "control_run", &Cfg::control_run),
            bind("experiment", "use_ansatz", &Cfg::use_ansatz),
            bind("experiment", "paper_scaling", &Cfg::paper_scaling),
            bind("experiment", "jobs", &Cfg::jobs),
            bind("output", "dir", &Cfg::dir),
            bind("output", "prefix", &Cfg::prefix),
            bind("output", "snapshots", &Cfg::snapshots),
        };
        // Execution and output settings do not change results.
        for (auto& key : k)
            if (key.section == "output" || key.name == "jobs") key.hashed = false;
        return k;
    }();
    return keys;
}

const Key* find_key(const std::string& section, const std::string& name) {
    for (const auto& k : registry())
        if (k.section == section && k.name == name) return &k;
    return nullptr;
}

const std::set<std::string>& known_kinds() {
    static const std::set<std::string> k{"simulate",   "wave",  "cutoff-study", "profile-study",
                                         "eps-sweep", "decay", "background",   "gn-check"};
    return k;
}

bool derived_wave_key(const std::string& section, const std::string& name) {
    return section == "wave" && (name == "nu" || name == "delta" || name == "nu_coef" || name == "delta_coef" ||
                                 name == "nu_power" || name == "delta_power");
}

ExperimentConfig from_tree(const boost::property_tree::ptree& tree, std::set<std::string> present,
                           const ConfigOverrides& overrides) {
    ExperimentConfig cfg;
    std::set<std::string> explicit_keys;
    for (const auto& [sec, body] : tree) {
        if (std::find(sections().begin(), sections().end(), sec) == sections().end())
            throw ConfigError("unknown section [" + sec + "]");
        if (!body.data().empty() && body.empty()) throw ConfigError("key '" + sec + "' outside of any section");
        present.insert(sec);
        for (const auto& [name, val] : body) {
            const Key* k = find_key(sec, name);
            if (!k) throw ConfigError("unknown key '" + sec + "." + name + "'");
            k->set(cfg, sec + "." + name, val.data());
            explicit_keys.insert(sec + "." + name);
        }
    }
    for (const auto& s : sections())
        if (!present.count(s)) throw ConfigError("missing section [" + s + "]");
    for (const auto& [full, val] : overrides) {
        const auto dot = full.find('.');
        const Key* k = dot == std::string::npos ? nullptr : find_key(full.substr(0, dot), full.substr(dot + 1));
        if (!k) throw ConfigError("unknown key '" + full + "'");
        k->set(cfg, full, val);
        explicit_keys.insert(full);
    }
    if (cfg.paper_scaling)
        for (const auto& key : explicit_keys) {
            const auto dot = key.find('.');
            if (derived_wave_key(key.substr(0, dot), key.substr(dot + 1)))
                throw ConfigError(key + ": cannot be set while experiment.paper_scaling is on (nu and delta follow eps)");
        }
    validate(cfg);
    return cfg;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<double> eps_values(const ExperimentConfig& cfg) {
    if (cfg.kind == "eps-sweep") return cfg.sweep.empty() ? std::vector<double>{0.04, 0.02, 0.01} : cfg.sweep;
    return {cfg.eps};
}

double resolve(double fixed, double coef, double power, double eps) { return coef > 0.0 ? coef * std::pow(eps, power) : fixed; }

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const ConfigOverrides& overrides) {
    // read_ini drops sections without keys, so headers are collected separately
    std::set<std::string> headers;
    {
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            const std::string l = trim(line);
            if (l.size() > 2 && l.front() == '[' && l.back() == ']') headers.insert(trim(l.substr(1, l.size() - 2)));
        }
    }
    for (const auto& h : headers)
        if (std::find(sections().begin(), sections().end(), h) == sections().end())
            throw ConfigError("unknown section [" + h + "]");
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    return from_tree(tree, headers, overrides);
}

ExperimentConfig parse_config(const std::string& path, const ConfigOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), overrides);
}

std::string emit_config_text(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& sec : sections()) {
        out += "[" + sec + "]\n";
        for (const auto& k : registry()) {
            if (k.section != sec) continue;
            if (cfg.paper_scaling && derived_wave_key(k.section, k.name)) continue;
            out += k.name + " = " + k.get(cfg) + "\n";
        }
        out += "\n";
    }
    return out;
}

void emit_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("config: cannot write '" + path + "'");
    out << emit_config_text(cfg);
}

std::string config_hash(const ExperimentConfig& cfg) {
    std::string canon;
    for (const auto& k : registry())
        if (k.hashed) canon += k.section + "." + k.name + "=" + k.get(cfg) + "\n";
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canon)));
    return buf;
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& k : registry()) j[k.section][k.name] = k.get(cfg);
    return j;
}

GasParams gas_params(const ExperimentConfig& cfg) {
    if (cfg.normalized) return GasParams::normalized(cfg.gamma, cfg.alpha, cfg.mu1, cfg.lambda1, cfg.kappa1);
    GasParams g{cfg.gamma, cfg.R, cfg.A, cfg.alpha, cfg.mu1, cfg.lambda1, cfg.kappa1};
    return g;
}

WaveSpec wave_spec(const ExperimentConfig& cfg, double eps) {
    WaveSpec w;
    w.gas = gas_params(cfg);
    w.right = PrimState{cfg.rho_plus, cfg.u_plus, cfg.theta_plus};
    if (cfg.paper_scaling) {
        const auto ex = scaling_exponents(cfg.gamma, cfg.alpha);
        w.nu = std::pow(eps, ex.Z * ex.a) * std::fabs(std::log(eps));
        w.delta = std::pow(eps, ex.a);
    } else {
        w.nu = resolve(cfg.nu, cfg.nu_coef, cfg.nu_power, eps);
        w.delta = resolve(cfg.delta, cfg.delta_coef, cfg.delta_power, eps);
    }
    w.shifted = cfg.shifted;
    w.time_shift = cfg.time_shift;
    return w;
}

SolverConfig solver_config(const ExperimentConfig& cfg, double eps) {
    SolverConfig s;
    s.eps = eps;
    s.cfl = cfg.cfl;
    s.visc_safety = cfg.visc_safety;
    s.convective = parse_convective(cfg.convective);
    s.viscous = cfg.viscous;
    s.floor_rho = cfg.floor_rho;
    s.floor_theta = cfg.floor_theta;
    s.boundary = parse_boundary(cfg.boundary);
    s.framing = parse_framing(cfg.framing);
    s.fixed_dt = cfg.fixed_dt;
    return s;
}

double transverse_period(const ExperimentConfig& cfg, double eps) { return cfg.b > 0.0 ? std::pow(eps, cfg.b) : cfg.period; }

SlabGrid slab_grid(const ExperimentConfig& cfg, const RarefactionWave& wave, double eps, int n1_override,
                   int n2_override) {
    SlabGrid g;
    g.dims = cfg.dims;
    g.n1 = n1_override > 0 ? n1_override : cfg.n1;
    g.n2 = cfg.dims >= 2 ? (n2_override > 0 ? n2_override : cfg.n2) : 1;
    g.n3 = cfg.dims >= 3 ? (n2_override > 0 ? n2_override : cfg.n3) : 1;
    g.period = transverse_period(cfg, eps);
    g.L = cfg.L > 0.0 ? cfg.L : SlabGrid::required_half_length(wave, cfg.horizon, cfg.margin);
    g.validate();
    if (cfg.L > 0.0) g.validate_fits(wave, cfg.horizon, 0.0);
    return g;
}

void validate(const ExperimentConfig& cfg) {
    auto need = [](bool ok, const std::string& key, const std::string& what) {
        if (!ok) throw ConfigError(key + ": " + what);
    };
    gas_params(cfg).validate();
    need(known_kinds().count(cfg.kind) > 0, "experiment.kind", "unknown kind '" + cfg.kind + "'");
    need(cfg.rho_plus > 0.0 && cfg.theta_plus > 0.0, "wave.rho_plus", "right state must have positive density and temperature");
    need(cfg.time_shift >= 0.0, "wave.time_shift", "must be >= 0");
    need(cfg.dims >= 1 && cfg.dims <= 3, "grid.dims", "must be 1, 2 or 3");
    need(cfg.n1 >= 8, "grid.n1", "must be >= 8");
    need(cfg.period > 0.0, "grid.period", "must be > 0");
    auto pow2 = [](int n) { return n >= 4 && (n & (n - 1)) == 0; };
    need(cfg.dims < 2 || pow2(cfg.n2), "grid.n2", "must be a power of two >= 4");
    need(cfg.dims < 3 || pow2(cfg.n3), "grid.n3", "must be a power of two >= 4");
    need(cfg.L >= 0.0, "grid.L", "must be >= 0 (0 derives it from the horizon)");
    need(cfg.margin >= 0.0, "grid.margin", "must be >= 0");
    need(cfg.eps > 0.0, "solver.eps", "must be > 0");
    try {
        solver_config(cfg, cfg.eps).validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("solver: ") + e.what());
    }
    need(cfg.framing == "physical", "solver.framing", "experiment drivers run in the physical framing");
    need(cfg.horizon > 0.0, "experiment.horizon", "must be > 0");
    need(cfg.h >= 0.0 && cfg.h <= cfg.horizon, "experiment.h", "must lie in [0, horizon]");
    need(cfg.eta >= 0.0, "experiment.eta", "must be >= 0");
    need(cfg.b >= 0.0, "experiment.b", "must be >= 0");
    need(cfg.mode_cap >= 0, "experiment.mode_cap", "must be >= 0");
    need(cfg.samples >= 2, "experiment.samples", "must be >= 2");
    need(cfg.xi_points >= 101, "experiment.xi_points", "must be >= 101");
    need(cfg.gn_samples >= 1, "experiment.gn_samples", "must be >= 1");
    need(cfg.t_distance > 0.0, "experiment.t_distance", "must be > 0");
    need(cfg.band_factor >= 1.0, "experiment.band_factor", "must be >= 1");
    need(cfg.gn_band >= 1.0, "experiment.gn_band", "must be >= 1");
    need(cfg.exponent_tol > 0.0, "experiment.exponent_tol", "must be > 0");
    need(cfg.r2_min > 0.0 && cfg.r2_min <= 1.0, "experiment.r2_min", "must lie in (0, 1]");
    need(cfg.rate_tol > 0.0, "experiment.rate_tol", "must be > 0");
    need(cfg.fit_from >= 0.0 && cfg.fit_from < 1.0, "experiment.fit_from", "must lie in [0, 1)");
    need(cfg.refine_tol > 0.0, "experiment.refine_tol", "must be > 0");
    need(cfg.jobs >= 1, "experiment.jobs", "must be >= 1");
    for (double t : cfg.times) need(t >= 0.0, "experiment.times", "entries must be >= 0");
    for (double d : cfg.deltas) need(d > 0.0, "experiment.deltas", "entries must be > 0");
    for (double l : cfg.lambdas) need(l > 0.0, "experiment.lambdas", "entries must be > 0");
    if (cfg.kind == "eps-sweep")
        for (double e : cfg.sweep) need(e > 0.0, "experiment.sweep", "eps values must be > 0");
    if (cfg.kind == "cutoff-study") {
        int positive = 0;
        for (double v : cfg.sweep) {
            need(v >= 0.0 && v < cfg.rho_plus, "experiment.sweep", "nu values must lie in [0, rho_plus)");
            positive += v > 0.0;
        }
        need(cfg.sweep.empty() || positive >= 4, "experiment.sweep", "needs at least four positive nu values");
    }
    if (cfg.kind == "background")
        for (double v : cfg.sweep) need(v >= 0.0, "experiment.sweep", "eta values must be >= 0");
    if (cfg.kind == "decay") need(cfg.dims >= 2, "grid.dims", "non-zero-mode decay needs a transverse direction");

    for (double eps : eps_values(cfg)) {
        const auto w = wave_spec(cfg, eps);
        const std::string key = cfg.paper_scaling ? "experiment.paper_scaling" : "wave.nu";
        const std::string at = " at eps = " + fmt(eps);
        need(std::isfinite(w.nu) && w.nu >= 0.0, key, "nu must be >= 0" + at);
        need(w.nu < cfg.rho_plus, key,
             "nu = " + fmt(w.nu) + " >= rho_plus = " + fmt(cfg.rho_plus) + at +
                 (cfg.paper_scaling ? "; derived eps scaling is asymptotic, use an explicit nu for desk-scale runs" : ""));
        need(std::isfinite(w.delta) && w.delta > 0.0, cfg.paper_scaling ? key : "wave.delta", "delta must be > 0" + at);
    }
}

}  // namespace rarelab
