#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "rarelab/errors.hpp"
#include "rarelab/experiments.hpp"

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    bool paper_scaling = false;
    std::optional<double> nu, delta, t;
    std::optional<int> grid;
};

void add_common(CLI::App* cmd, Options& o, bool wave_flags) {
    cmd->add_option("--config", o.config, "INI config with [gas] [wave] [grid] [solver] [experiment] [output]");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--seed", o.seed, "perturbation and sample seed");
    cmd->add_option("--jobs", o.jobs, "worker threads for sweep points");
    cmd->add_flag("--paper-scaling", o.paper_scaling, "derive nu and delta from eps");
    if (wave_flags) {
        cmd->add_option("--nu", o.nu, "cut-off density");
        cmd->add_option("--delta", o.delta, "smoothing width");
        cmd->add_option("--t", o.t, "time (horizon)");
        cmd->add_option("--grid", o.grid, "cells in x1");
    }
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int run(const std::string& kind, const Options& o) {
    using namespace rarelab;
    ConfigOverrides ov{{"experiment.kind", kind}};
    if (!o.out.empty()) ov.emplace_back("output.dir", o.out);
    if (o.seed) ov.emplace_back("experiment.seed", std::to_string(*o.seed));
    if (o.jobs) ov.emplace_back("experiment.jobs", std::to_string(*o.jobs));
    if (o.paper_scaling && !o.config.empty()) ov.emplace_back("experiment.paper_scaling", "true");
    if (o.nu) ov.emplace_back("wave.nu", num(*o.nu));
    if (o.delta) ov.emplace_back("wave.delta", num(*o.delta));
    if (o.t) ov.emplace_back("experiment.horizon", num(*o.t));
    if (o.grid) ov.emplace_back("grid.n1", std::to_string(*o.grid));

    ExperimentConfig cfg;
    if (o.config.empty()) {
        ExperimentConfig defaults;
        defaults.kind = kind;
        defaults.paper_scaling = o.paper_scaling;
        cfg = parse_config_text(emit_config_text(defaults), ov);
    } else {
        cfg = parse_config(o.config, ov);
    }
    const auto report = run_experiment(cfg);
    std::filesystem::create_directories(cfg.dir);
    const auto path = (std::filesystem::path(cfg.dir) / (cfg.prefix + kind + ".csv")).string();
    emit_report(report, path);
    for (const auto& v : report.verdicts)
        std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << " value=" << v.value << " threshold=" << v.threshold
                  << (v.detail.empty() ? "" : " (" + v.detail + ")") << "\n";
    std::cout << "report: " << path << "\n";
    return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rarefaction-wave Navier-Stokes experiments"};
    app.require_subcommand(1);
    const std::vector<std::pair<std::string, std::string>> commands{
        {"wave", "tabulate exact, cut-off and smooth profiles"},
        {"simulate", "single solver run with observer table"},
        {"cutoff-study", "cut-off wave distance against nu"},
        {"profile-study", "smooth-profile gradient norms and distance to the cut-off wave"},
        {"eps-sweep", "vanishing-viscosity distance sweep"},
        {"decay", "non-zero transverse mode decay on a slab"},
        {"background", "periodic background decay on a torus"},
        {"gn-check", "Gagliardo-Nirenberg constant sweep"},
    };
    std::vector<Options> opts(commands.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        auto* cmd = app.add_subcommand(commands[i].first, commands[i].second);
        add_common(cmd, opts[i], commands[i].first == "wave" || commands[i].first == "simulate");
        subs.push_back(cmd);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        for (std::size_t i = 0; i < subs.size(); ++i)
            if (subs[i]->parsed()) return run(commands[i].first, opts[i]);
    } catch (const rarelab::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
