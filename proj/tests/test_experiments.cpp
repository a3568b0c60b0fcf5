#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rarelab/errors.hpp"
#include "rarelab/experiments.hpp"

using namespace rarelab;
namespace fs = std::filesystem;

namespace {

std::string minimal(const std::string& extra_experiment = "") {
    return "[gas]\n[wave]\n[grid]\n[solver]\n[experiment]\n" + extra_experiment + "[output]\n";
}

std::string strip_wall(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') line = line.substr(0, line.rfind(','));
        out += line + "\n";
    }
    return out;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(RARELAB_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("rarelab_exp_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

ExperimentConfig small_background() {
    auto cfg = parse_config_text(minimal("kind = background\n"));
    cfg.nu = 0.2;
    cfg.shifted = false;
    cfg.dims = 2;
    cfg.n2 = 8;
    cfg.horizon = 0.3;
    cfg.samples = 7;
    cfg.sweep = {0.005, 0.01};
    cfg.normal_mode_cap = 0;
    return cfg;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("config round trip") {
    ExperimentConfig cfg;
    CHECK(parse_config_text(emit_config_text(cfg)) == cfg);
    cfg.kind = "eps-sweep";
    cfg.sweep = {0.04, 0.02, 0.01};
    cfg.deltas = {0.3};
    cfg.nu = 0.125;
    cfg.dims = 3;
    cfg.n2 = cfg.n3 = 8;
    cfg.seed = 18446744073709551615ULL;
    cfg.convective = "rusanov";
    cfg.prefix = "run1_";
    cfg.snapshots = true;
    CHECK(parse_config_text(emit_config_text(cfg)) == cfg);

    const auto path = fs::temp_directory_path() / "rarelab_round.ini";
    emit_config(cfg, path.string());
    CHECK(parse_config(path.string()) == cfg);
    fs::remove(path);
}

TEST_CASE("config errors name the offending key") {
    const std::string no_gas = "[wave]\n[grid]\n[solver]\n[experiment]\n[output]\n";
    CHECK_THROWS_WITH_AS(parse_config_text(no_gas), doctest::Contains("missing section [gas]"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text(minimal() + "[extra]\n"), doctest::Contains("unknown section [extra]"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text(minimal("colour = blue\n")),
                         doctest::Contains("unknown key 'experiment.colour'"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text(minimal(), {{"wave.nu", "abc"}}), doctest::Contains("wave.nu"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text(minimal(), {{"grid.n2", "12"}, {"grid.dims", "2"}}),
                         doctest::Contains("grid"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text(minimal(), {{"solver.framing", "scaled"}}),
                         doctest::Contains("solver.framing"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text(minimal(), {{"wave.nu", "1.5"}}), doctest::Contains("wave.nu"), ConfigError);
    CHECK_THROWS_AS(parse_config("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("paper_scaling key") {
    CHECK_THROWS_WITH_AS(parse_config_text("[gas]\n[wave]\nnu = 0.1\n[grid]\n[solver]\n[experiment]\npaper_scaling = true\n[output]\n"),
                         doctest::Contains("wave.nu"), ConfigError);
    ExperimentConfig cfg;
    cfg.paper_scaling = true;
    cfg.kind = "eps-sweep";
    cfg.sweep = {0.04, 0.02, 0.01};
    CHECK_THROWS_WITH_AS(parse_config_text(emit_config_text(cfg)), doctest::Contains("derived eps scaling is asymptotic"),
                         ConfigError);
    // the derived values themselves
    const auto ex = scaling_exponents(cfg.gamma, cfg.alpha);
    const double eps = 0.01;
    CHECK(std::pow(eps, ex.Z * ex.a) * std::fabs(std::log(eps)) == doctest::Approx(4.51).epsilon(1e-3));
}

TEST_CASE("eps links resolve nu and delta") {
    auto cfg = parse_config_text(minimal(), {{"wave.nu_coef", "2"}, {"wave.nu_power", "1"}, {"wave.delta_coef", "1"},
                                             {"wave.delta_power", "0.5"}});
    const auto w = wave_spec(cfg, 0.04);
    CHECK(w.nu == doctest::Approx(0.08).epsilon(1e-14));
    CHECK(w.delta == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("config hash covers the physics only") {
    ExperimentConfig a;
    auto b = a;
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.jobs = 4;
    b.dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));
    b.nu = 0.051;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.seed = 43;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("reports are byte identical across thread counts") {
    auto one = small_background();
    auto two = one;
    two.jobs = 2;
    const auto r1 = run_experiment(one), r2 = run_experiment(two);
    CHECK(strip_wall(report_csv(r1)) == strip_wall(report_csv(r2)));
    for (const auto& v : r1.verdicts)
        if (v.name == "average_conservation") CHECK(v.pass);

    const auto csv = report_csv(r1);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "# schema=1");
    std::getline(in, line);
    CHECK(line == "# kind=background");
    std::string header;
    while (std::getline(in, header) && header[0] == '#') {}
    const auto cols = split(header);
    CHECK(cols.front() == "config_hash");
    CHECK(cols[cols.size() - 2] == "status");
    CHECK(cols.back() == "wall_s");
    std::getline(in, line);
    CHECK(split(line).front() == r1.config_hash);
}

TEST_CASE("zero perturbation background rows vanish") {
    auto cfg = small_background();
    cfg.sweep = {0.0};
    const auto r = run_experiment(cfg);
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        CHECK(r.column(i, "dev_inf") == 0.0);
        CHECK(r.column(i, "drift") == 0.0);
    }
    bool found = false;
    for (const auto& v : r.verdicts)
        if (v.name == "zero_eta") found = v.pass;
    CHECK(found);
}

TEST_CASE("cut-off verdicts are recomputable from the CSV") {
    auto cfg = parse_config_text(minimal("kind = cutoff-study\nsweep = 0.1, 0.05, 0.025, 0.0125\n"));
    const auto dir = scratch_dir("cutoff");
    const auto path = (dir / "cutoff.csv").string();
    emit_report(run_experiment(cfg), path);

    std::ifstream in(path);
    std::string line;
    std::vector<std::string> cols;
    std::vector<double> nu, dist;
    double band = -1.0;
    while (std::getline(in, line)) {
        if (line.rfind("# verdict ratio_band", 0) == 0) band = std::stod(line.substr(line.find("value=") + 6));
        if (line.empty() || line[0] == '#') continue;
        const auto f = split(line);
        if (cols.empty()) {
            cols = f;
            continue;
        }
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (cols[c] == "nu") nu.push_back(std::stod(f[c]));
            if (cols[c] == "dist") dist.push_back(std::stod(f[c]));
        }
    }
    REQUIRE(nu.size() == 4);
    double lo = INFINITY, hi = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) {
        lo = std::min(lo, dist[i] / nu[i]);
        hi = std::max(hi, dist[i] / nu[i]);
    }
    CHECK(hi / lo == doctest::Approx(band).epsilon(1e-12));
    CHECK(fs::exists(path + ".json"));
    std::ifstream js(path + ".json");
    const auto j = nlohmann::json::parse(js);
    CHECK(j["kind"] == "cutoff-study");
    CHECK(j["config"].is_object());
    CHECK(j["all_pass"].is_boolean());
    fs::remove_all(dir);
}

TEST_CASE("worker pool runs every task and rethrows") {
    std::vector<int> hit(50, 0);
    run_pool(3, hit.size(), [&](std::size_t i) { hit[i] += 1; });
    CHECK(std::count(hit.begin(), hit.end(), 1) == 50);
    CHECK_THROWS_AS(run_pool(2, 10, [](std::size_t i) { if (i == 7) throw NumericalError("boom"); }), NumericalError);
}

TEST_CASE("CLI exit codes") {
    const auto dir = scratch_dir("cli");
    const std::string out = " --out " + dir.string();
    CHECK(cli("wave --nu 0.05 --delta 0.1 --t 1 --grid 64" + out) == 0);
    CHECK(fs::exists(dir / "wave.csv"));
    CHECK(cli("gn-check" + out) == 0);
    CHECK(cli("cutoff-study" + out) == 1);
    CHECK(cli("wave --config /nonexistent.ini" + out) == 2);
    CHECK(cli("wave --nu 2" + out) == 2);
    CHECK(cli("eps-sweep --paper-scaling" + out) == 2);
    CHECK(cli("wave --bogus" + out) == 2);
    CHECK(cli("") == 2);
    const auto bad = dir / "bad.ini";
    std::ofstream(bad) << "[gas]\ngamma = 1.4\n";
    CHECK(cli("wave --config " + bad.string() + out) == 2);
    fs::remove_all(dir);
}

TEST_CASE("shipped configs parse") {
    for (const auto& e : fs::directory_iterator(fs::path(RARELAB_SOURCE_DIR) / "configs"))
        if (e.path().extension() == ".ini") CHECK_NOTHROW(parse_config(e.path().string()));
}

}
