#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "rarelab/errors.hpp"
#include "rarelab/perturbation.hpp"

using namespace rarelab;

namespace {

double mean(const std::vector<double>& v) {
    long double s = 0.0L;
    for (double x : v) s += x;
    return static_cast<double>(s / v.size());
}

double mean_square(const std::vector<double>& v) {
    long double s = 0.0L;
    for (double x : v) s += static_cast<long double>(x) * x;
    return static_cast<double>(s / v.size());
}

WaveSpec test_wave(double nu = 0.1, double delta = 0.2) {
    WaveSpec s;
    s.gas = GasParams::normalized(5.0 / 3.0);
    s.nu = nu;
    s.delta = delta;
    s.shifted = false;
    return s;
}

std::filesystem::path scratch(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("rarelab_test_" + name);
}

}  // namespace

TEST_SUITE("fields") {

TEST_CASE("grid geometry") {
    const SlabGrid g{2.0, 8, 0.5, 4, 4, 3, false};
    CHECK(g.h1() == 0.5);
    CHECK(g.x1(0) == -1.75);
    CHECK(g.x1(7) == 1.75);
    CHECK(g.x2(3) == doctest::Approx(0.4375).epsilon(1e-15));
    CHECK(g.size() == 128);
    CHECK(g.index(1, 2, 3) == 1 + 8 * (2 + 4 * 3));
    CHECK(g.transverse_area() == 0.25);
    CHECK(g.cell_volume() * g.size() == doctest::Approx(4.0 * 0.25).epsilon(1e-15));

    const auto t = SlabGrid::torus(0.5, 2, 8, 8);
    CHECK(t.periodic_normal);
    CHECK(t.n3 == 1);
    CHECK(t.h1() == doctest::Approx(t.h2()).epsilon(1e-15));
}

TEST_CASE("grid validation names the constraint") {
    SlabGrid g{2.0, 64, 0.5, 12, 1, 2, false};
    CHECK_THROWS_WITH_AS(g.validate(), doctest::Contains("powers of two"), ConfigError);
    g.n2 = 8;
    CHECK_NOTHROW(g.validate());
    g.dims = 1;
    CHECK_THROWS_WITH_AS(g.validate(), doctest::Contains("n2 must be 1"), ConfigError);
    g = SlabGrid{-1.0, 64, 0.5, 1, 1, 1, false};
    CHECK_THROWS_WITH_AS(g.validate(), doctest::Contains("L must be"), ConfigError);
}

TEST_CASE("slab half-length covers the fan") {
    const RarefactionWave w(test_wave());
    const double need = SlabGrid::required_half_length(w, 2.0, 0.5);
    CHECK(need == doctest::Approx(std::fabs(w.u1_minus()) * 2.0 + w.lambda3_plus() * 2.0 + 20.0 * 0.2 + 0.5)
                      .epsilon(1e-14));
    SlabGrid g{need - 0.1, 64, 0.5, 1, 1, 1, false};
    CHECK_THROWS_WITH_AS(g.validate_fits(w, 2.0, 0.5), doctest::Contains("too small"), ConfigError);
    g.L = need;
    CHECK_NOTHROW(g.validate_fits(w, 2.0, 0.5));
}

TEST_CASE("central derivatives converge at second order") {
    auto err = [](int n) {
        const SlabGrid g{1.0, n, 1.0, n, 1, 2, false};
        std::vector<double> f(g.size()), exact1(g.size()), exact2(g.size());
        for (int j = 0; j < g.n2; ++j)
            for (int i = 0; i < g.n1; ++i) {
                const double x = g.x1(i), y = g.x2(j);
                const auto id = g.index(i, j, 0);
                f[id] = std::exp(x) * std::sin(2.0 * std::numbers::pi * y);
                exact1[id] = f[id];
                exact2[id] = 2.0 * std::numbers::pi * std::exp(x) * std::cos(2.0 * std::numbers::pi * y);
            }
        const auto d1 = derivative(g, f, 0), d2 = derivative(g, f, 1);
        double e = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) e = std::max({e, std::fabs(d1[i] - exact1[i]), std::fabs(d2[i] - exact2[i])});
        return e;
    };
    const double order = std::log2(err(32) / err(64));
    CHECK(order > 1.8);
    CHECK(order < 2.3);
}

TEST_CASE("one-sided closure is exact for quadratics") {
    const SlabGrid g{1.0, 10, 1.0, 1, 1, 1, false};
    std::vector<double> f(g.size());
    for (int i = 0; i < g.n1; ++i) f[i] = 3.0 * g.x1(i) * g.x1(i) - g.x1(i) + 2.0;
    const auto d = derivative(g, f, 0);
    for (int i = 0; i < g.n1; ++i) CHECK(d[i] == doctest::Approx(6.0 * g.x1(i) - 1.0).epsilon(1e-12));
    CHECK(derivative(g, f, 1) == std::vector<double>(g.size(), 0.0));
}

TEST_CASE("binary and CSV serialization") {
    const auto g = SlabGrid::torus(0.5, 3, 4, 8);
    const auto f0 = make_perturbation({1e-2, 1, 1, 7}, g);
    auto f = f0;
    f.time = 0.625;
    const auto bin = scratch("round.bin");
    write_binary(f, bin.string());
    const auto back = read_binary(bin.string());
    CHECK(back == f);

    const auto csv = scratch("round.csv");
    write_csv(f, csv.string());
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "# time=0.625");
    std::getline(in, line);
    CHECK(line == "i,j,k,x1,x2,x3,rho,m1,m2,m3,E");
    std::size_t rows = 0;
    double first_rho = 0.0;
    while (std::getline(in, line)) {
        if (rows == 0) {
            std::size_t pos = 0;
            for (int c = 0; c < 6; ++c) pos = line.find(',', pos) + 1;
            first_rho = std::stod(line.substr(pos));
        }
        ++rows;
    }
    CHECK(rows == g.size());
    CHECK(first_rho == f.rho()[0]);

    std::ofstream(bin, std::ios::binary) << "garbage";
    CHECK_THROWS_AS(read_binary(bin.string()), ConfigError);
    std::filesystem::remove(bin);
    std::filesystem::remove(csv);
}

TEST_CASE("perturbation is deterministic with zero mean") {
    const auto g = SlabGrid::torus(1.0, 3, 8, 8);
    const PerturbationSpec spec{1e-3, 3, 3, 42};
    const auto a = make_perturbation(spec, g), b = make_perturbation(spec, g);
    CHECK(a == b);
    for (int c = 0; c < FieldSet::kComponents; ++c) CHECK(std::fabs(mean(a.q[c])) < 1e-14);
    auto other = spec;
    other.seed = 43;
    CHECK_FALSE(make_perturbation(other, g) == a);

    const auto zero = make_perturbation({0.0, 3, 3, 42}, g);
    for (const auto& c : zero.q) CHECK(c == std::vector<double>(g.size(), 0.0));
}

TEST_CASE("perturbation norm equals eta") {
    const double eta = 2e-3, P = 0.5;
    const auto g = SlabGrid::torus(P, 2, 64, 64);
    const auto f = make_perturbation({eta, 1, 1, 5}, g);
    double n0 = 0.0, n1 = 0.0, n2 = 0.0;
    for (const auto& c : f.q) {
        n0 += mean_square(c);
        const auto dx = derivative(g, c, 0), dy = derivative(g, c, 1);
        n1 += P * P * (mean_square(dx) + mean_square(dy));
        const auto dxx = derivative(g, dx, 0), dyy = derivative(g, dy, 1), dxy = derivative(g, dx, 1);
        n2 += P * P * P * P * (mean_square(dxx) + mean_square(dyy) + 2.0 * mean_square(dxy));
    }
    CHECK(std::sqrt(n0 + n1 + n2) == doctest::Approx(eta).epsilon(0.02));
}

TEST_CASE("transverse-only perturbation is constant in x1") {
    const SlabGrid g{4.0, 32, 0.5, 8, 1, 2, false};
    const auto f = make_perturbation({1e-3, 2, 0, 3}, g);
    for (int j = 0; j < g.n2; ++j)
        for (int i = 1; i < g.n1; ++i) CHECK(f.rho()[g.index(i, j, 0)] == f.rho()[g.index(0, j, 0)]);
}

TEST_CASE("perturbation errors") {
    const auto g = SlabGrid::torus(1.0, 2, 8, 8);
    CHECK_THROWS_WITH_AS(make_perturbation({1e-3, 4, 1, 1}, g), doctest::Contains("Nyquist"), ConfigError);
    CHECK_THROWS_WITH_AS(make_perturbation({1e-3, 1, 4, 1}, g), doctest::Contains("Nyquist"), ConfigError);
    CHECK_THROWS_AS(make_perturbation({-1.0, 1, 1, 1}, g), ConfigError);
    CHECK_THROWS_AS(make_perturbation({1e-3, 0, 0, 1}, g), ConfigError);
}

TEST_CASE("initial data assembly") {
    const RarefactionWave w(test_wave(0.1, 0.2));
    const auto& gas = w.gas();
    const SlabGrid g{8.0, 256, 0.5, 8, 1, 2, false};

    const auto bare = assemble_initial(w, nullptr, g, 0.0);
    for (int i = 0; i < g.n1; ++i) {
        const auto p = w.profile(0.0, g.x1(i));
        const auto id = g.index(i, 3, 0);
        CHECK(bare.rho()[id] == p.rho);
        CHECK(bare.m(0)[id] == p.rho * p.u1);
        CHECK(bare.m(1)[id] == 0.0);
        CHECK(bare.E()[id] == total_energy(gas, p.rho, {p.u1, 0.0, 0.0}, p.theta));
    }

    const auto pert = make_perturbation({1e-3, 1, 2, 11}, g);
    const auto full = assemble_initial(w, &pert, g, 0.0);
    double min_rho = INFINITY;
    for (int c = 0; c < FieldSet::kComponents; ++c)
        for (int i = 0; i < g.n1; ++i) {
            double avg_diff = 0.0, avg_pert = 0.0;
            for (int j = 0; j < g.n2; ++j) {
                const auto id = g.index(i, j, 0);
                avg_diff += full.q[c][id] - bare.q[c][id];
                avg_pert += pert.q[c][id];
            }
            CHECK(std::fabs(avg_diff - avg_pert) / g.n2 < 1e-15);
        }
    for (double r : full.rho()) min_rho = std::min(min_rho, r);
    CHECK(min_rho >= 0.1 - 1e-3);

    const auto huge = make_perturbation({5.0, 1, 2, 11}, g);
    CHECK_THROWS_WITH_AS(assemble_initial(w, &huge, g, 0.0), doctest::Contains("worst cell"), ConfigError);
    const auto wrong = make_perturbation({1e-3, 1, 1, 11}, SlabGrid::torus(0.5, 2, 8, 8));
    CHECK_THROWS_AS(assemble_initial(w, &wrong, g, 0.0), ConfigError);
}

}
