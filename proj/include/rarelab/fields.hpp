#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rarelab/gas_model.hpp"

namespace rarelab {

class RarefactionWave;

// Uniform cell-centred grid on [-L, L) x [0, period)^(dims-1). Transverse directions are
// always periodic; the normal direction is periodic only for torus runs.
struct SlabGrid {
    double L = 5.0;
    int n1 = 256;
    double period = 1.0;
    int n2 = 1;
    int n3 = 1;
    int dims = 1;
    bool periodic_normal = false;

    // Fully periodic cell of side `period`; n1 = 1 gives a grid constant in x1.
    static SlabGrid torus(double period, int dims, int n_transverse, int n1);

    double h1() const { return 2.0 * L / n1; }
    double h2() const { return period / n2; }
    double h3() const { return period / n3; }
    double x1(int i) const { return -L + (i + 0.5) * h1(); }
    double x2(int j) const { return (j + 0.5) * h2(); }
    double x3(int k) const { return (k + 0.5) * h3(); }
    std::size_t size() const { return static_cast<std::size_t>(n1) * n2 * n3; }
    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(n1) * (j + static_cast<std::size_t>(n2) * k);
    }
    int transverse_count() const { return n2 * n3; }
    double cell_volume() const;
    double transverse_area() const;

    void validate() const;
    // Half-length needed to hold the fan over [0, horizon] plus smoothing and margin.
    static double required_half_length(const RarefactionWave& wave, double horizon, double margin);
    void validate_fits(const RarefactionWave& wave, double horizon, double margin) const;

    bool operator==(const SlabGrid&) const = default;
};

struct ScalarField {
    SlabGrid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const SlabGrid& g, double value = 0.0) : grid(g), v(g.size(), value) {}
    ScalarField(const SlabGrid& g, std::vector<double> values) : grid(g), v(std::move(values)) {}
    double& operator()(int i, int j, int k) { return v[grid.index(i, j, k)]; }
    double operator()(int i, int j, int k) const { return v[grid.index(i, j, k)]; }
};

// Conserved variables (rho, m1, m2, m3, E) at cell centres. Perturbations reuse the same layout.
struct FieldSet {
    static constexpr int kComponents = 5;

    SlabGrid grid;
    double time = 0.0;
    std::array<std::vector<double>, kComponents> q;

    FieldSet() = default;
    explicit FieldSet(const SlabGrid& g);

    std::vector<double>& rho() { return q[0]; }
    const std::vector<double>& rho() const { return q[0]; }
    std::vector<double>& m(int d) { return q[1 + d]; }
    const std::vector<double>& m(int d) const { return q[1 + d]; }
    std::vector<double>& E() { return q[4]; }
    const std::vector<double>& E() const { return q[4]; }

    ScalarField component(int c) const;
    bool operator==(const FieldSet&) const = default;
};

struct Primitives {
    std::vector<double> rho, theta, p;
    std::array<std::vector<double>, 3> u;
};

Primitives compute_primitives(const FieldSet& f, const GasParams& g);
// Conserved energy density of a primitive state.
double total_energy(const GasParams& g, double rho, const std::array<double, 3>& u, double theta);

// d f / d x_(dir+1) at cell centres: central differences, periodic wrap in periodic
// directions, second-order one-sided closure at pinned x1 ends. Zero along inactive axes.
std::vector<double> derivative(const SlabGrid& g, const std::vector<double>& f, int dir);

void write_binary(const FieldSet& f, const std::string& path);
FieldSet read_binary(const std::string& path);
void write_csv(const FieldSet& f, const std::string& path);

}  // namespace rarelab
