#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace fpme {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Uniform periodic grid on [0,1)^d with cell centers at i*h per axis.
struct GridSpec {
    int dim = 1;        // spatial dimension, 1 or 2
    int n = 2;          // cells per axis
    double h = 0.5;     // spacing, 1/n
    std::int64_t cells = 2;  // total cell count n^d

    bool operator==(const GridSpec&) const = default;

    // flat index <-> per-axis multi-index, row-major
    std::array<int, 2> coords(std::int64_t i) const {
        if (dim == 1) return {static_cast<int>(i), 0};
        return {static_cast<int>(i / n), static_cast<int>(i % n)};
    }
    std::int64_t index(int i0, int i1 = 0) const {
        return dim == 1 ? i0 : static_cast<std::int64_t>(i0) * n + i1;
    }
    std::array<double, 2> center(std::int64_t i) const {
        auto c = coords(i);
        return {c[0] * h, c[1] * h};
    }
    double cell_volume() const {
        double v = h;
        for (int k = 1; k < dim; ++k) v *= h;
        return v;
    }
};

GridSpec make_grid(int dim, int n);

/// Shortest distance on the torus, d(x,y) = min_{k in Z^d} |x - y + k|.
double torus_distance(std::span<const double> x, std::span<const double> y);
double torus_distance(const GridSpec& grid, std::int64_t i, std::int64_t j);

/// Test-function samples on grid cells.
struct NodeField {
    GridSpec grid;
    Vector values;

    NodeField() = default;
    NodeField(const GridSpec& g, Vector v) : grid(g), values(std::move(v)) {
        if (values.size() != g.cells) throw std::invalid_argument("NodeField: size mismatch");
    }
    static NodeField zero(const GridSpec& g) { return {g, Vector::Zero(g.cells)}; }
};

/// Nonnegative density with unit total mass sum_i rho_i h^d = 1.
struct DensityField {
    GridSpec grid;
    Vector values;

    DensityField() = default;
    DensityField(const GridSpec& g, Vector v) : grid(g), values(std::move(v)) {
        if (values.size() != g.cells) throw std::invalid_argument("DensityField: size mismatch");
    }
    double mass() const { return values.sum() * grid.cell_volume(); }
    double min_value() const { return values.minCoeff(); }
};

/// Antisymmetric pair values V(i,j) = -V(j,i) on ordered cell pairs i != j.
/// Only the upper triangle i < j is stored; the diagonal is excluded.
struct PairField {
    GridSpec grid;
    Vector upper;  // N(N-1)/2 entries, pair (i,j) with i<j at triangular index

    PairField() = default;
    explicit PairField(const GridSpec& g)
        : grid(g), upper(Vector::Zero(g.cells * (g.cells - 1) / 2)) {}
    PairField(const GridSpec& g, Vector u) : grid(g), upper(std::move(u)) {
        if (upper.size() != g.cells * (g.cells - 1) / 2)
            throw std::invalid_argument("PairField: size mismatch");
    }

    std::int64_t pair_index(std::int64_t i, std::int64_t j) const {
        // i < j required
        const std::int64_t N = grid.cells;
        return i * N - i * (i + 1) / 2 + (j - i - 1);
    }
    double operator()(std::int64_t i, std::int64_t j) const {
        if (i == j) throw std::invalid_argument("PairField: diagonal pair excluded");
        return i < j ? upper[pair_index(i, j)] : -upper[pair_index(j, i)];
    }
    void set(std::int64_t i, std::int64_t j, double v) {
        if (i == j) throw std::invalid_argument("PairField: diagonal pair excluded");
        if (i < j)
            upper[pair_index(i, j)] = v;
        else
            upper[pair_index(j, i)] = -v;
    }
};

/// Discrete gradient grad_bar(phi)(i,j) = phi_j - phi_i, stored antisymmetrically.
PairField discrete_gradient(const NodeField& phi);

// forward declaration; defined in kernel.hpp
struct KernelMatrix;

/// Divergence paired with the 1/2-weighted discrete-gradient form:
///   (div V)_i = sum_{j != i} V_ij K_ij h^d,
/// so that <phi, div V> h^d + (1/2) sum_{i!=j} grad_bar(phi) V K h^{2d} = 0 exactly.
NodeField discrete_divergence(const PairField& V, const KernelMatrix& K);

/// Scale a nonnegative field to unit mass. Throws on zero/negative total mass.
DensityField normalize(const DensityField& rho);

}  // namespace fpme
