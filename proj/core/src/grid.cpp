#include "fpme/grid.hpp"

#include "fpme/kernel.hpp"

#include <cmath>

namespace fpme {

GridSpec make_grid(int dim, int n) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("make_grid: unsupported dimension");
    if (n < 2) throw std::invalid_argument("make_grid: resolution must be at least 2");
    GridSpec g;
    g.dim = dim;
    g.n = n;
    g.h = 1.0 / n;
    g.cells = 1;
    for (int k = 0; k < dim; ++k) g.cells *= n;
    return g;
}

namespace {
double wrap_unit(double x) { return x - std::floor(x); }
}  // namespace

double torus_distance(std::span<const double> x, std::span<const double> y) {
    const int d = static_cast<int>(x.size());
    double best = 0.0;
    // minimize |x - y + k| over the 3^d nearest integer shifts
    if (d == 1) {
        const double base = wrap_unit(x[0]) - wrap_unit(y[0]);
        best = std::abs(base);
        for (int k = -1; k <= 1; k += 2) best = std::min(best, std::abs(base + k));
    } else {
        const double b0 = wrap_unit(x[0]) - wrap_unit(y[0]);
        const double b1 = wrap_unit(x[1]) - wrap_unit(y[1]);
        double best2 = 1e300;
        for (int k0 = -1; k0 <= 1; ++k0)
            for (int k1 = -1; k1 <= 1; ++k1) {
                const double u = b0 + k0, v = b1 + k1;
                best2 = std::min(best2, u * u + v * v);
            }
        best = std::sqrt(best2);
    }
    return best;
}

double torus_distance(const GridSpec& grid, std::int64_t i, std::int64_t j) {
    const auto ci = grid.center(i);
    const auto cj = grid.center(j);
    return torus_distance(std::span<const double>(ci.data(), grid.dim),
                          std::span<const double>(cj.data(), grid.dim));
}

PairField discrete_gradient(const NodeField& phi) {
    PairField out(phi.grid);
    const std::int64_t N = phi.grid.cells;
    std::int64_t p = 0;
    for (std::int64_t i = 0; i < N; ++i)
        for (std::int64_t j = i + 1; j < N; ++j) out.upper[p++] = phi.values[j] - phi.values[i];
    return out;
}

NodeField discrete_divergence(const PairField& V, const KernelMatrix& K) {
    if (!(V.grid == K.grid)) throw std::invalid_argument("discrete_divergence: grid mismatch");
    const std::int64_t N = V.grid.cells;
    const double hd = V.grid.cell_volume();
    NodeField out = NodeField::zero(V.grid);
    std::int64_t p = 0;
    for (std::int64_t i = 0; i < N; ++i)
        for (std::int64_t j = i + 1; j < N; ++j, ++p) {
            const double flux = V.upper[p] * K.values(i, j) * hd;
            out.values[i] += flux;   // V_ij
            out.values[j] -= flux;   // V_ji = -V_ij
        }
    return out;
}

DensityField normalize(const DensityField& rho) {
    if (rho.values.minCoeff() < 0.0)
        throw std::invalid_argument("normalize: negative density entry");
    const double total = rho.mass();
    if (!(total > 0.0)) throw std::invalid_argument("normalize: zero or negative total mass");
    DensityField out = rho;
    out.values /= total;
    return out;
}

}  // namespace fpme
