#include "fpme/action.hpp"

#include "fpme/means.hpp"

#include <cmath>

namespace fpme {

ActionValue action(const DensityField& rho, const PairField& V, const KernelMatrix& K, double m) {
    if (!(rho.grid == V.grid) || !(rho.grid == K.grid))
        throw std::invalid_argument("action: grid mismatch");
    const std::int64_t N = rho.grid.cells;
    const double hd = rho.grid.cell_volume();
    const double h2d = hd * hd;
    double acc = 0.0;
    std::int64_t p = 0;
    for (std::int64_t i = 0; i < N; ++i)
        for (std::int64_t j = i + 1; j < N; ++j, ++p) {
            const double v = V.upper[p];
            const double th = theta_m(rho.values[i], rho.values[j], m);
            if (th <= 0.0) {
                if (v != 0.0) return {0.0, false};  // momentum across a vacuum pair
                continue;                           // 0^2 / 0 = 0
            }
            // (1/2) sum over ordered pairs = sum over i<j
            acc += v * v / th * K.values(i, j) * h2d;
        }
    return {acc, true};
}

std::pair<NodeField, PairField> action_gradients(const DensityField& rho, const PairField& V,
                                                 const KernelMatrix& K, double m) {
    if (!(rho.grid == V.grid) || !(rho.grid == K.grid))
        throw std::invalid_argument("action_gradients: grid mismatch");
    const std::int64_t N = rho.grid.cells;
    const double h2d = rho.grid.cell_volume() * rho.grid.cell_volume();
    NodeField grad_rho = NodeField::zero(rho.grid);
    PairField grad_V(rho.grid);
    std::int64_t p = 0;
    for (std::int64_t i = 0; i < N; ++i)
        for (std::int64_t j = i + 1; j < N; ++j, ++p) {
            const double v = V.upper[p];
            const double th = theta_m(rho.values[i], rho.values[j], m);
            if (th <= 0.0) {
                if (v != 0.0)
                    throw std::invalid_argument("action_gradients: vacuum pair with momentum");
                continue;
            }
            const double kw = K.values(i, j) * h2d;
            // both orientations of the stored pair contribute
            grad_V.upper[p] = 2.0 * v / th * kw;
            const auto [ds, dt] = theta_m_partials(rho.values[i], rho.values[j], m);
            const double common = v * v / (th * th) * kw;
            grad_rho.values[i] -= common * ds;
            grad_rho.values[j] -= common * dt;
        }
    return {std::move(grad_rho), std::move(grad_V)};
}

std::pair<double, double> transport_estimate(const DensityField& rho, const PairField& V,
                                             const KernelMatrix& K, double m) {
    if (!(rho.grid == V.grid) || !(rho.grid == K.grid))
        throw std::invalid_argument("transport_estimate: grid mismatch");
    const std::int64_t N = rho.grid.cells;
    const double h2d = rho.grid.cell_volume() * rho.grid.cell_volume();
    double lhs = 0.0;
    std::int64_t p = 0;
    for (std::int64_t i = 0; i < N; ++i)
        for (std::int64_t j = i + 1; j < N; ++j, ++p)
            lhs += 2.0 * torus_distance(rho.grid, i, j) * std::abs(V.upper[p]) * K.values(i, j) * h2d;
    const ActionValue a = action(rho, V, K, m);
    const double rhs = a.finite ? comp_estimate_constant(K) * std::sqrt(a.value)
                                : std::numeric_limits<double>::infinity();
    return {lhs, rhs};
}

}  // namespace fpme
