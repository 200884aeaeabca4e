#pragma once

#include "fpme/grid.hpp"
#include "fpme/kernel.hpp"

#include <utility>

namespace fpme {

/// Value of the kinetic action; +infinity is tracked as a flag, never as an
/// IEEE Inf inside arithmetic.
struct ActionValue {
    double value = 0.0;
    bool finite = true;
};

/// Non-local Benamou-Brenier action in momentum form:
///   A(rho, V) = (1/2) sum_{i!=j} V_ij^2 / theta_m(rho_i, rho_j) * K_ij h^{2d},
/// with the convention 0^2/0 = 0. Infinite when V != 0 on a theta = 0 pair.
ActionValue action(const DensityField& rho, const PairField& V, const KernelMatrix& K, double m);

/// First-order data for the convex path problem. Requires theta > 0 wherever V != 0.
/// grad_V(i,j) = 2 * (1/2) * V_ij/theta_ij * K_ij h^{2d} per unordered pair stored once;
/// grad_rho_i  = - sum_j (V_ij^2/theta_ij^2) dtheta/ds(rho_i, rho_j) K_ij h^{2d}.
std::pair<NodeField, PairField> action_gradients(const DensityField& rho, const PairField& V,
                                                 const KernelMatrix& K, double m);

/// Two sides of the transport estimate: lhs = sum_{i!=j} d_T(x_i,x_j) |V_ij| K_ij h^{2d}
/// (the total variation integral of d_T against the pair measure V dK), and
/// rhs = C * sqrt(A) with C = comp_estimate_constant(K). lhs <= rhs always holds.
std::pair<double, double> transport_estimate(const DensityField& rho, const PairField& V,
                                             const KernelMatrix& K, double m);

}  // namespace fpme
