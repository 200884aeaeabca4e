#pragma once

#include "fpme/transport.hpp"

namespace fpme::detail_transport {

// Minimizing-movement subproblem: minimize sum_k dt A(rhobar^k, V^k)/(2 tau)
// + U_m(rho^L) over paths with rho^0 = rho_prev fixed and rho^L free.
// The returned objective includes the entropy term; speed_profile holds the
// per-interval actions of the minimizing path.
TransportResult solve_free_endpoint(const DensityField& rho_prev, const KernelMatrix& K, double m,
                                    double tau, const SolverConfig& cfg);

}  // namespace fpme::detail_transport
