#pragma once

#include "fpme/action.hpp"
#include "fpme/grid.hpp"
#include "fpme/kernel.hpp"

#include <cstdint>
#include <vector>

namespace fpme {

enum class PathInit {
    linear,    // rho^k = (1-k/L) rho0 + (k/L) rho1, momenta from one continuity solve
    constant,  // all nodes at rho0 (natural start for the free-endpoint problem)
    random,    // linear plus a small seeded perturbation of the interior nodes
};

struct SolverConfig {
    int time_steps = 16;           // L
    int max_iterations = 5000;     // outer descent iterations
    double constraint_tol = 1e-9;  // l-inf on the continuity residual
    double objective_tol = 1e-7;   // relative decrease over plateau_window iterations
    int plateau_window = 20;
    double density_floor = 1e-10;  // lower bound on densities for m <= 1
    PathInit init = PathInit::linear;
    std::uint64_t init_seed = 0;   // used by PathInit::random
    double cg_tol = 1e-12;         // multiplier-solve residual, l-inf
    int cg_max_iterations = 0;     // 0 = 8N
};

/// Space-time unknowns of the dynamic formulation on [0, T]:
/// node densities rho^0..rho^L and interval momenta V^1..V^L, dt = T/L.
struct PathVariables {
    GridSpec grid;
    int steps = 0;          // L
    double horizon = 1.0;   // T
    std::vector<Vector> densities;   // L+1 node densities
    std::vector<PairField> momenta;  // L interval momenta
    double dt = 0.0;
};

struct TransportResult {
    double distance = 0.0;            // sqrt of the minimized time-integrated action
    double objective = 0.0;           // sum_k dt A^k (times T when horizon != 1)
    PathVariables path;
    std::vector<double> speed_profile;  // per-interval action values A^k
    std::vector<double> objective_history;  // one entry per accepted outer iterate
    int iterations = 0;
    double constraint_residual = 0.0;   // final l-inf continuity residual
    double objective_decrease = 0.0;    // last windowed relative decrease
    bool converged = false;
};

/// Minimize sum_k dt * A(rhobar^k, V^k) over continuity-equation paths joining
/// rho0 to rho1 on [0,1]; theta is evaluated at interval-averaged densities.
TransportResult solve_distance(const DensityField& rho0, const DensityField& rho1,
                               const KernelMatrix& K, double m, const SolverConfig& cfg = {});

/// Per-interval action values of a converged path and their relative flatness
/// max_k |a_k - mean| / mean (constant-speed diagnostic).
std::vector<double> geodesic_speed_profile(const TransportResult& result);
double speed_profile_flatness(const TransportResult& result);

/// Solve on [0,T] with the horizon-invariant objective T * integral(A);
/// returns (W computed at horizon T, W computed at horizon 1).
std::pair<double, double> rescaling_check(const DensityField& rho0, const DensityField& rho1,
                                          const KernelMatrix& K, double m, const SolverConfig& cfg,
                                          double horizon);

/// W(a,b) + W(b,c) - W(a,c); nonnegative up to solver tolerance.
double triangle_inequality_probe(const DensityField& a, const DensityField& b,
                                 const DensityField& c, const KernelMatrix& K, double m,
                                 const SolverConfig& cfg = {});

}  // namespace fpme
