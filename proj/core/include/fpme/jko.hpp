#pragma once

#include "fpme/kernel.hpp"
#include "fpme/transport.hpp"

#include <string>
#include <vector>

namespace fpme {

struct JkoConfig {
    double tau = 1e-3;  // implicit time step
    int steps = 1;
    double m = 2.0;
    SolverConfig inner{.time_steps = 8};  // short paths suffice per step
    double entropy_tol = 1e-6;            // slack allowed in the per-step energy check
};

struct JkoStepDiagnostics {
    double w2_step = 0.0;        // sum_k dt A^k of the minimizing path
    double entropy_before = 0.0;
    double entropy_after = 0.0;
    int inner_iterations = 0;
    double constraint_residual = 0.0;
    bool converged = false;
};

struct Trajectory {
    GridSpec grid;
    double tau = 0.0;
    double m = 2.0;
    std::vector<Vector> snapshots;   // rho^0..rho^S
    std::vector<double> times;       // n * tau
    std::vector<JkoStepDiagnostics> steps;
    bool completed = true;           // false when a step failed to converge
};

/// Phi(tau, rho_prev; rho) = W^2(rho_prev, rho)/(2 tau) + U_m(rho).
double phi(double tau, const DensityField& rho_prev, const DensityField& rho,
           const KernelMatrix& K, double m, const SolverConfig& cfg = {});

/// One minimizing movement: jointly minimize sum_k dt A(rhobar^k, V^k)/(2 tau)
/// + U_m(rho^L) over paths with rho^0 = rho_prev fixed and rho^L free.
std::pair<DensityField, JkoStepDiagnostics> jko_step(const DensityField& rho_prev,
                                                     const KernelMatrix& K, double m,
                                                     const JkoConfig& cfg);

/// Iterate jko_step; aborts early (completed = false) if a step fails.
Trajectory jko_flow(const DensityField& rho0, const KernelMatrix& K, const JkoConfig& cfg);

struct DissipationRow {
    int step = 0;
    double entropy_decrement_rate = 0.0;  // (U(rho^n) - U(rho^{n+1})) / tau
    double fisher = 0.0;                  // I_m(rho^n)
};

/// Per-step comparison of the entropy decrement rate against the Fisher
/// information. Reported, not asserted: the scheme satisfies the energy
/// inequality but no discrete dissipation identity is claimed.
std::vector<DissipationRow> dissipation_check(const Trajectory& traj, const KernelMatrix& K);

}  // namespace fpme
