#include "fpme/jko.hpp"

#include "fpme/means.hpp"
#include "transport_internal.hpp"

#include <cmath>
#include <stdexcept>

namespace fpme {

double phi(double tau, const DensityField& rho_prev, const DensityField& rho,
           const KernelMatrix& K, double m, const SolverConfig& cfg) {
    if (!(tau > 0.0)) throw std::invalid_argument("phi: tau must be positive");
    const TransportResult r = solve_distance(rho_prev, rho, K, m, cfg);
    return r.objective / (2.0 * tau) + entropy(rho, m);
}

std::pair<DensityField, JkoStepDiagnostics> jko_step(const DensityField& rho_prev,
                                                     const KernelMatrix& K, double m,
                                                     const JkoConfig& cfg) {
    if (!(cfg.tau > 0.0)) throw std::invalid_argument("jko_step: tau must be positive");
    DensityField start = rho_prev;
    if (m <= 1.0) {
        start.values = start.values.cwiseMax(cfg.inner.density_floor);
        start = normalize(start);
    }
    const TransportResult r =
        detail_transport::solve_free_endpoint(start, K, m, cfg.tau, cfg.inner);
    JkoStepDiagnostics diag;
    const double dt = 1.0 / std::max(cfg.inner.time_steps, 1);
    for (double a : r.speed_profile) diag.w2_step += dt * a;
    diag.entropy_before = entropy(start, m);
    diag.inner_iterations = r.iterations;
    diag.constraint_residual = r.constraint_residual;
    diag.converged = r.converged;
    DensityField next{K.grid, r.path.densities.back()};
    diag.entropy_after = entropy(next, m);
    return {std::move(next), diag};
}

Trajectory jko_flow(const DensityField& rho0, const KernelMatrix& K, const JkoConfig& cfg) {
    if (cfg.steps < 1) throw std::invalid_argument("jko_flow: steps must be >= 1");
    if (!std::isfinite(entropy(rho0, cfg.m)))
        throw std::invalid_argument("jko_flow: initial entropy must be finite");
    Trajectory traj;
    traj.grid = K.grid;
    traj.tau = cfg.tau;
    traj.m = cfg.m;
    DensityField current = rho0;
    if (cfg.m <= 1.0) {
        current.values = current.values.cwiseMax(cfg.inner.density_floor);
        current = normalize(current);
    }
    traj.snapshots.push_back(current.values);
    traj.times.push_back(0.0);
    for (int s = 1; s <= cfg.steps; ++s) {
        auto [next, diag] = jko_step(current, K, cfg.m, cfg);
        traj.steps.push_back(diag);
        traj.snapshots.push_back(next.values);
        traj.times.push_back(s * cfg.tau);
        current = std::move(next);
        if (!diag.converged) {
            traj.completed = false;  // best iterate kept; remaining steps skipped
            break;
        }
    }
    return traj;
}

std::vector<DissipationRow> dissipation_check(const Trajectory& traj, const KernelMatrix& K) {
    if (traj.snapshots.size() < 3)
        throw std::invalid_argument("dissipation_check: need at least 3 snapshots");
    std::vector<DissipationRow> rows;
    rows.reserve(traj.snapshots.size() - 1);
    for (std::size_t n = 0; n + 1 < traj.snapshots.size(); ++n) {
        DensityField now{traj.grid, traj.snapshots[n]};
        DensityField nxt{traj.grid, traj.snapshots[n + 1]};
        DissipationRow row;
        row.step = static_cast<int>(n);
        row.entropy_decrement_rate = (entropy(now, traj.m) - entropy(nxt, traj.m)) / traj.tau;
        DensityField safe = now;
        if (traj.m <= 1.0) safe.values = safe.values.cwiseMax(1e-10);
        row.fisher = fisher_information(safe, traj.m, K);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace fpme
