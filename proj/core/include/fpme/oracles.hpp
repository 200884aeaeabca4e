#pragma once

#include "fpme/grid.hpp"
#include "fpme/kernel.hpp"

namespace fpme {

/// Fourier multipliers of (-Delta)^sigma on the grid: lambda_k = |2 pi k|^{2 sigma}
/// with signed per-axis frequencies |k_axis| <= n/2. Independent of the kernel
/// discretization; used as a reference for the m=1 flow.
struct SpectralPlan {
    GridSpec grid;
    double sigma = 0.5;
    Vector symbol;  // one multiplier per cell in DFT layout
};

SpectralPlan make_spectral_plan(const GridSpec& grid, double sigma);

/// Exact solution of the fractional heat semigroup: multiply mode k by
/// exp(-lambda_k t). Mass (the k=0 mode) is preserved exactly.
DensityField spectral_heat_flow(const DensityField& rho0, double sigma, double t);

/// Right-hand side of the semidiscrete flow: rhodot_i = sum_{j!=i} (rho_j^m - rho_i^m) K_ij h^d.
NodeField semidiscrete_rhs(const DensityField& rho, double m, const KernelMatrix& K);

/// Classic fixed-step RK4 on the semidiscrete system. dt <= 0 picks the a
/// priori stability estimate. Throws if the state dips below -1e-12.
DensityField integrate_semidiscrete(const DensityField& rho0, double m, const KernelMatrix& K,
                                    double t_final, double dt = 0.0);

/// Stability-based step estimate 1 / (2 max_i sum_j m max(rho)^{m-1} K_ij h^d).
double semidiscrete_stable_dt(const DensityField& rho, double m, const KernelMatrix& K);

}  // namespace fpme
