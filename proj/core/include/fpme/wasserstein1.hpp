#pragma once

#include "fpme/grid.hpp"

namespace fpme {

/// Kantorovich-Rubinstein distance with ground cost d_T, solved exactly as a
/// transportation linear program (network simplex on the basis tree).
/// Limited to grids with at most 1024 cells.
double w1_kantorovich(const DensityField& rho0, const DensityField& rho1);

}  // namespace fpme
