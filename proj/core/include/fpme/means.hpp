#pragma once

#include "fpme/grid.hpp"
#include "fpme/kernel.hpp"

#include <utility>

namespace fpme {

/// Entropy exponent m in (0,2] together with the data needed to check the
/// mass-conserving range m > m_* = (d-2*sigma)_+ / d.
struct Nonlinearity {
    double m = 2.0;
    double sigma = 0.5;
    int dim = 1;

    double m_star() const {
        double v = (dim - 2.0 * sigma) / dim;
        return v > 0.0 ? v : 0.0;
    }
    // true when m lies at or below the critical exponent; callers may warn or reject
    bool below_mass_conserving_range() const { return m <= m_star(); }
};

void validate_exponent(double m);

/// m-mean:  (s-t)/(log s - log t) for m=1,
///          ((m-1)/m) (s^m - t^m)/(s^{m-1} - t^{m-1}) otherwise,
/// extended by continuity to the diagonal and to vacuum arguments.
double theta_m(double s, double t, double m);

/// (d theta/d s, d theta/d t); requires s,t > 0.
std::pair<double, double> theta_m_partials(double s, double t, double m);

/// Entropy density U_m(s) = s log s (m=1), s^m/(m-1) otherwise, with U_m(0)=0.
double u_m(double s, double m);

/// U'_m(s) = log s + 1 (m=1), (m/(m-1)) s^{m-1} otherwise; requires s>0 for m<=1.
double u_m_prime(double s, double m);

/// Renyi entropy U_m(rho) integrated with midpoint quadrature: sum_i U_m(rho_i) h^d.
double entropy(const DensityField& rho, double m);

/// Fisher information (entropy dissipation):
///   m=1:    (1/2) sum_{i!=j} grad(rho) grad(log rho) K h^{2d}
///   m!=1:   (m/(m-1)) * (1/2) * sum_{i!=j} grad(rho^{m-1}) grad(rho^m) K h^{2d}
/// The 1/2 symmetrization over ordered pairs is applied for every m.
double fisher_information(const DensityField& rho, double m, const KernelMatrix& K);

}  // namespace fpme
