#include "fpme/means.hpp"

#include <cmath>

namespace fpme {

namespace {
// Relative width of the series branch. The direct formula loses ~eps/|u|
// digits near the diagonal (u = (s-t)/(s+t)); with the quartic term the
// expansion is accurate to O(u^6) so a wide window keeps both branches
// below 1e-13 relative error everywhere.
constexpr double kDiagonalSwitch = 1e-3;

double quartic_coefficient(double m) { return -(m - 2.0) * (m - 3.0) * (m + 1.0) / 45.0; }
}

void validate_exponent(double m) {
    if (!(m > 0.0 && m <= 2.0)) throw std::invalid_argument("exponent m must lie in (0,2]");
}

double theta_m(double s, double t, double m) {
    validate_exponent(m);
    if (s < 0.0 || t < 0.0) throw std::invalid_argument("theta_m: negative input");
    const double mx = s > t ? s : t;
    if (mx == 0.0) return 0.0;  // theta(0,0) = 0 for every m
    if (s == 0.0 || t == 0.0) return m <= 1.0 ? 0.0 : (m - 1.0) / m * mx;
    if (std::abs(s - t) <= kDiagonalSwitch * mx) {
        // expansion about the diagonal through (s-t)^4
        const double a = 0.5 * (s + t);
        const double e = s - t;
        return a - (2.0 - m) * e * e / (12.0 * a) +
               quartic_coefficient(m) * e * e * e * e / (16.0 * a * a * a);
    }
    // log s - log t (not log(s/t)): exact antisymmetry under argument swap
    if (m == 1.0) return (s - t) / (std::log(s) - std::log(t));
    return (m - 1.0) / m * (std::pow(s, m) - std::pow(t, m)) /
           (std::pow(s, m - 1.0) - std::pow(t, m - 1.0));
}

std::pair<double, double> theta_m_partials(double s, double t, double m) {
    validate_exponent(m);
    if (!(s > 0.0) || !(t > 0.0))
        throw std::invalid_argument("theta_m_partials: arguments must be strictly positive");
    const double mx = s > t ? s : t;
    if (std::abs(s - t) <= kDiagonalSwitch * mx) {
        // derivatives of the diagonal expansion used by theta_m
        const double a = 0.5 * (s + t);
        const double e = s - t;
        const double c = (2.0 - m) / 12.0;
        const double q = quartic_coefficient(m) / 16.0;
        const double e3 = e * e * e, a3 = a * a * a;
        const double ds = 0.5 - c * (2.0 * e / a - 0.5 * e * e / (a * a)) +
                          q * (4.0 * e3 / a3 - 1.5 * e3 * e / (a3 * a));
        const double dt = 0.5 - c * (-2.0 * e / a - 0.5 * e * e / (a * a)) +
                          q * (-4.0 * e3 / a3 - 1.5 * e3 * e / (a3 * a));
        return {ds, dt};
    }
    if (m == 1.0) {
        const double ell = std::log(s) - std::log(t);
        const double e = s - t;
        return {(ell - e / s) / (ell * ell), (-ell + e / t) / (ell * ell)};
    }
    const double c = (m - 1.0) / m;
    const double num = std::pow(s, m) - std::pow(t, m);
    const double den = std::pow(s, m - 1.0) - std::pow(t, m - 1.0);
    const double ds =
        c * (m * std::pow(s, m - 1.0) * den - num * (m - 1.0) * std::pow(s, m - 2.0)) / (den * den);
    const double dt =
        c * (-m * std::pow(t, m - 1.0) * den + num * (m - 1.0) * std::pow(t, m - 2.0)) / (den * den);
    return {ds, dt};
}

double u_m(double s, double m) {
    validate_exponent(m);
    if (s < 0.0) throw std::invalid_argument("u_m: negative input");
    if (m == 1.0) return s == 0.0 ? 0.0 : s * std::log(s);  // 0 log 0 = 0
    return std::pow(s, m) / (m - 1.0);
}

double u_m_prime(double s, double m) {
    validate_exponent(m);
    if (m <= 1.0 && !(s > 0.0))
        throw std::invalid_argument("u_m_prime: singular at vacuum for m <= 1");
    if (s < 0.0) throw std::invalid_argument("u_m_prime: negative input");
    if (m == 1.0) return std::log(s) + 1.0;
    return m / (m - 1.0) * std::pow(s, m - 1.0);
}

double entropy(const DensityField& rho, double m) {
    validate_exponent(m);
    const double hd = rho.grid.cell_volume();
    double acc = 0.0;
    for (std::int64_t i = 0; i < rho.values.size(); ++i) acc += u_m(rho.values[i], m);
    return acc * hd;
}

double fisher_information(const DensityField& rho, double m, const KernelMatrix& K) {
    validate_exponent(m);
    if (!(rho.grid == K.grid)) throw std::invalid_argument("fisher_information: grid mismatch");
    const std::int64_t N = rho.grid.cells;
    const double hd = rho.grid.cell_volume();
    if (m <= 1.0 && rho.values.minCoeff() <= 0.0)
        throw std::invalid_argument("fisher_information: vacuum cell with m <= 1");
    double acc = 0.0;
    if (m == 1.0) {
        for (std::int64_t i = 0; i < N; ++i)
            for (std::int64_t j = i + 1; j < N; ++j) {
                const double dr = rho.values[j] - rho.values[i];
                const double dl = std::log(rho.values[j]) - std::log(rho.values[i]);
                acc += dr * dl * K.values(i, j);
            }
        // (1/2) sum over ordered pairs = sum over i<j
        return acc * hd * hd;
    }
    for (std::int64_t i = 0; i < N; ++i)
        for (std::int64_t j = i + 1; j < N; ++j) {
            const double da = std::pow(rho.values[j], m - 1.0) - std::pow(rho.values[i], m - 1.0);
            const double db = std::pow(rho.values[j], m) - std::pow(rho.values[i], m);
            acc += da * db * K.values(i, j);
        }
    return m / (m - 1.0) * acc * hd * hd;
}

}  // namespace fpme
