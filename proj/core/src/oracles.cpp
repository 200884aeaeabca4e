#include "fpme/oracles.hpp"

#include "fpme/means.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <vector>

namespace fpme {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

int signed_frequency(int k, int n) { return k <= n / 2 ? k : k - n; }
}  // namespace

SpectralPlan make_spectral_plan(const GridSpec& grid, double sigma) {
    if (!(sigma > 0.0 && sigma < 1.0))
        throw std::invalid_argument("make_spectral_plan: sigma must lie in (0,1)");
    SpectralPlan plan;
    plan.grid = grid;
    plan.sigma = sigma;
    plan.symbol = Vector::Zero(grid.cells);
    for (std::int64_t i = 0; i < grid.cells; ++i) {
        const auto c = grid.coords(i);
        const double k0 = signed_frequency(c[0], grid.n);
        const double k1 = grid.dim == 2 ? signed_frequency(c[1], grid.n) : 0.0;
        const double ksq = k0 * k0 + k1 * k1;
        plan.symbol[i] = ksq == 0.0 ? 0.0 : std::pow(kTwoPi * kTwoPi * ksq, sigma);
    }
    return plan;
}

DensityField spectral_heat_flow(const DensityField& rho0, double sigma, double t) {
    if (t < 0.0) throw std::invalid_argument("spectral_heat_flow: negative time");
    const GridSpec& g = rho0.grid;
    const SpectralPlan plan = make_spectral_plan(g, sigma);
    const int n = g.n;
    const std::int64_t N = g.cells;

    std::vector<double> in(rho0.values.data(), rho0.values.data() + N);
    const std::int64_t nc = g.dim == 1 ? n / 2 + 1 : static_cast<std::int64_t>(n) * (n / 2 + 1);
    std::vector<fftw_complex> coef(nc);
    fftw_plan fwd, bwd;
    if (g.dim == 1) {
        fwd = fftw_plan_dft_r2c_1d(n, in.data(), coef.data(), FFTW_ESTIMATE);
    } else {
        fwd = fftw_plan_dft_r2c_2d(n, n, in.data(), coef.data(), FFTW_ESTIMATE);
    }
    fftw_execute(fwd);
    fftw_destroy_plan(fwd);

    // multiply mode k by exp(-|2 pi k|^{2 sigma} t); the k=0 mode is untouched
    if (g.dim == 1) {
        for (int k = 0; k <= n / 2; ++k) {
            const double f = std::exp(-plan.symbol[k] * t);
            coef[k][0] *= f;
            coef[k][1] *= f;
        }
    } else {
        for (int k0 = 0; k0 < n; ++k0)
            for (int k1 = 0; k1 <= n / 2; ++k1) {
                const double f = std::exp(-plan.symbol[g.index(k0, k1)] * t);
                coef[k0 * (n / 2 + 1) + k1][0] *= f;
                coef[k0 * (n / 2 + 1) + k1][1] *= f;
            }
    }

    std::vector<double> out(N);
    if (g.dim == 1) {
        bwd = fftw_plan_dft_c2r_1d(n, coef.data(), out.data(), FFTW_ESTIMATE);
    } else {
        bwd = fftw_plan_dft_c2r_2d(n, n, coef.data(), out.data(), FFTW_ESTIMATE);
    }
    fftw_execute(bwd);
    fftw_destroy_plan(bwd);

    Vector values(N);
    for (std::int64_t i = 0; i < N; ++i) values[i] = out[i] / static_cast<double>(N);
    return DensityField{g, std::move(values)};
}

NodeField semidiscrete_rhs(const DensityField& rho, double m, const KernelMatrix& K) {
    if (!(rho.grid == K.grid)) throw std::invalid_argument("semidiscrete_rhs: grid mismatch");
    validate_exponent(m);
    if (m < 1.0 && rho.values.minCoeff() <= 0.0)
        throw std::invalid_argument("semidiscrete_rhs: vacuum cell with m < 1 (floor the field first)");
    const double hd = rho.grid.cell_volume();
    Vector powered = rho.values.array().pow(m).matrix();
    NodeField out = NodeField::zero(rho.grid);
    out.values = (K.values * powered - powered.cwiseProduct(K.values.rowwise().sum())) * hd;
    return out;
}

double semidiscrete_stable_dt(const DensityField& rho, double m, const KernelMatrix& K) {
    const double hd = rho.grid.cell_volume();
    const double row_max = (K.values.rowwise().sum() * hd).maxCoeff();
    const double slope = m * std::pow(std::max(rho.values.maxCoeff(), 1e-300), m - 1.0);
    return 1.0 / (2.0 * slope * row_max);
}

DensityField integrate_semidiscrete(const DensityField& rho0, double m, const KernelMatrix& K,
                                    double t_final, double dt) {
    if (t_final < 0.0) throw std::invalid_argument("integrate_semidiscrete: negative horizon");
    if (t_final == 0.0) return rho0;
    if (dt <= 0.0) dt = semidiscrete_stable_dt(rho0, m, K);
    const int steps = static_cast<int>(std::ceil(t_final / dt - 1e-12));
    const double step = t_final / steps;
    DensityField rho = rho0;
    // intermediate stages may graze zero; clamp them so fractional powers stay real
    const double stage_floor = m < 1.0 ? 1e-10 : 0.0;
    auto f = [&](Vector v) {
        v = v.cwiseMax(stage_floor);
        DensityField tmp{rho.grid, std::move(v)};
        return semidiscrete_rhs(tmp, m, K).values;
    };
    for (int s = 0; s < steps; ++s) {
        const Vector k1 = f(rho.values);
        const Vector k2 = f(rho.values + 0.5 * step * k1);
        const Vector k3 = f(rho.values + 0.5 * step * k2);
        const Vector k4 = f(rho.values + step * k3);
        rho.values += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double mn = rho.values.minCoeff();
        if (mn < -1e-12)
            throw std::runtime_error("integrate_semidiscrete: instability detected (density < -1e-12)");
        if (mn < 0.0) rho.values = rho.values.cwiseMax(0.0);
    }
    return rho;
}

}  // namespace fpme
