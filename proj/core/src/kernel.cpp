#include "fpme/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

namespace fpme {

namespace {

constexpr double kPi = std::numbers::pi;

// 32-point Gauss-Legendre rule on [-1,1], computed once by Newton iteration.
struct GaussLegendre {
    std::array<double, 32> x{}, w{};
    GaussLegendre() {
        const int n = 32;
        for (int i = 0; i < n / 2; ++i) {
            double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = t;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = n * (t * p1 - p0) / (t * t - 1.0);
                const double dt = p1 / dp;
                t -= dt;
                if (std::abs(dt) < 1e-16) break;
            }
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (t * p1 - p0) / (t * t - 1.0);
            x[i] = -t;
            x[n - 1 - i] = t;
            w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
    }
};
const GaussLegendre kGL;

// integral_a^b cos(phi)^q dphi for 0 <= a <= b <= pi/2
double integrate_cos_pow(double a, double b, double q) {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double s = 0.0;
    for (int i = 0; i < 32; ++i) s += kGL.w[i] * std::pow(std::cos(mid + half * kGL.x[i]), q);
    return half * s;
}

// sum_{k=M}^inf (k+c)^{-p} by Euler-Maclaurin through the B6 term; M+c > 0.
double em_tail(double M, double c, double p) {
    const double a = M + c;
    double s = std::pow(a, 1.0 - p) / (p - 1.0);
    s += 0.5 * std::pow(a, -p);
    s += (p / 12.0) * std::pow(a, -p - 1.0);
    s -= (p * (p + 1) * (p + 2) / 720.0) * std::pow(a, -p - 3.0);
    s += (p * (p + 1) * (p + 2) * (p + 3) * (p + 4) / 30240.0) * std::pow(a, -p - 5.0);
    return s;
}

// one-sided column tail sum_{k=M}^inf (c^2 + (x+k)^2)^{-p/2}
double column_tail(double c, double x, double M, double p) {
    const double A = M + x;  // integrate (c^2+u^2)^{-p/2} over u >= A
    const double ac = std::abs(c);
    double integral;
    if (ac < 1e-14) {
        integral = std::pow(A, 1.0 - p) / (p - 1.0);
    } else {
        integral = std::pow(ac, 1.0 - p) * integrate_cos_pow(std::atan(A / ac), kPi / 2, p - 2.0);
    }
    const double r2 = c * c + A * A;
    const double g = std::pow(r2, -0.5 * p);
    const double g1 = -p * A * std::pow(r2, -0.5 * p - 1.0);
    const double g3 = 3.0 * p * (p + 2) * A * std::pow(r2, -0.5 * p - 2.0) -
                      p * (p + 2) * (p + 4) * A * A * A * std::pow(r2, -0.5 * p - 3.0);
    return integral + 0.5 * g - g1 / 12.0 + g3 / 720.0;
}

// wrap a coordinate difference into [-1/2, 1/2]
double wrap_centered(double x) {
    x -= std::floor(x);
    return x > 0.5 ? x - 1.0 : x;
}

int thread_budget() {
    if (const char* env = std::getenv("FPME_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return std::min(v, 64);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

}  // namespace

namespace detail {

double lattice_sum_1d(double x, double p, int R, bool tail) {
    x = wrap_centered(x);
    double s = 0.0;
    for (int k = -R; k <= R; ++k) s += std::pow(std::abs(x + k), -p);
    if (tail) s += em_tail(R + 1.0, x, p) + em_tail(R + 1.0, -x, p);
    return s;
}

double lattice_sum_2d(double x0, double x1, double p, int R, bool tail) {
    x0 = wrap_centered(x0);
    x1 = wrap_centered(x1);
    double s = 0.0;
    for (int k0 = -R; k0 <= R; ++k0) {
        const double c = x0 + k0;
        for (int k1 = -R; k1 <= R; ++k1) {
            const double u = x1 + k1;
            s += std::pow(c * c + u * u, -0.5 * p);
        }
    }
    if (!tail) return s;
    // columns |k0| <= R miss |k1| > R
    for (int k0 = -R; k0 <= R; ++k0) {
        const double c = x0 + k0;
        s += column_tail(c, x1, R + 1.0, p) + column_tail(c, -x1, R + 1.0, p);
    }
    // |k0| > R, all k1: Poisson summation reduces the inner lattice sum to its
    // integral, B |c|^{1-p}, up to O(exp(-2 pi |c|)) which is negligible at R >= 1
    const double B = std::sqrt(kPi) * std::tgamma(0.5 * (p - 1.0)) / std::tgamma(0.5 * p);
    s += B * (em_tail(R + 1.0, x0, p - 1.0) + em_tail(R + 1.0, -x0, p - 1.0));
    return s;
}

double tail_bound(int dim, double p, int R) {
    const double a = R - 0.5 > 0.5 ? R - 0.5 : 0.5;
    if (dim == 1) return 2.0 * std::pow(a, 1.0 - p) / (p - 1.0);
    // complement of the square of half-width a
    return 8.0 * std::pow(a, 2.0 - p) / (p - 2.0) * integrate_cos_pow(0.0, kPi / 4, p - 2.0);
}

}  // namespace detail

double fractional_constant(int dim, double sigma) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("fractional_constant: unsupported dimension");
    if (!(sigma > 0.0 && sigma < 1.0))
        throw std::invalid_argument("fractional_constant: sigma must lie in (0,1)");
    // |Gamma(-sigma)| = Gamma(1-sigma)/sigma
    const double abs_gamma = std::tgamma(1.0 - sigma) / sigma;
    return std::pow(4.0, sigma) * std::tgamma(0.5 * dim + sigma) /
           (std::pow(kPi, 0.5 * dim) * abs_gamma);
}

double periodized_kernel(std::span<const double> delta, double sigma, const KernelConfig& cfg) {
    const int dim = static_cast<int>(delta.size());
    if (dim != 1 && dim != 2) throw std::invalid_argument("periodized_kernel: unsupported dimension");
    if (!(sigma > 0.0 && sigma < 1.0))
        throw std::invalid_argument("periodized_kernel: sigma must lie in (0,1)");
    if (cfg.truncation_radius < 1)
        throw std::invalid_argument("periodized_kernel: truncation radius must be >= 1");
    double wrapped_norm = 0.0;
    for (int k = 0; k < dim; ++k) {
        const double w = wrap_centered(delta[k]);
        wrapped_norm += w * w;
    }
    if (wrapped_norm == 0.0)
        throw std::invalid_argument("periodized_kernel: singular at delta = 0 mod Z^d");
    const double p = dim + 2.0 * sigma;
    const double raw = dim == 1
                           ? detail::lattice_sum_1d(delta[0], p, cfg.truncation_radius, cfg.tail_correction)
                           : detail::lattice_sum_2d(delta[0], delta[1], p, cfg.truncation_radius,
                                                    cfg.tail_correction);
    return fractional_constant(dim, sigma) * raw;
}

KernelMatrix kernel_matrix(const GridSpec& grid, double sigma, const KernelConfig& cfg) {
    KernelMatrix K;
    K.grid = grid;
    K.sigma = sigma;
    K.config = cfg;
    const std::int64_t N = grid.cells;

    // translation invariance: one value per wrapped index difference; the
    // mirrored difference carries the identical value by evenness, so only the
    // canonical representative is evaluated and the mirror is copied bit-exact
    Vector stencil = Vector::Zero(N);
    auto mirror = [&](std::int64_t r) {
        const auto c = grid.coords(r);
        const int m0 = (grid.n - c[0]) % grid.n;
        const int m1 = grid.dim == 2 ? (grid.n - c[1]) % grid.n : 0;
        return grid.index(m0, m1);
    };
    auto fill = [&](std::int64_t lo, std::int64_t hi) {
        std::array<double, 2> delta{};
        for (std::int64_t r = lo; r < hi; ++r) {
            if (r == 0 || mirror(r) < r) continue;
            const auto c = grid.coords(r);
            delta[0] = c[0] * grid.h;
            delta[1] = c[1] * grid.h;
            stencil[r] = periodized_kernel(std::span<const double>(delta.data(), grid.dim), sigma, cfg);
        }
    };
    const int nt = static_cast<int>(std::min<std::int64_t>(thread_budget(), N));
    if (nt <= 1 || N < 64) {
        fill(0, N);
    } else {
        std::vector<std::thread> pool;
        const std::int64_t chunk = (N + nt - 1) / nt;
        for (int t = 0; t < nt; ++t)
            pool.emplace_back(fill, t * chunk, std::min<std::int64_t>((t + 1) * chunk, N));
        for (auto& th : pool) th.join();
    }
    for (std::int64_t r = 1; r < N; ++r)
        if (mirror(r) < r) stencil[r] = stencil[mirror(r)];

    K.values = Matrix::Zero(N, N);
    for (std::int64_t i = 0; i < N; ++i) {
        const auto ci = grid.coords(i);
        for (std::int64_t j = 0; j < N; ++j) {
            if (i == j) continue;
            const auto cj = grid.coords(j);
            const int d0 = ((ci[0] - cj[0]) % grid.n + grid.n) % grid.n;
            const int d1 = grid.dim == 2 ? ((ci[1] - cj[1]) % grid.n + grid.n) % grid.n : 0;
            K.values(i, j) = stencil[grid.index(d0, d1)];
        }
    }
    return K;
}

double comp_estimate_constant(const KernelMatrix& K) {
    const GridSpec& g = K.grid;
    const double hd = g.cell_volume();
    double sup = 0.0;
    for (std::int64_t i = 0; i < g.cells; ++i) {
        double row = 0.0;
        for (std::int64_t j = 0; j < g.cells; ++j) {
            if (i == j) continue;
            const double d = torus_distance(g, i, j);
            row += d * d * K.values(i, j) * hd;
        }
        sup = std::max(sup, row);
    }
    return std::sqrt(2.0 * sup);
}

NodeField apply_fractional_operator(const NodeField& f, const KernelMatrix& K) {
    if (!(f.grid == K.grid)) throw std::invalid_argument("apply_fractional_operator: grid mismatch");
    const double hd = f.grid.cell_volume();
    NodeField out = NodeField::zero(f.grid);
    // (L f)_i = sum_j (f_i - f_j) K_ij h^d, fixed accumulation order
    out.values = (f.values.cwiseProduct(K.values.rowwise().sum()) - K.values * f.values) * hd;
    return out;
}

}  // namespace fpme
