#include "fpme/means.hpp"
#include "fpme/kernel.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fpme;

namespace {

// 64-node Gauss-Legendre quadrature of the integral representation of theta_m;
// independent of the closed-form evaluation path
double theta_by_quadrature(double s, double t, double m) {
    static const auto rule = [] {
        std::array<std::pair<double, double>, 64> r{};
        const int n = 64;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            r[i] = {0.5 * (x + 1.0), 1.0 / ((1.0 - x * x) * dp * dp)};
        }
        return r;
    }();
    double acc = 0.0;
    for (const auto& [alpha, w] : rule) {
        double val;
        if (m == 1.0)
            val = std::pow(s, alpha) * std::pow(t, 1.0 - alpha);
        else
            val = std::pow((1.0 - alpha) * std::pow(s, m - 1.0) + alpha * std::pow(t, m - 1.0),
                           1.0 / (m - 1.0));
        acc += w * val;
    }
    return acc;
}

}  // namespace

TEST_CASE("theta_m frozen values") {
    CHECK(theta_m(3.0, 3.0, 0.5) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(theta_m(3.0, 3.0, 1.0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(theta_m(1.0, 3.0, 2.0) == doctest::Approx(2.0).epsilon(1e-14));   // (1/2)(1-9)/(1-3)
    CHECK(theta_m(0.0, 4.0, 2.0) == doctest::Approx(2.0).epsilon(1e-14));   // ((m-1)/m) t
    CHECK(theta_m(0.0, 4.0, 1.0) == 0.0);
    CHECK(theta_m(0.0, 4.0, 0.5) == 0.0);
    CHECK(theta_m(0.0, 0.0, 1.5) == 0.0);
    CHECK(theta_m(std::exp(1.0), 1.0, 1.0) ==
          doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
    CHECK_THROWS_AS(theta_m(-1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(theta_m(1.0, 1.0, 2.5), std::invalid_argument);
}

TEST_CASE("theta_m properties on samples") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.05, 10.0);
    const double ms[4] = {0.5, 1.0, 1.5, 2.0};
    for (int trial = 0; trial < 4000; ++trial) {
        const double s = u(rng), t = u(rng);
        for (double m : ms) {
            const double th = theta_m(s, t, m);
            CHECK(th == theta_m(t, s, m));                               // symmetry
            const double lam = 0.25 + u(rng) / 4;
            CHECK(theta_m(lam * s, lam * t, m) ==
                  doctest::Approx(lam * th).epsilon(1e-12));             // homogeneity
            CHECK(th >= std::min(s, t) - 1e-12);                         // mean bounds
            CHECK(th <= std::max(s, t) + 1e-12);
            CHECK(th <= 0.5 * (s + t) + 1e-12);
            // chain identity behind the weak form
            const double lhs = th * (u_m_prime(s, m) - u_m_prime(t, m));
            CHECK(lhs == doctest::Approx(std::pow(s, m) - std::pow(t, m)).epsilon(1e-11));
        }
        // monotone in m and in each argument
        CHECK(theta_m(s, t, 0.5) <= theta_m(s, t, 1.0) + 1e-12);
        CHECK(theta_m(s, t, 1.0) <= theta_m(s, t, 1.5) + 1e-12);
        CHECK(theta_m(s, t, 1.5) <= theta_m(s, t, 2.0) + 1e-12);
        const double s2 = s + u(rng);
        for (double m : ms) CHECK(theta_m(s, t, m) <= theta_m(s2, t, m) + 1e-12);
    }
}

TEST_CASE("theta_m concavity via midpoints") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(0.01, 5.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const double s1 = u(rng), t1 = u(rng), s2 = u(rng), t2 = u(rng);
        for (double m : {0.5, 1.0, 1.5, 2.0}) {
            const double mid = theta_m(0.5 * (s1 + s2), 0.5 * (t1 + t2), m);
            CHECK(mid >= 0.5 * theta_m(s1, t1, m) + 0.5 * theta_m(s2, t2, m) - 1e-12);
        }
    }
}

TEST_CASE("theta_m agrees with its integral representation") {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int trial = 0; trial < 300; ++trial) {
        const double s = u(rng), t = u(rng);
        for (double m : {0.5, 1.0, 1.5, 2.0})
            CHECK(theta_m(s, t, m) == doctest::Approx(theta_by_quadrature(s, t, m)).epsilon(1e-8));
    }
}

TEST_CASE("theta_m near the diagonal stays smooth") {
    // the series branch must match the closed form across the switch threshold
    for (double m : {0.5, 1.0, 1.5, 2.0})
        for (double gap : {1e-7, 1e-9, 1e-11, 0.0}) {
            const double s = 2.0, t = 2.0 * (1.0 + gap);
            const double th = theta_m(s, t, m);
            CHECK(th == doctest::Approx(0.5 * (s + t)).epsilon(1e-8));
            CHECK(th <= std::max(s, t) + 1e-15);
        }
}

TEST_CASE("theta_m partials") {
    for (double s : {0.3, 1.0, 4.2})
        for (double t : {0.7, 2.5}) {
            const auto [ds, dt] = theta_m_partials(s, t, 2.0);
            CHECK(ds == doctest::Approx(0.5).epsilon(1e-12));  // theta_2 = (s+t)/2
            CHECK(dt == doctest::Approx(0.5).epsilon(1e-12));
        }

    std::mt19937_64 rng(45);
    std::uniform_real_distribution<double> u(0.2, 5.0);
    for (int trial = 0; trial < 400; ++trial) {
        const double s = u(rng), t = u(rng), m = 0.5 + 1.5 * std::generate_canonical<double, 53>(rng);
        const auto [ds, dt] = theta_m_partials(s, t, m);
        const auto [dt_sym, ds_sym] = theta_m_partials(t, s, m);
        CHECK(ds == doctest::Approx(ds_sym).epsilon(1e-12));  // symmetry of theta

        const double step = 1e-6 * std::max(s, 1.0);
        const double fd_s = (theta_m(s + step, t, m) - theta_m(s - step, t, m)) / (2 * step);
        const double fd_t = (theta_m(s, t + step, m) - theta_m(s, t - step, m)) / (2 * step);
        CHECK(ds == doctest::Approx(fd_s).epsilon(1e-6));
        CHECK(dt == doctest::Approx(fd_t).epsilon(1e-6));
    }
    CHECK_THROWS_AS(theta_m_partials(0.0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("entropy density and derivative") {
    CHECK(u_m(3.0, 2.0) == doctest::Approx(9.0).epsilon(1e-15));
    CHECK(u_m_prime(3.0, 2.0) == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(u_m(1.0, 1.0) == 0.0);
    CHECK(u_m(0.0, 1.0) == 0.0);  // 0 log 0 = 0
    CHECK(u_m(0.0, 0.5) == 0.0);
    CHECK_THROWS_AS(u_m_prime(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(u_m_prime(0.0, 0.5), std::invalid_argument);
}

TEST_CASE("entropy functional") {
    const GridSpec g = make_grid(1, 2);
    DensityField uniform{g, Vector::Ones(2)};
    CHECK(entropy(uniform, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(entropy(uniform, 2.0) == doctest::Approx(1.0).epsilon(1e-15));

    DensityField spike{g, Vector::Zero(2)};
    spike.values << 2.0, 0.0;
    CHECK(entropy(spike, 2.0) == doctest::Approx(2.0).epsilon(1e-15));

    // Jensen: entropy above the uniform value, with the sign carried by 1/(m-1)
    std::mt19937_64 rng(46);
    const GridSpec g16 = make_grid(1, 16);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Vector v(16);
        for (int i = 0; i < 16; ++i) v[i] = u(rng);
        const DensityField rho = normalize(DensityField{g16, v});
        DensityField flat{g16, Vector::Ones(16)};
        for (double m : {0.5, 1.5, 2.0})
            CHECK(entropy(rho, m) >= entropy(flat, m) - 1e-12);
    }
}

TEST_CASE("fisher information") {
    const GridSpec g = make_grid(1, 2);
    const KernelMatrix K = kernel_matrix(g, 0.5);
    DensityField uniform{g, Vector::Ones(2)};
    for (double m : {0.5, 1.0, 1.5, 2.0})
        CHECK(fisher_information(uniform, m, K) == doctest::Approx(0.0).epsilon(1e-15));

    // two-cell hand expansion for m = 1
    DensityField rho{g, Vector::Zero(2)};
    rho.values << 0.5, 1.5;
    const double h = 0.5;
    const double expected =
        (1.5 - 0.5) * (std::log(1.5) - std::log(0.5)) * K.values(0, 1) * h * h;
    CHECK(fisher_information(rho, 1.0, K) == doctest::Approx(expected).epsilon(1e-13));

    // nonnegativity across m
    std::mt19937_64 rng(47);
    const GridSpec g8 = make_grid(1, 8);
    const KernelMatrix K8 = kernel_matrix(g8, 0.5);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        Vector v(8);
        for (int i = 0; i < 8; ++i) v[i] = u(rng);
        const DensityField r = normalize(DensityField{g8, v});
        for (double m : {0.5, 1.0, 1.5, 2.0}) CHECK(fisher_information(r, m, K8) >= 0.0);
    }

    DensityField vac{g, Vector::Zero(2)};
    vac.values << 2.0, 0.0;
    CHECK_THROWS_AS(fisher_information(vac, 1.0, K), std::invalid_argument);
}

TEST_CASE("nonlinearity critical exponent") {
    Nonlinearity nl{.m = 0.5, .sigma = 0.2, .dim = 1};
    CHECK(nl.m_star() == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(nl.below_mass_conserving_range());
    Nonlinearity ok{.m = 0.5, .sigma = 0.5, .dim = 1};
    CHECK(ok.m_star() == 0.0);
    CHECK(!ok.below_mass_conserving_range());
}
