#include "fpme/action.hpp"
#include "fpme/means.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fpme;

namespace {

DensityField random_density(const GridSpec& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Vector v(g.cells);
    for (std::int64_t i = 0; i < g.cells; ++i) v[i] = u(rng);
    return normalize(DensityField{g, std::move(v)});
}

PairField random_pairs(const GridSpec& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PairField V(g);
    for (std::int64_t p = 0; p < V.upper.size(); ++p) V.upper[p] = u(rng);
    return V;
}

}  // namespace

TEST_CASE("action basic values") {
    const GridSpec g = make_grid(1, 2);
    const KernelMatrix K = kernel_matrix(g, 0.5);
    DensityField rho{g, Vector::Ones(2)};

    PairField zero(g);
    const ActionValue a0 = action(rho, zero, K, 2.0);
    CHECK(a0.finite);
    CHECK(a0.value == 0.0);

    // two-cell hand expansion: both ordered pairs contribute, A = v^2 K h^2
    PairField V(g);
    const double v = 0.8;
    V.set(0, 1, v);
    const double expect = v * v * K.values(0, 1) * g.h * g.h;  // theta(1,1) = 1
    CHECK(action(rho, V, K, 2.0).value == doctest::Approx(expect).epsilon(1e-14));

    // 2-homogeneity in V
    PairField V2 = V;
    V2.upper *= 2.0;
    CHECK(action(rho, V2, K, 2.0).value ==
          doctest::Approx(4.0 * action(rho, V, K, 2.0).value).epsilon(1e-14));
}

TEST_CASE("action is infinite only on vacuum pairs with momentum") {
    const GridSpec g = make_grid(1, 4);
    const KernelMatrix K = kernel_matrix(g, 0.5);
    DensityField rho{g, Vector::Zero(4)};
    rho.values << 2.0, 2.0, 0.0, 0.0;
    PairField V(g);
    V.set(2, 3, 1.0);  // moves mass across a vacuum pair, theta_1(0,0) = 0
    const ActionValue bad = action(rho, V, K, 1.0);
    CHECK(!bad.finite);

    PairField ok(g);
    ok.set(0, 1, 1.0);
    CHECK(action(rho, ok, K, 1.0).finite);
}

TEST_CASE("action joint homogeneity and convexity") {
    const GridSpec g = make_grid(1, 12);
    const KernelMatrix K = kernel_matrix(g, 0.5);
    std::mt19937_64 rng(17);
    for (double m : {0.5, 1.0, 1.5, 2.0}) {
        DensityField r0 = random_density(g, rng), r1 = random_density(g, rng);
        PairField v0 = random_pairs(g, rng), v1 = random_pairs(g, rng);

        // (rho, V) -> (lam rho, lam V) scales A by lam
        const double lam = 2.75;
        DensityField rs{g, lam * r0.values};
        PairField vs(g);
        vs.upper = lam * v0.upper;
        CHECK(action(rs, vs, K, m).value ==
              doctest::Approx(lam * action(r0, v0, K, m).value).epsilon(1e-12));

        // joint convexity along segments
        const double a0 = action(r0, v0, K, m).value;
        const double a1 = action(r1, v1, K, m).value;
        for (double t : {0.2, 0.5, 0.8}) {
            DensityField rt{g, (1 - t) * r0.values + t * r1.values};
            PairField vt(g);
            vt.upper = (1 - t) * v0.upper + t * v1.upper;
            CHECK(action(rt, vt, K, m).value <= (1 - t) * a0 + t * a1 + 1e-10);
        }
    }
}

TEST_CASE("action gradients match finite differences") {
    const GridSpec g = make_grid(1, 6);
    const KernelMatrix K = kernel_matrix(g, 0.5);
    std::mt19937_64 rng(19);
    for (double m : {1.0, 1.5, 2.0}) {
        DensityField rho = random_density(g, rng);
        PairField V = random_pairs(g, rng);
        auto [grho, gV] = action_gradients(rho, V, K, m);

        CHECK(grho.values.maxCoeff() <= 1e-14);  // action nonincreasing in rho

        for (std::int64_t i = 0; i < g.cells; ++i) {
            const double step = 1e-6;
            DensityField up = rho, dn = rho;
            up.values[i] += step;
            dn.values[i] -= step;
            const double fd =
                (action(up, V, K, m).value - action(dn, V, K, m).value) / (2 * step);
            CHECK(grho.values[i] == doctest::Approx(fd).epsilon(1e-5));
        }
        for (std::int64_t p = 0; p < V.upper.size(); ++p) {
            const double step = 1e-6;
            PairField up = V, dn = V;
            up.upper[p] += step;
            dn.upper[p] -= step;
            const double fd =
                (action(rho, up, K, m).value - action(rho, dn, K, m).value) / (2 * step);
            CHECK(gV.upper[p] == doctest::Approx(fd).epsilon(1e-5));
        }
    }

    PairField zero(g);
    DensityField rho = random_density(g, rng);
    auto [gr, gv] = action_gradients(rho, zero, K, 1.5);
    CHECK(gr.values.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(gv.upper.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("transport estimate") {
    const GridSpec g = make_grid(1, 16);
    const KernelMatrix K = kernel_matrix(g, 0.5);
    std::mt19937_64 rng(23);

    DensityField rho = random_density(g, rng);
    PairField zero(g);
    const auto [l0, r0] = transport_estimate(rho, zero, K, 2.0);
    CHECK(l0 == 0.0);
    CHECK(r0 == 0.0);

    // the estimate holds across random fields, and both sides scale linearly
    for (int s = 0; s < 1000; ++s) {
        DensityField r = random_density(g, rng);
        PairField V = random_pairs(g, rng);
        const auto [lhs, rhs] = transport_estimate(r, V, K, 2.0);
        CHECK(lhs <= rhs * (1.0 + 1e-12));
    }
    DensityField r = random_density(g, rng);
    PairField V = random_pairs(g, rng);
    const auto [lhs1, rhs1] = transport_estimate(r, V, K, 1.5);
    PairField V3(g);
    V3.upper = 3.0 * V.upper;
    const auto [lhs3, rhs3] = transport_estimate(r, V3, K, 1.5);
    CHECK(lhs3 == doctest::Approx(3.0 * lhs1).epsilon(1e-12));
    CHECK(rhs3 == doctest::Approx(3.0 * rhs1).epsilon(1e-12));
}
