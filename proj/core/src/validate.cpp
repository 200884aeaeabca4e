#include "fpme/validate.hpp"

#include "fpme/action.hpp"
#include "fpme/grid.hpp"
#include "fpme/jko.hpp"
#include "fpme/kernel.hpp"
#include "fpme/means.hpp"
#include "fpme/oracles.hpp"
#include "fpme/transport.hpp"
#include "fpme/wasserstein1.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace fpme {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double measured, double bound) {
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << "measured " << measured << " vs bound " << bound;
    return s.str();
}

DensityField random_density(const GridSpec& g, std::mt19937_64& rng, double floor = 0.05) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vector v(g.cells);
    for (std::int64_t i = 0; i < g.cells; ++i) v[i] = floor + u(rng);
    return normalize(DensityField{g, std::move(v)});
}

}  // namespace

std::vector<CheckResult> run_validation(const ValidateOptions& opts) {
    std::vector<CheckResult> results;
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto push = [&](const std::string& name, bool pass, const std::string& detail) {
        results.push_back({name, pass, detail});
    };

    const int samples = opts.quick ? 500 : 5000;
    const double ms[4] = {0.5, 1.0, 1.5, 2.0};

    // --- theta_m algebra ---
    {
        double worst = 0.0;
        for (double m : ms)
            for (int s = 0; s < samples; ++s) {
                const double a = 0.05 + 10.0 * unit(rng);
                const double b = 0.05 + 10.0 * unit(rng);
                const double th = theta_m(a, b, m);
                worst = std::max(worst, std::abs(th - theta_m(b, a, m)));                  // symmetry
                const double lam = 0.5 + 2.0 * unit(rng);                                  // homogeneity
                worst = std::max(worst, std::abs(theta_m(lam * a, lam * b, m) - lam * th) /
                                            std::max(1.0, lam * th));
                const double lo = std::min(a, b), hi = std::max(a, b);                     // mean bounds
                worst = std::max(worst, std::max(lo - th, th - hi));
                worst = std::max(worst, th - 0.5 * (a + b));
                const double chain =                                                        // chain identity
                    th * (u_m_prime(a, m) - u_m_prime(b, m)) -
                    (std::pow(a, m) - std::pow(b, m));
                worst = std::max(worst, std::abs(chain));
            }
        push("theta: symmetry/homogeneity/bounds/chain", worst <= 1e-11, fmt(worst, 1e-11));
    }
    {
        double worst = 0.0;  // concavity via midpoints, monotonicity in m and arguments
        for (int s = 0; s < samples; ++s) {
            const double s1 = 0.05 + 5.0 * unit(rng), t1 = 0.05 + 5.0 * unit(rng);
            const double s2 = 0.05 + 5.0 * unit(rng), t2 = 0.05 + 5.0 * unit(rng);
            for (double m : ms) {
                const double mid = theta_m(0.5 * (s1 + s2), 0.5 * (t1 + t2), m);
                worst = std::max(worst, 0.5 * (theta_m(s1, t1, m) + theta_m(s2, t2, m)) - mid);
                worst = std::max(worst, theta_m(std::min(s1, s2), t1, m) - theta_m(std::max(s1, s2), t1, m));
            }
            worst = std::max(worst, theta_m(s1, t1, 0.5) - theta_m(s1, t1, 1.0));
            worst = std::max(worst, theta_m(s1, t1, 1.0) - theta_m(s1, t1, 1.5));
            worst = std::max(worst, theta_m(s1, t1, 1.5) - theta_m(s1, t1, 2.0));
        }
        push("theta: concavity and monotonicity", worst <= 1e-11, fmt(worst, 1e-11));
        double bd = 0.0;  // boundary values
        for (double m : {0.5, 1.0}) bd = std::max(bd, std::abs(theta_m(0.0, 3.0, m)));
        for (double m : {1.5, 2.0})
            bd = std::max(bd, std::abs(theta_m(0.0, 3.0, m) - (m - 1.0) / m * 3.0));
        push("theta: boundary values", bd <= 1e-14, fmt(bd, 1e-14));
    }

    // --- kernel ---
    {
        const double c1 = std::abs(fractional_constant(1, 0.5) - 1.0 / kPi);
        const double k_half = std::abs(periodized_kernel(std::array{0.5}, 0.5,
                                                         {.truncation_radius = 64}) - kPi);
        push("kernel: C(1,1/2) = 1/pi", c1 <= 1e-10, fmt(c1, 1e-10));
        push("kernel: K(1/2) = pi (sigma=1/2)", k_half <= 1e-6, fmt(k_half, 1e-6));

        const GridSpec g = make_grid(1, opts.quick ? 32 : 64);
        const KernelMatrix K = kernel_matrix(g, 0.5);
        double sym = (K.values - K.values.transpose()).cwiseAbs().maxCoeff();
        push("kernel: exact symmetry", sym == 0.0, fmt(sym, 0.0));
        double closed = 0.0;  // d=1 sigma=1/2 closed form pi / sin^2(pi x)
        for (std::int64_t j = 1; j < g.cells; ++j) {
            const double x = j * g.h;
            closed = std::max(closed, std::abs(K.values(0, j) - kPi / std::pow(std::sin(kPi * x), 2)) /
                                          (kPi / std::pow(std::sin(kPi * x), 2)));
        }
        push("kernel: closed-form curve (rel)", closed <= 1e-8, fmt(closed, 1e-8));
        push("kernel: strict positivity", [&] {
            for (std::int64_t i = 0; i < g.cells; ++i)
                for (std::int64_t j = 0; j < g.cells; ++j)
                    if (i != j && !(K.values(i, j) > 0.0)) return false;
            return true;
        }(), "all off-diagonal weights positive");

        // duality identity
        const double hd = g.cell_volume();
        double dual = 0.0;
        for (int s = 0; s < (opts.quick ? 10 : 100); ++s) {
            NodeField phi = NodeField::zero(g);
            PairField V(g);
            for (std::int64_t i = 0; i < g.cells; ++i) phi.values[i] = unit(rng) - 0.5;
            for (std::int64_t p = 0; p < V.upper.size(); ++p) V.upper[p] = unit(rng) - 0.5;
            const NodeField div = discrete_divergence(V, K);
            const PairField grad = discrete_gradient(phi);
            double lhs = phi.values.dot(div.values) * hd;
            double rhs = 0.0;
            std::int64_t p = 0;
            for (std::int64_t i = 0; i < g.cells; ++i)
                for (std::int64_t j = i + 1; j < g.cells; ++j, ++p)
                    rhs += grad.upper[p] * V.upper[p] * K.values(i, j) * hd * hd;
            dual = std::max(dual, std::abs(lhs + rhs));
        }
        push("continuity: duality identity", dual <= 1e-12, fmt(dual, 1e-12));

        // action probes on the same grid
        DensityField rho = random_density(g, rng);
        PairField V(g);
        for (std::int64_t p = 0; p < V.upper.size(); ++p) V.upper[p] = unit(rng) - 0.5;
        const double a1 = action(rho, V, K, 2.0).value;
        PairField V2 = V;
        V2.upper *= 2.0;
        const double homo2 = std::abs(action(rho, V2, K, 2.0).value - 4.0 * a1) / (4.0 * a1);
        push("action: 2-homogeneity in V", homo2 <= 1e-12, fmt(homo2, 1e-12));
        DensityField rho_s = rho;
        rho_s.values *= 3.0;
        V2.upper = 3.0 * V.upper;
        const double homo1 =
            std::abs(action(rho_s, V2, K, 2.0).value - 3.0 * a1) / (3.0 * a1);
        push("action: joint 1-homogeneity", homo1 <= 1e-12, fmt(homo1, 1e-12));
        DensityField rho_b = random_density(g, rng);
        PairField V_b(g);
        for (std::int64_t p = 0; p < V_b.upper.size(); ++p) V_b.upper[p] = unit(rng) - 0.5;
        double convex_gap = -1e300;
        for (double t : {0.25, 0.5, 0.75}) {
            DensityField rho_t{g, (1 - t) * rho.values + t * rho_b.values};
            PairField V_t(g);
            V_t.upper = (1 - t) * V.upper + t * V_b.upper;
            convex_gap = std::max(convex_gap,
                                  action(rho_t, V_t, K, 1.5).value -
                                      ((1 - t) * action(rho, V, K, 1.5).value +
                                       t * action(rho_b, V_b, K, 1.5).value));
        }
        push("action: joint convexity probe", convex_gap <= 1e-10, fmt(convex_gap, 1e-10));

        // transport estimate and its W1 consequence
        const GridSpec gs = make_grid(1, 16);
        const KernelMatrix Ks = kernel_matrix(gs, 0.5);
        const double C = comp_estimate_constant(Ks);
        double worst_gap = -1e300;
        for (int s = 0; s < (opts.quick ? 5 : 50); ++s) {
            DensityField r = random_density(gs, rng);
            PairField W(gs);
            for (std::int64_t p = 0; p < W.upper.size(); ++p) W.upper[p] = unit(rng) - 0.5;
            auto [lhs, rhs] = transport_estimate(r, W, Ks, 2.0);
            worst_gap = std::max(worst_gap, lhs - rhs);
        }
        push("transport estimate: lhs <= C sqrt(A)", worst_gap <= 0.0, fmt(worst_gap, 0.0));

        SolverConfig scfg;
        scfg.time_steps = opts.quick ? 8 : 16;
        double w1_gap = -1e300;
        for (int s = 0; s < (opts.quick ? 2 : 5); ++s) {
            DensityField r0 = random_density(gs, rng);
            DensityField r1 = random_density(gs, rng);
            const double w1 = w1_kantorovich(r0, r1);
            const double W = solve_distance(r0, r1, Ks, 2.0, scfg).distance;
            w1_gap = std::max(w1_gap, w1 - 0.5 * C * W);
        }
        push("W1 <= (C/2) W", w1_gap <= 1e-12, fmt(w1_gap, 1e-12));

        // metric axioms
        DensityField a = random_density(gs, rng);
        DensityField b = random_density(gs, rng);
        DensityField c = random_density(gs, rng);
        const double dzero = solve_distance(a, a, Ks, 2.0, scfg).distance;
        push("metric: W(a,a) ~ 0", dzero <= 1e-6, fmt(dzero, 1e-6));
        const double dab = solve_distance(a, b, Ks, 2.0, scfg).distance;
        const double dba = solve_distance(b, a, Ks, 2.0, scfg).distance;
        push("metric: symmetry", std::abs(dab - dba) <= 1e-4, fmt(std::abs(dab - dba), 1e-4));
        const double margin = triangle_inequality_probe(a, b, c, Ks, 2.0, scfg);
        push("metric: triangle margin", margin >= -1e-4, fmt(margin, -1e-4));

        // rescaling invariance
        auto [wT, w1ref] = rescaling_check(a, b, Ks, 2.0, scfg, 2.0);
        push("rescaling: T=2 agrees", std::abs(wT - w1ref) <= 1e-4, fmt(std::abs(wT - w1ref), 1e-4));

        // constant-speed profile
        TransportResult geo = solve_distance(a, b, Ks, 2.0, scfg);
        push("geodesic: constant-speed flatness", speed_profile_flatness(geo) <= 0.02,
             fmt(speed_profile_flatness(geo), 0.02));
    }

    // --- JKO and oracles ---
    {
        const GridSpec g = make_grid(1, opts.quick ? 32 : 64);
        const KernelMatrix K = kernel_matrix(g, 0.5);
        Vector vals(g.cells);
        for (std::int64_t i = 0; i < g.cells; ++i)
            vals[i] = 1.0 + 0.5 * std::cos(2.0 * kPi * i * g.h);
        DensityField cosine{g, vals};

        JkoConfig jcfg;
        jcfg.tau = 2e-3;
        jcfg.steps = opts.quick ? 3 : 5;
        jcfg.m = 2.0;
        Trajectory traj = jko_flow(cosine, K, jcfg);
        double worst = -1e300;
        for (std::size_t s = 0; s < traj.steps.size(); ++s) {
            const auto& d = traj.steps[s];
            worst = std::max(worst,
                             d.entropy_after + d.w2_step / (2.0 * jcfg.tau) - d.entropy_before);
        }
        push("jko: per-step energy inequality", worst <= 1e-6, fmt(worst, 1e-6));

        DensityField uniform{g, Vector::Ones(g.cells)};
        auto [fixed, diag] = jko_step(uniform, K, 2.0, jcfg);
        const double drift = (fixed.values - uniform.values).lpNorm<Eigen::Infinity>();
        push("jko: uniform density is a fixed point", drift <= 1e-6, fmt(drift, 1e-6));

        // oracle cross-checks
        const DensityField rk = integrate_semidiscrete(cosine, 1.0, K, 0.05);
        const DensityField sp = spectral_heat_flow(cosine, 0.5, 0.05);
        const double gap =
            (rk.values - sp.values).cwiseAbs().sum() * g.cell_volume();
        push("oracles: RK4 vs spectral (m=1)", gap <= 0.02, fmt(gap, 0.02));

        const NodeField rhs1 = semidiscrete_rhs(cosine, 1.0, K);
        const NodeField lap = apply_fractional_operator(NodeField{g, cosine.values}, K);
        const double ident = (rhs1.values + lap.values).lpNorm<Eigen::Infinity>();
        push("oracles: m=1 rhs equals -L rho", ident <= 1e-12, fmt(ident, 1e-12));

        const DensityField s1 = spectral_heat_flow(spectral_heat_flow(cosine, 0.5, 0.02), 0.5, 0.03);
        const DensityField s2 = spectral_heat_flow(cosine, 0.5, 0.05);
        const double semigroup = (s1.values - s2.values).lpNorm<Eigen::Infinity>();
        push("oracles: spectral semigroup property", semigroup <= 1e-12, fmt(semigroup, 1e-12));
    }

    return results;
}

}  // namespace fpme
