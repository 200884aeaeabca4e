#include "fpme/transport.hpp"

#include "fpme/means.hpp"
#include "transport_internal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace fpme {

namespace {

// Euclidean projection onto { x >= lb, sum x = total }
void project_simplex(Vector& x, double total, double lb) {
    const std::int64_t n = x.size();
    Vector z = x.array() - lb;
    const double residual = total - lb * static_cast<double>(n);
    std::vector<double> u(z.data(), z.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, tau = 0.0;
    std::int64_t r = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        css += u[i];
        const double cand = (css - residual) / static_cast<double>(i + 1);
        if (u[i] - cand > 0.0) {
            r = i + 1;
            tau = cand;
        }
    }
    if (r == 0) tau = (css - residual) / static_cast<double>(n);
    for (std::int64_t i = 0; i < n; ++i) x[i] = std::max(z[i] - tau, 0.0) + lb;
}

// weighted graph Laplacian solve L x = b on the mean-zero subspace,
// Jacobi-preconditioned conjugate gradient with warm start
struct LaplacianSolve {
    int iterations = 0;
    double residual = 0.0;  // l-inf of b - L x
};

LaplacianSolve solve_multipliers(const Matrix& W, const Vector& rowsum, const Vector& b_in,
                                 Vector& x, double tol, int max_iter) {
    Vector b = b_in.array() - b_in.mean();
    LaplacianSolve out;
    if (b.lpNorm<Eigen::Infinity>() == 0.0) {
        x.setZero();
        return out;
    }
    auto apply = [&](const Vector& v) -> Vector { return rowsum.cwiseProduct(v) - W * v; };
    Vector invdiag = rowsum.cwiseMax(1e-300).cwiseInverse();
    x.array() -= x.mean();
    Vector r = b - apply(x);
    Vector z = invdiag.cwiseProduct(r);
    z.array() -= z.mean();
    Vector p = z;
    double rz = r.dot(z);
    const double stop = std::max(tol, 1e-15 * b.lpNorm<Eigen::Infinity>());
    for (int it = 0; it < max_iter; ++it) {
        if (r.lpNorm<Eigen::Infinity>() <= stop) break;
        Vector Ap = apply(p);
        const double pAp = p.dot(Ap);
        if (!(pAp > 0.0)) break;
        const double alpha = rz / pAp;
        x += alpha * p;
        r -= alpha * Ap;
        z = invdiag.cwiseProduct(r);
        z.array() -= z.mean();
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
        out.iterations = it + 1;
    }
    x.array() -= x.mean();
    out.residual = (b - apply(x)).lpNorm<Eigen::Infinity>();
    return out;
}

// Shared machinery for the fixed-endpoint distance problem and the
// free-endpoint minimizing-movement subproblem. All momenta are eliminated:
// for fixed node densities the optimal V of each interval solves a weighted
// least-squares problem whose normal equations are the theta-weighted
// Laplacian system above, so the descent runs on node densities only.
struct PathSolver {
    const KernelMatrix& K;
    double m;
    SolverConfig cfg;
    double horizon = 1.0;
    bool free_endpoint = false;
    double tau = 1.0;  // only used when free_endpoint

    int L = 1;
    std::int64_t N = 0;
    double dt = 0.0;
    double hd = 0.0;
    double node_total = 0.0;  // sum of density entries (= 1/h^d at unit mass)
    double lb = 0.0;

    std::vector<Vector> path;     // L+1 node densities
    std::vector<Vector> lambda;   // L multipliers, warm-started across evaluations
    std::vector<double> actions;  // per-interval A values
    double constraint_residual = 0.0;
    int first_free = 1, last_free = 0;  // inclusive range of free nodes

    PathSolver(const KernelMatrix& kernel, double m_, const SolverConfig& c)
        : K(kernel), m(m_), cfg(c) {
        validate_exponent(m_);
        L = std::max(cfg.time_steps, 1);
        N = K.grid.cells;
        dt = horizon / L;
        hd = K.grid.cell_volume();
        lb = m <= 1.0 ? cfg.density_floor : 0.0;
    }

    void set_horizon(double T) {
        horizon = T;
        dt = horizon / L;
    }

    Vector floored(const Vector& v) const { return lb > 0.0 ? v.cwiseMax(lb).eval() : v; }

    void init_endpoints(const Vector& rho0, const Vector& rho1) {
        node_total = rho0.sum();
        path.assign(L + 1, Vector());
        lambda.assign(L, Vector::Zero(N));
        actions.assign(L, 0.0);
        for (int k = 0; k <= L; ++k) {
            const double w = static_cast<double>(k) / L;
            path[k] = (1.0 - w) * rho0 + w * rho1;
            if (lb > 0.0) {
                path[k] = floored(path[k]);
                project_simplex(path[k], node_total, lb);
            }
        }
        first_free = 1;
        last_free = free_endpoint ? L : L - 1;
        if (cfg.init == PathInit::random) perturb_interior();
    }

    void perturb_interior() {
        std::mt19937_64 rng(cfg.init_seed);
        std::uniform_real_distribution<double> u(-0.05, 0.05);
        for (int k = first_free; k <= last_free; ++k) {
            for (std::int64_t i = 0; i < N; ++i) path[k][i] *= 1.0 + u(rng);
            project_simplex(path[k], node_total, lb);
        }
    }

    // objective and, optionally, the gradient w.r.t. the free node densities
    double evaluate(std::vector<Vector>* grad) {
        const int cg_cap = cfg.cg_max_iterations > 0 ? cfg.cg_max_iterations
                                                     : static_cast<int>(8 * N);
        double res = 0.0;
        double total_action = 0.0;
        if (grad) grad->assign(L + 1, Vector::Zero(N));
        Matrix W(N, N);
        for (int k = 1; k <= L; ++k) {
            Vector rb = 0.5 * (path[k - 1] + path[k]);
            if (lb > 0.0) rb = floored(rb);
            W.setZero();
            for (std::int64_t i = 0; i < N; ++i)
                for (std::int64_t j = i + 1; j < N; ++j) {
                    const double w = K.values(i, j) * theta_m(rb[i], rb[j], m);
                    W(i, j) = w;
                    W(j, i) = w;
                }
            Vector rowsum = W.rowwise().sum();
            Vector b = (path[k] - path[k - 1]) / dt;
            auto info = solve_multipliers(W, rowsum, b, lambda[k - 1], cfg.cg_tol, cg_cap);
            res = std::max(res, info.residual);
            const double act = lambda[k - 1].dot(b);
            actions[k - 1] = std::max(act, 0.0);
            total_action += dt * actions[k - 1];
            if (grad) {
                // d(lambda' L lambda)/d(rbar_a) = sum_j (dlambda)^2 K_aj dtheta/ds
                const Vector& lam = lambda[k - 1];
                Vector S = Vector::Zero(N);
                for (std::int64_t i = 0; i < N; ++i)
                    for (std::int64_t j = i + 1; j < N; ++j) {
                        const double dl = lam[i] - lam[j];
                        const double w2 = dl * dl * K.values(i, j);
                        if (w2 == 0.0) continue;
                        const auto [ds, dtp] = theta_m_partials(
                            std::max(rb[i], cfg.density_floor), std::max(rb[j], cfg.density_floor), m);
                        S[i] += w2 * ds;
                        S[j] += w2 * dtp;
                    }
                (*grad)[k] += dt * (-0.5) * S + 2.0 * lam;
                (*grad)[k - 1] += dt * (-0.5) * S - 2.0 * lam;
            }
        }
        constraint_residual = res;
        double obj;
        if (free_endpoint) {
            obj = total_action / (2.0 * tau);
            double ent = 0.0;
            for (std::int64_t i = 0; i < N; ++i) ent += u_m(path[L][i], m);
            obj += ent * hd;
            if (grad) {
                for (int k = 0; k <= L; ++k) (*grad)[k] /= 2.0 * tau;
                for (std::int64_t i = 0; i < N; ++i)
                    (*grad)[L][i] += hd * u_m_prime(std::max(path[L][i], 1e-30), m);
            }
        } else {
            obj = horizon * total_action;
            if (grad)
                for (int k = 0; k <= L; ++k) (*grad)[k] *= horizon;
        }
        return obj;
    }

    // monotone projected gradient descent with Barzilai-Borwein steps and
    // Armijo backtracking on the reduced objective
    TransportResult run() {
        TransportResult out;
        std::vector<Vector> grad;
        double obj = evaluate(&grad);
        std::vector<double> history{obj};
        double alpha = 1.0;
        std::vector<Vector> x_old, g_old;
        const int nfree = last_free - first_free + 1;
        int it = 0;
        bool plateau = false;
        for (; it < cfg.max_iterations && nfree > 0; ++it) {
            if (x_old.empty()) {
                x_old.assign(nfree, Vector());
                g_old.assign(nfree, Vector());
            } else {
                double ss = 0.0, sy = 0.0;
                for (int k = 0; k < nfree; ++k) {
                    const Vector s = path[first_free + k] - x_old[k];
                    const Vector y = grad[first_free + k] - g_old[k];
                    ss += s.dot(s);
                    sy += s.dot(y);
                }
                if (sy > 1e-300) alpha = std::clamp(ss / sy, 1e-14, 1e14);
            }
            for (int k = 0; k < nfree; ++k) {
                x_old[k] = path[first_free + k];
                g_old[k] = grad[first_free + k];
            }
            // backtracking line search on the projected step
            bool accepted = false;
            std::vector<Vector> trial(nfree);
            for (int bt = 0; bt < 60; ++bt) {
                double step_sq = 0.0;
                for (int k = 0; k < nfree; ++k) {
                    trial[k] = x_old[k] - alpha * g_old[k];
                    project_simplex(trial[k], node_total, lb);
                    step_sq += (trial[k] - x_old[k]).squaredNorm();
                }
                if (step_sq == 0.0) break;
                for (int k = 0; k < nfree; ++k) path[first_free + k] = trial[k];
                const double cand = evaluate(nullptr);
                if (cand <= obj - 1e-4 * step_sq / alpha) {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) {
                for (int k = 0; k < nfree; ++k) path[first_free + k] = x_old[k];
                evaluate(nullptr);  // restore multipliers/actions of the iterate
                plateau = true;
                break;
            }
            obj = evaluate(&grad);
            history.push_back(obj);
            const int w = cfg.plateau_window;
            if (static_cast<int>(history.size()) > w) {
                const double prev = history[history.size() - 1 - w];
                out.objective_decrease = (prev - obj) / std::max(std::abs(obj), 1e-300);
                if (out.objective_decrease <= cfg.objective_tol) {
                    plateau = true;
                    ++it;
                    break;
                }
            }
        }
        out.iterations = it;
        out.objective = obj;
        out.constraint_residual = constraint_residual;
        out.converged = constraint_residual <= cfg.constraint_tol && (plateau || nfree == 0);
        out.speed_profile = actions;
        out.objective_history = std::move(history);
        out.path = export_path();
        return out;
    }

    PathVariables export_path() const {
        PathVariables pv;
        pv.grid = K.grid;
        pv.steps = L;
        pv.horizon = horizon;
        pv.dt = dt;
        pv.densities = path;
        pv.momenta.reserve(L);
        for (int k = 1; k <= L; ++k) {
            Vector rb = 0.5 * (path[k - 1] + path[k]);
            if (lb > 0.0) rb = floored(rb);
            PairField V(K.grid);
            std::int64_t p = 0;
            const Vector& lam = lambda[k - 1];
            for (std::int64_t i = 0; i < N; ++i)
                for (std::int64_t j = i + 1; j < N; ++j, ++p)
                    V.upper[p] = theta_m(rb[i], rb[j], m) * (lam[i] - lam[j]) / hd;
            pv.momenta.push_back(std::move(V));
        }
        return pv;
    }
};

void check_unit_mass(const DensityField& rho, const char* who) {
    if (std::abs(rho.mass() - 1.0) > 1e-8)
        throw std::invalid_argument(std::string(who) + ": mass mismatch (field is not unit mass)");
    if (rho.values.minCoeff() < 0.0)
        throw std::invalid_argument(std::string(who) + ": negative density entry");
}

}  // namespace

TransportResult solve_distance(const DensityField& rho0, const DensityField& rho1,
                               const KernelMatrix& K, double m, const SolverConfig& cfg) {
    if (!(rho0.grid == K.grid) || !(rho1.grid == K.grid))
        throw std::invalid_argument("solve_distance: grid mismatch");
    check_unit_mass(rho0, "solve_distance");
    check_unit_mass(rho1, "solve_distance");
    PathSolver solver(K, m, cfg);
    solver.init_endpoints(rho0.values, rho1.values);
    TransportResult out = solver.run();
    out.distance = std::sqrt(std::max(out.objective, 0.0));
    return out;
}

std::vector<double> geodesic_speed_profile(const TransportResult& result) {
    return result.speed_profile;
}

double speed_profile_flatness(const TransportResult& result) {
    const auto& a = result.speed_profile;
    if (a.empty()) return 0.0;
    const double mean = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
    if (mean <= 0.0) return 0.0;
    double dev = 0.0;
    for (double v : a) dev = std::max(dev, std::abs(v - mean));
    return dev / mean;
}

std::pair<double, double> rescaling_check(const DensityField& rho0, const DensityField& rho1,
                                          const KernelMatrix& K, double m, const SolverConfig& cfg,
                                          double horizon) {
    if (!(horizon > 0.0)) throw std::invalid_argument("rescaling_check: horizon must be positive");
    check_unit_mass(rho0, "rescaling_check");
    check_unit_mass(rho1, "rescaling_check");
    PathSolver scaled(K, m, cfg);
    scaled.set_horizon(horizon);
    scaled.init_endpoints(rho0.values, rho1.values);
    TransportResult at_T = scaled.run();
    TransportResult at_1 = solve_distance(rho0, rho1, K, m, cfg);
    return {std::sqrt(std::max(at_T.objective, 0.0)), at_1.distance};
}

double triangle_inequality_probe(const DensityField& a, const DensityField& b,
                                 const DensityField& c, const KernelMatrix& K, double m,
                                 const SolverConfig& cfg) {
    const double ab = solve_distance(a, b, K, m, cfg).distance;
    const double bc = solve_distance(b, c, K, m, cfg).distance;
    const double ac = solve_distance(a, c, K, m, cfg).distance;
    return ab + bc - ac;
}

namespace detail_transport {
// used by the minimizing-movement module; keeps PathSolver internal otherwise
TransportResult solve_free_endpoint(const DensityField& rho_prev, const KernelMatrix& K, double m,
                                    double tau, const SolverConfig& cfg) {
    check_unit_mass(rho_prev, "jko_step");
    PathSolver solver(K, m, cfg);
    solver.free_endpoint = true;
    solver.tau = tau;
    // the stay-put path is the natural starting point; it makes the per-step
    // energy inequality an exact consequence of monotone descent
    solver.init_endpoints(rho_prev.values, rho_prev.values);
    return solver.run();
}
}  // namespace detail_transport

}  // namespace fpme
