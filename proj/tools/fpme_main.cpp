// fpme: assemble periodized fractional kernels, compute the non-local
// transport distance and its geodesics, run the minimizing-movement flow for
// the fractional porous medium equation, and validate the whole stack.

#include "fpme/action.hpp"
#include "fpme/grid.hpp"
#include "fpme/io.hpp"
#include "fpme/jko.hpp"
#include "fpme/kernel.hpp"
#include "fpme/means.hpp"
#include "fpme/oracles.hpp"
#include "fpme/transport.hpp"
#include "fpme/validate.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace fpme;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

DensityField built_in_density(const std::string& init, const GridSpec& g, double bump_width) {
    Vector v(g.cells);
    if (init == "uniform") {
        v.setOnes();
    } else if (init == "cosine") {
        for (std::int64_t i = 0; i < g.cells; ++i)
            v[i] = 1.0 + 0.5 * std::cos(2.0 * M_PI * g.center(i)[0]);
    } else if (init == "bump") {
        // periodized Gaussian centered at 1/2
        for (std::int64_t i = 0; i < g.cells; ++i) {
            const auto c = g.center(i);
            double r2 = 0.0;
            for (int a = 0; a < g.dim; ++a) {
                double d = c[a] - 0.5;
                d -= std::round(d);
                r2 += d * d;
            }
            v[i] = std::exp(-r2 / (2.0 * bump_width * bump_width)) + 1e-8;
        }
    } else if (init.rfind("file:", 0) == 0) {
        return normalize(load_density(init.substr(5)));
    } else {
        throw CLI::ValidationError("--init", "unknown initial condition: " + init);
    }
    return normalize(DensityField{g, std::move(v)});
}

json kernel_metadata(const KernelMatrix& K) {
    return json{{"sigma", K.sigma},
                {"radius", K.config.truncation_radius},
                {"tail_correction", K.config.tail_correction},
                {"C_comp_estimate", comp_estimate_constant(K)}};
}

void warn_or_reject_exponent(double m, double sigma, int dim, bool strict) {
    const Nonlinearity nl{.m = m, .sigma = sigma, .dim = dim};
    if (nl.below_mass_conserving_range()) {
        std::ostringstream msg;
        msg << "m = " << m << " is at or below the critical exponent m_* = " << nl.m_star()
            << " (mass conservation is not guaranteed there)";
        if (strict) throw CLI::ValidationError("--m", msg.str());
        std::cerr << "warning: " << msg.str() << "\n";
    }
}

void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    const json& kernel_meta, double wall) {
    RunManifest manifest;
    manifest.command = command;
    manifest.config_json = config.dump();
    manifest.kernel_json = kernel_meta.dump();
    manifest.wall_seconds = wall;
    manifest.exit_status = 0;
    manifest.write(dir / "manifest.json");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-local transport distance and JKO flow for the fractional porous medium "
                 "equation on the torus"};
    app.require_subcommand(1);

    // ---- kernel ----
    auto* kernel_cmd = app.add_subcommand("kernel", "assemble the periodized kernel matrix");
    int k_dim = 1, k_n = 64, k_radius = 8;
    double k_sigma = 0.5;
    bool k_no_tail = false;
    std::string k_out;
    kernel_cmd->add_option("--dim", k_dim, "spatial dimension (1 or 2)");
    kernel_cmd->add_option("--n", k_n, "cells per axis")->required();
    kernel_cmd->add_option("--sigma", k_sigma, "fractional order in (0,1)")->required();
    kernel_cmd->add_option("--radius", k_radius, "lattice truncation radius");
    kernel_cmd->add_flag("--no-tail", k_no_tail, "disable the tail correction");
    kernel_cmd->add_option("--out", k_out, "output file (binary + .json sidecar)")->required();

    // ---- distance / geodesic ----
    auto* dist_cmd = app.add_subcommand("distance", "non-local transport distance between two densities");
    auto* geo_cmd = app.add_subcommand("geodesic", "distance plus the discrete geodesic path");
    std::string d_rho0, d_rho1, d_kernel, d_path_out, g_out;
    double d_m = 2.0, d_sigma = 0.5;
    int d_steps = 16, d_radius = 8, d_maxit = 5000;
    double d_ctol = 1e-9, d_otol = 1e-7;
    bool d_strict = false;
    for (CLI::App* cmd : {dist_cmd, geo_cmd}) {
        cmd->add_option("--rho0", d_rho0, "first density file")->required();
        cmd->add_option("--rho1", d_rho1, "second density file")->required();
        cmd->add_option("--kernel", d_kernel, "kernel file (else assembled from --sigma)");
        cmd->add_option("--sigma", d_sigma, "fractional order if no kernel file");
        cmd->add_option("--radius", d_radius, "kernel truncation radius");
        cmd->add_option("--m", d_m, "entropy exponent in (0,2]");
        cmd->add_option("--time-steps", d_steps, "time intervals L");
        cmd->add_option("--max-iterations", d_maxit, "outer iteration budget");
        cmd->add_option("--tol-constraint", d_ctol, "continuity residual tolerance");
        cmd->add_option("--tol-objective", d_otol, "relative objective plateau tolerance");
        cmd->add_flag("--strict", d_strict, "escalate the m <= m_* warning to an error");
    }
    dist_cmd->add_option("--path-out", d_path_out, "directory for geodesic snapshots");
    geo_cmd->add_option("--out", g_out, "output directory")->required();

    // ---- jko ----
    auto* jko_cmd = app.add_subcommand("jko", "minimizing-movement flow");
    std::string j_init = "cosine", j_out;
    double j_m = 2.0, j_sigma = 0.5, j_tau = 1e-3, j_bump_width = 0.1;
    int j_dim = 1, j_n = 64, j_steps = 10, j_inner = 8, j_radius = 8, j_maxit = 5000;
    bool j_strict = false;
    jko_cmd->add_option("--init", j_init, "uniform | cosine | bump | file:PATH");
    jko_cmd->add_option("--bump-width", j_bump_width, "width of the bump initial condition");
    jko_cmd->add_option("--m", j_m, "entropy exponent in (0,2]")->required();
    jko_cmd->add_option("--sigma", j_sigma, "fractional order in (0,1)")->required();
    jko_cmd->add_option("--dim", j_dim, "spatial dimension");
    jko_cmd->add_option("--n", j_n, "cells per axis")->required();
    jko_cmd->add_option("--tau", j_tau, "implicit time step")->required();
    jko_cmd->add_option("--steps", j_steps, "number of JKO steps")->required();
    jko_cmd->add_option("--inner-steps", j_inner, "time intervals per step");
    jko_cmd->add_option("--radius", j_radius, "kernel truncation radius");
    jko_cmd->add_option("--max-iterations", j_maxit, "inner iteration budget");
    jko_cmd->add_option("--out", j_out, "output directory")->required();
    jko_cmd->add_flag("--strict", j_strict, "escalate the m <= m_* warning to an error");

    // ---- oracle ----
    auto* oracle_cmd = app.add_subcommand("oracle", "reference solutions");
    oracle_cmd->require_subcommand(1);
    auto* heat_cmd = oracle_cmd->add_subcommand("heat", "exact fractional heat semigroup");
    auto* ode_cmd = oracle_cmd->add_subcommand("ode", "RK4 on the semidiscrete system");
    std::string o_init = "cosine", o_out;
    double o_sigma = 0.5, o_t = 0.05, o_dt = 0.0, o_m = 2.0, o_bump_width = 0.1;
    int o_dim = 1, o_n = 64, o_radius = 8;
    for (CLI::App* cmd : {heat_cmd, ode_cmd}) {
        cmd->add_option("--init", o_init, "uniform | cosine | bump | file:PATH");
        cmd->add_option("--bump-width", o_bump_width, "width of the bump initial condition");
        cmd->add_option("--sigma", o_sigma, "fractional order in (0,1)")->required();
        cmd->add_option("--t", o_t, "final time")->required();
        cmd->add_option("--dim", o_dim, "spatial dimension");
        cmd->add_option("--n", o_n, "cells per axis");
        cmd->add_option("--out", o_out, "output density file")->required();
    }
    ode_cmd->add_option("--m", o_m, "nonlinearity exponent")->required();
    ode_cmd->add_option("--dt", o_dt, "RK4 step (0 = stability estimate)");
    ode_cmd->add_option("--radius", o_radius, "kernel truncation radius");

    // ---- validate ----
    auto* validate_cmd = app.add_subcommand("validate", "run the invariant suite");
    bool v_quick = false;
    std::uint64_t v_seed = 20240;
    validate_cmd->add_flag("--quick", v_quick, "reduced grids and sample counts");
    validate_cmd->add_option("--seed", v_seed, "seed for randomized probes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    Timer timer;
    try {
        if (*kernel_cmd) {
            const GridSpec grid = make_grid(k_dim, k_n);
            const KernelConfig cfg{.truncation_radius = k_radius, .tail_correction = !k_no_tail};
            const KernelMatrix K = kernel_matrix(grid, k_sigma, cfg);
            store_kernel(K, k_out);
            std::cout << kernel_metadata(K).dump(2) << std::endl;
            return kExitOk;
        }

        if (*dist_cmd || *geo_cmd) {
            // endpoints must already be unit-mass; solve_distance rejects otherwise
            const DensityField rho0 = load_density(d_rho0);
            const DensityField rho1 = load_density(d_rho1);
            KernelMatrix K;
            if (!d_kernel.empty()) {
                K = load_kernel(d_kernel);
                if (!(K.grid == rho0.grid))
                    throw std::invalid_argument("kernel grid does not match the density grid");
            } else {
                K = kernel_matrix(rho0.grid, d_sigma, {.truncation_radius = d_radius});
            }
            warn_or_reject_exponent(d_m, K.sigma, K.grid.dim, d_strict);
            SolverConfig cfg;
            cfg.time_steps = d_steps;
            cfg.max_iterations = d_maxit;
            cfg.constraint_tol = d_ctol;
            cfg.objective_tol = d_otol;
            const TransportResult r = solve_distance(rho0, rho1, K, d_m, cfg);

            json out{{"distance", r.distance},
                     {"objective", r.objective},
                     {"iterations", r.iterations},
                     {"converged", r.converged},
                     {"constraint_residual", r.constraint_residual},
                     {"speed_profile", r.speed_profile},
                     {"flatness", speed_profile_flatness(r)}};
            std::cout << out.dump(2) << std::endl;

            const std::string out_dir = *geo_cmd ? g_out : d_path_out;
            if (!out_dir.empty()) {
                fs::create_directories(out_dir);
                for (int k = 0; k <= r.path.steps; ++k) {
                    char name[32];
                    std::snprintf(name, sizeof(name), "path_%06d.fpme", k);
                    store_density(DensityField{K.grid, r.path.densities[k]},
                                  fs::path(out_dir) / name);
                }
                json config{{"command", *geo_cmd ? "geodesic" : "distance"},
                            {"rho0", d_rho0},
                            {"rho1", d_rho1},
                            {"m", d_m},
                            {"time_steps", d_steps},
                            {"max_iterations", d_maxit},
                            {"constraint_tol", d_ctol},
                            {"objective_tol", d_otol}};
                write_manifest(out_dir, *geo_cmd ? "geodesic" : "distance", config,
                               kernel_metadata(K), timer.seconds());
            }
            return kExitOk;
        }

        if (*jko_cmd) {
            const GridSpec grid = make_grid(j_dim, j_n);
            warn_or_reject_exponent(j_m, j_sigma, j_dim, j_strict);
            const KernelMatrix K = kernel_matrix(grid, j_sigma, {.truncation_radius = j_radius});
            const DensityField rho0 = built_in_density(j_init, grid, j_bump_width);

            JkoConfig cfg;
            cfg.tau = j_tau;
            cfg.steps = j_steps;
            cfg.m = j_m;
            cfg.inner.time_steps = j_inner;
            cfg.inner.max_iterations = j_maxit;
            const Trajectory traj = jko_flow(rho0, K, cfg);

            fs::create_directories(j_out);
            std::ofstream csv(fs::path(j_out) / "diagnostics.csv");
            csv << "step,time,mass,entropy,fisher,w2_step,min_density,inner_iterations,residual\n";
            csv.precision(15);
            for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
                char name[32];
                std::snprintf(name, sizeof(name), "step_%06zu.fpme", s);
                DensityField snap{grid, traj.snapshots[s]};
                store_density(snap, fs::path(j_out) / name);
                DensityField safe = snap;
                if (j_m <= 1.0) safe.values = safe.values.cwiseMax(cfg.inner.density_floor);
                csv << s << "," << traj.times[s] << "," << snap.mass() << ","
                    << entropy(snap, j_m) << "," << fisher_information(safe, j_m, K) << ","
                    << (s == 0 ? 0.0 : traj.steps[s - 1].w2_step) << "," << snap.min_value()
                    << "," << (s == 0 ? 0 : traj.steps[s - 1].inner_iterations) << ","
                    << (s == 0 ? 0.0 : traj.steps[s - 1].constraint_residual) << "\n";
            }
            json config{{"command", "jko"},        {"init", j_init},   {"m", j_m},
                        {"sigma", j_sigma},        {"dim", j_dim},     {"n", j_n},
                        {"tau", j_tau},            {"steps", j_steps}, {"inner_steps", j_inner},
                        {"max_iterations", j_maxit}};
            write_manifest(j_out, "jko", config, kernel_metadata(K), timer.seconds());
            if (!traj.completed) {
                std::cerr << "jko: a step failed to converge; partial trajectory written\n";
                return kExitValidation;
            }
            return kExitOk;
        }

        if (*heat_cmd) {
            const GridSpec grid = make_grid(o_dim, o_n);
            const DensityField rho0 = built_in_density(o_init, grid, o_bump_width);
            store_density(spectral_heat_flow(rho0, o_sigma, o_t), o_out);
            return kExitOk;
        }
        if (*ode_cmd) {
            const GridSpec grid = make_grid(o_dim, o_n);
            const DensityField rho0 = built_in_density(o_init, grid, o_bump_width);
            const KernelMatrix K = kernel_matrix(grid, o_sigma, {.truncation_radius = o_radius});
            store_density(integrate_semidiscrete(rho0, o_m, K, o_t, o_dt), o_out);
            return kExitOk;
        }

        if (*validate_cmd) {
            const auto results = run_validation({.quick = v_quick, .seed = v_seed});
            std::size_t width = 0;
            for (const auto& r : results) width = std::max(width, r.name.size());
            int failures = 0;
            for (const auto& r : results) {
                std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name
                          << std::string(width - r.name.size() + 2, ' ') << r.detail << "\n";
                if (!r.pass) ++failures;
            }
            std::cout << results.size() - failures << "/" << results.size() << " checks passed ("
                      << timer.seconds() << "s)\n";
            return failures == 0 ? kExitOk : kExitValidation;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
