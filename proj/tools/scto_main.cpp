#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>

#include "scto/analysis.hpp"
#include "scto/io.hpp"
#include "scto/optimal_coupling.hpp"
#include "scto/particle.hpp"
#include "scto/response.hpp"
#include "scto/simd.hpp"

namespace fs = std::filesystem;
using scto::ExperimentConfig;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRegime = 3;
constexpr int kExitNumerical = 4;

struct Runner {
    ExperimentConfig cfg;
    fs::path out;
    bool verbose = false;
    ordered_json results;
    ordered_json notes = ordered_json::array();

    void log(const std::string& msg) const {
        if (verbose) std::cerr << "[scto] " << msg << "\n";
    }

    std::string path(const std::string& name) const { return (out / name).string(); }

    ordered_json trace_json(const scto::SolverTrace& t) const {
        ordered_json j;
        j["converged"] = t.converged;
        j["iterations"] = t.iterates.size();
        j["final_residual"] = t.final_residual;
        j["last_ratio"] = t.outer_ratio;
        j["damped"] = t.damped;
        return j;
    }

    void write_trace_csv(const std::string& name, const scto::SolverTrace& t) const {
        std::vector<std::vector<std::string>> rows;
        for (const auto& e : t.iterates)
            rows.push_back({std::to_string(e.step), scto::format_double(e.step_size),
                            scto::format_double(e.residual),
                            scto::format_double(e.ratio)});
        scto::write_csv(path(name), {"step", "step_size", "residual", "ratio"}, rows);
    }

    std::pair<scto::GridDensity, scto::SolverTrace> solve(
        const scto::SelfConsistentModel& model) const {
        if (cfg.solver == "picard")
            return scto::picard_fixed_point(model, scto::GridDensity::uniform(model.grid_n),
                                            cfg.tol, cfg.max_iter, cfg.damping, cfg.alpha);
        if (cfg.solver == "thm")
            return scto::thm_existence_iteration(
                model, scto::GridDensity::uniform(model.grid_n), cfg.tol);
        throw scto::ConfigError("unknown solver method: " + cfg.solver);
    }

    void plot_density(const std::string& name, const scto::GridDensity& f,
                      const std::string& title) const {
        if (!cfg.svg) return;
        scto::PlotSeries s;
        s.label = "density";
        for (int i = 0; i < f.n; ++i) {
            s.x.push_back(f.cell_mid(i));
            s.y.push_back(f.values[i]);
        }
        scto::write_svg_plot(path(name), {s}, title);
    }

    // ---------------------------------------------------------- commands

    void run_fixed_point() {
        auto model = scto::build_model(cfg);
        auto [f, trace] = solve(model);
        scto::write_density_csv(path("density.csv"), f);
        write_trace_csv("trace.csv", trace);
        plot_density("density.svg", f, "fixed density");
        results["solver"] = cfg.solver;
        results["trace"] = trace_json(trace);
    }

    void run_sweep_delta() {
        if (cfg.delta_list.empty())
            throw scto::ConfigError("sweep-delta: model.delta_list is required");
        auto model0 = scto::build_model(cfg);
        model0.delta = 0;
        scto::GridDensity f0 =
            scto::thm_existence_iteration(model0, scto::GridDensity::uniform(cfg.grid_n),
                                          cfg.tol)
                .first;
        std::vector<std::vector<std::string>> rows;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (double d : cfg.delta_list) {
            auto model = scto::build_model(cfg);
            model.delta = d;
            auto [f, trace] = solve(model);
            double gap = 0;
            for (int i = 0; i < f.n; ++i) gap += std::fabs(f.values[i] - f0.values[i]);
            gap /= f.n;
            rows.push_back({scto::format_double(d), scto::format_double(gap),
                            std::to_string(trace.iterates.size()),
                            scto::format_double(trace.outer_ratio)});
            if (d > 0 && gap > 0) {
                double lx = std::log(d), ly = std::log(gap);
                sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
                ++cnt;
            }
            log("delta " + scto::format_double(d) + " gap " + scto::format_double(gap));
        }
        scto::write_csv(path("sweep.csv"),
                        {"delta", "l1_distance_to_uncoupled", "iterations", "ratio"},
                        rows);
        if (cnt >= 2) {
            double det = cnt * sxx - sx * sx;
            results["stability_slope"] = (cnt * sxy - sx * sy) / det;
        }
    }

    void run_converge_rate() {
        auto model = scto::build_model(cfg);
        auto [fstar, trace] = solve(model);
        scto::LinearApplier L = scto::frozen_operator(model, fstar);
        std::vector<double> obs = scto::build_observable(cfg.observable, cfg.grid_n);
        scto::SignedGridFunction g(cfg.grid_n, std::move(obs), false);
        g.project_zero_mean();
        auto decay = scto::convergence_to_equilibrium(L, g, cfg.rate_steps);
        std::vector<std::vector<std::string>> rows;
        for (std::size_t k = 0; k < decay.a.size(); ++k)
            rows.push_back({std::to_string(k + 1), scto::format_double(decay.a[k])});
        scto::write_csv(path("decay.csv"), {"n", "a_n"}, rows);
        if (cfg.svg) {
            scto::PlotSeries s;
            s.label = "a_n";
            for (std::size_t k = 0; k < decay.a.size(); ++k) {
                s.x.push_back(static_cast<double>(k + 1));
                s.y.push_back(decay.a[k] > 0 ? std::log10(decay.a[k]) : -320.0);
            }
            scto::write_svg_plot(path("decay.svg"), {s}, "log10 decay");
        }
        results["gamma"] = decay.gamma;
        results["gamma_positive"] = decay.gamma_positive;
        results["prefactor"] = decay.prefactor;
        results["trace"] = trace_json(trace);
    }

    void run_response() {
        auto model = scto::build_model(cfg);
        auto rr = scto::linear_response(model);
        std::vector<std::vector<std::string>> rows;
        for (int i = 0; i < cfg.grid_n; ++i)
            rows.push_back({scto::format_double((i + 0.5) / cfg.grid_n),
                            scto::format_double(rr.derivative_term.values[i]),
                            scto::format_double(rr.response.values[i])});
        scto::write_csv(path("response.csv"), {"x", "derivative_term", "response"},
                        rows);
        results["resolvent_residual"] = rr.resolvent_residual;
        results["gap_ratio"] = rr.gap_ratio;
        std::vector<double> obs = scto::build_observable(cfg.observable, cfg.grid_n);
        results["observable_average"] = scto::observable_average(obs, rr.response);
        if (cfg.svg) {
            scto::PlotSeries a, b;
            a.label = "derivative term";
            b.label = "response";
            for (int i = 0; i < cfg.grid_n; ++i) {
                double x = (i + 0.5) / cfg.grid_n;
                a.x.push_back(x);
                a.y.push_back(rr.derivative_term.values[i]);
                b.x.push_back(x);
                b.y.push_back(rr.response.values[i]);
            }
            scto::write_svg_plot(path("response.svg"), {a, b}, "linear response");
        }
    }

    void run_fd_response() {
        if (cfg.delta_list.empty())
            throw scto::ConfigError("fd-response: model.delta_list is required");
        auto model = scto::build_model(cfg);
        auto rr = scto::linear_response(model);
        auto fd = scto::finite_difference_response(model, cfg.delta_list, cfg.tol);
        std::vector<std::vector<std::string>> rows;
        scto::PlotSeries gaps;
        gaps.label = "|quotient - R|_1";
        for (std::size_t k = 0; k < fd.deltas.size(); ++k) {
            double gap = 0;
            for (int i = 0; i < cfg.grid_n; ++i)
                gap += std::fabs(fd.quotients[k].values[i] - rr.response.values[i]);
            gap /= cfg.grid_n;
            rows.push_back({scto::format_double(fd.deltas[k]),
                            scto::format_double(gap),
                            fd.converged[k] ? "1" : "0"});
            gaps.x.push_back(fd.deltas[k]);
            gaps.y.push_back(gap);
        }
        scto::write_csv(path("fd_response.csv"), {"delta", "l1_gap_to_R", "converged"},
                        rows);
        if (fd.richardson_valid) {
            double rich_gap = 0;
            for (int i = 0; i < cfg.grid_n; ++i)
                rich_gap +=
                    std::fabs(fd.richardson.values[i] - rr.response.values[i]);
            results["richardson_l1_gap"] = rich_gap / cfg.grid_n;
        }
        results["resolvent_residual"] = rr.resolvent_residual;
        if (cfg.svg) scto::write_svg_plot(path("fd_response.svg"), {gaps}, "fd gaps");
    }

    void run_optimal_coupling() {
        auto model = scto::build_model(cfg);
        scto::PerturbationBasis basis;
        basis.degree = cfg.basis_degree;
        basis.weight_exponent = cfg.weight_exponent;
        std::vector<double> obs = scto::build_observable(cfg.observable, cfg.grid_n);
        scto::Resolvent res(scto::uncoupled_matrix(model));
        log("computing response gradient over " + std::to_string(basis.num_modes()) +
            " modes");
        auto g = scto::response_gradient(obs, model, basis, res, false);
        auto g_fast = scto::response_gradient(obs, model, basis, res, true);
        double adjoint_gap = 0;
        for (std::size_t m = 0; m < g.size(); ++m)
            adjoint_gap = std::max(adjoint_gap, std::fabs(g[m] - g_fast[m]));
        results["adjoint_path_gap"] = adjoint_gap;

        scto::ConvexConstraint P;
        const int M = basis.num_modes();
        if (cfg.constraint == "ball") {
            P = scto::ConvexConstraint::ball(cfg.radius);
        } else if (cfg.constraint == "box") {
            P = scto::ConvexConstraint::box(std::vector<double>(M, -cfg.box_bound),
                                            std::vector<double>(M, cfg.box_bound));
        } else if (cfg.constraint == "ball-box") {
            P = scto::ConvexConstraint::ball_intersect_box(
                cfg.radius, std::vector<double>(M, -cfg.box_bound),
                std::vector<double>(M, cfg.box_bound));
        } else {
            throw scto::ConfigError("unknown constraint: " + cfg.constraint);
        }
        auto opt = scto::optimize_convex(g, basis, P);

        // dominance certificate over random feasible couplings
        int dominated = 0;
        const int samples = 10000;
        std::vector<double> trial(M);
        for (int s = 0; s < samples; ++s) {
            double norm2 = 0;
            for (int m = 0; m < M; ++m) {
                trial[m] = 2.0 * scto::counter_uniform(cfg.seed, s, m, 7) - 1.0;
                norm2 += basis.weight(m) * trial[m] * trial[m];
            }
            if (P.kind != scto::ConvexConstraint::Kind::Box) {
                double scale = cfg.radius / std::sqrt(std::max(norm2, 1e-300)) *
                               scto::counter_uniform(cfg.seed, s, M, 7);
                for (double& t : trial) t *= scale;
            } else {
                for (int m = 0; m < M; ++m) trial[m] *= cfg.box_bound;
            }
            if (P.kind != scto::ConvexConstraint::Kind::Ball)
                for (int m = 0; m < M; ++m)
                    trial[m] = std::clamp(trial[m], P.lo.empty() ? 0.0 : P.lo[m],
                                          P.hi.empty() ? 0.0 : P.hi[m]);
            if (scto::functional_value(g, trial) <= opt.J + 1e-12) ++dominated;
        }
        results["dominance_fraction"] = static_cast<double>(dominated) / samples;
        results["J"] = opt.J;
        results["all_feasible_optimal"] = opt.all_feasible_optimal;
        notes.push_back(
            "weighted-spectral metric is a surrogate for the Sobolev structure; "
            "weight exponent s=" +
            scto::format_double(basis.weight_exponent));

        std::vector<std::vector<std::string>> rows;
        for (int m = 0; m < M; ++m) {
            auto [ix, iy] = basis.mode_indices(m);
            rows.push_back({std::to_string(ix), std::to_string(iy),
                            scto::format_double(opt.coeffs[m])});
        }
        scto::write_csv(path("coefficients.csv"), {"x_index", "y_index", "coefficient"},
                        rows);
        const int ns = 64;
        std::vector<std::vector<std::string>> surf;
        for (int i = 0; i < ns; ++i)
            for (int j = 0; j < ns; ++j) {
                double x = (i + 0.5) / ns, y = (j + 0.5) / ns;
                surf.push_back({scto::format_double(x), scto::format_double(y),
                                scto::format_double(basis.eval(opt.coeffs, x, y))});
            }
        scto::write_csv(path("surface.csv"), {"x", "y", "h"}, surf);
    }

    void run_simulate() {
        auto model = scto::build_model(cfg);
        auto [fstar, trace] = solve(model);
        scto::ParticleEnsemble ens =
            scto::uniform_ensemble(static_cast<std::size_t>(cfg.particles), cfg.seed);
        for (int k = 0; k < cfg.burn_in; ++k) scto::step_ensemble(ens, model);
        std::vector<double> acc(cfg.grid_n, 0.0);
        std::vector<std::vector<std::string>> rows;
        for (int k = 0; k < cfg.sample_steps; ++k) {
            scto::step_ensemble(ens, model);
            scto::GridDensity h = scto::empirical_density(ens, cfg.grid_n);
            double mean = 0;
            for (double x : ens.states) mean += x;
            mean /= ens.states.size();
            double gap = 0;
            for (int i = 0; i < cfg.grid_n; ++i) {
                acc[i] += h.values[i];
                gap += std::fabs(h.values[i] - fstar.values[i]);
            }
            rows.push_back({std::to_string(cfg.burn_in + k + 1),
                            scto::format_double(mean),
                            scto::format_double(gap / cfg.grid_n)});
        }
        for (double& x : acc) x /= cfg.sample_steps;
        scto::GridDensity hist(cfg.grid_n, std::move(acc), false);
        scto::write_csv(path("trajectory.csv"), {"step", "mean", "l1_to_reference"},
                        rows);
        scto::write_density_csv(path("histogram.csv"), hist);
        double gap = 0;
        for (int i = 0; i < cfg.grid_n; ++i)
            gap += std::fabs(hist.values[i] - fstar.values[i]);
        results["time_averaged_l1_gap"] = gap / cfg.grid_n;
        results["particles"] = cfg.particles;
        plot_density("histogram.svg", hist, "stationary histogram");
    }

    void run_contraction_report() {
        auto model = scto::build_model(cfg);
        auto [fstar, trace] = solve(model);
        scto::LinearApplier L = scto::frozen_operator(model, fstar);
        auto ly = scto::fit_ly_coefficients(L, cfg.grid_n, scto::NormKind::W11,
                                            scto::NormKind::L1, 64, cfg.seed + 1);
        double a_n1 = cfg.a_n1;
        if (a_n1 == 0) {
            std::vector<double> obs = scto::build_observable("cos:1", cfg.grid_n);
            scto::SignedGridFunction gfun(cfg.grid_n, std::move(obs), false);
            gfun.project_zero_mean();
            auto decay = scto::convergence_to_equilibrium(L, gfun, cfg.n1);
            a_n1 = decay.a.back();
            notes.push_back("a_n1 measured empirically from cos:1 decay");
        }
        auto rep = scto::contraction_matrix(ly, cfg.K, cfg.Q, cfg.C, a_n1,
                                            cfg.delta, cfg.n1);
        double dstar = scto::contraction_delta_star(ly, cfg.K, cfg.Q, cfg.C, a_n1,
                                                    cfg.n1);
        ordered_json j;
        j["lambda1"] = ly.lambda1;
        j["B"] = ly.B;
        j["ly_violations"] = ly.violations;
        j["ly_regime_ok"] = ly.regime_ok;
        j["a_n1"] = a_n1;
        j["n1"] = cfg.n1;
        j["M"] = {{rep.M[0][0], rep.M[0][1]}, {rep.M[1][0], rep.M[1][1]}};
        j["rho"] = rep.rho;
        j["eigvec_a"] = rep.a;
        j["eigvec_b"] = rep.b;
        j["regime_ok"] = rep.regime_ok;
        j["delta_star"] = std::isfinite(dstar) ? ordered_json(dstar)
                                               : ordered_json("inf");
        results["contraction"] = j;
        notes.push_back(
            "norms are discrete surrogates (W11/L1); constants K, Q, C are "
            "user-supplied or empirical, not certified");
        scto::write_csv(path("contraction_matrix.csv"), {"m11", "m12", "m21", "m22"},
                        {{scto::format_double(rep.M[0][0]),
                          scto::format_double(rep.M[0][1]),
                          scto::format_double(rep.M[1][0]),
                          scto::format_double(rep.M[1][1])}});
    }

    int run() {
        fs::create_directories(out);
        auto t0 = std::chrono::steady_clock::now();
        if (cfg.command == "fixed-point") run_fixed_point();
        else if (cfg.command == "sweep-delta") run_sweep_delta();
        else if (cfg.command == "converge-rate") run_converge_rate();
        else if (cfg.command == "response") run_response();
        else if (cfg.command == "fd-response") run_fd_response();
        else if (cfg.command == "optimal-coupling") run_optimal_coupling();
        else if (cfg.command == "simulate") run_simulate();
        else if (cfg.command == "contraction-report") run_contraction_report();
        else throw scto::ConfigError("unknown command: " + cfg.command);
        auto t1 = std::chrono::steady_clock::now();
        write_manifest(
            std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count(),
            "");
        return 0;
    }

    void write_manifest(long long ms, const std::string& error) {
        ordered_json man;
        man["command"] = cfg.command;
        std::string cfg_text = scto::serialize_config(cfg);
        char hash[32];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(scto::fnv1a_hash(cfg_text)));
        man["config_hash"] = hash;
        man["config"] = ordered_json::parse(cfg_text);
        man["simd_backend"] = scto::simd::active_name();
        man["version"] = "1.0.0";
        man["wall_time_ms"] = ms;
        man["results"] = results;
        man["notes"] = notes;
        if (!error.empty()) man["error"] = error;
        scto::write_text_file(path("manifest.json"), man.dump(2) + "\n");
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-consistent transfer operator toolkit"};
    std::string config_path, out_dir, command;
    std::uint64_t seed = 0;
    int threads = 0;
    bool verbose = false;
    bool have_seed = false, have_out = false;
    app.add_option("command", command,
                   "command override (otherwise taken from the config)");
    app.add_option("--config", config_path, "experiment config JSON")->required();
    app.add_option("--out", out_dir, "output directory")->each([&](const std::string&) {
        have_out = true;
    });
    app.add_option("--seed", seed, "RNG seed override")->each([&](const std::string&) {
        have_seed = true;
    });
    app.add_option("--threads", threads, "worker thread cap");
    app.add_flag("--verbose", verbose, "progress logging to stderr");
    CLI11_PARSE(app, argc, argv);

    Runner r;
    r.verbose = verbose;
    try {
        r.cfg = scto::parse_config(scto::read_text_file(config_path));
        if (!command.empty()) r.cfg.command = command;
        if (have_out) r.cfg.out_dir = out_dir;
        if (have_seed) r.cfg.seed = seed;
        if (threads > 0) r.cfg.threads = threads;
        r.out = r.cfg.out_dir;
        return r.run();
    } catch (const scto::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const scto::RegimeError& e) {
        std::cerr << "regime error: " << e.what() << "\n";
        try { r.write_manifest(0, e.what()); } catch (...) {}
        return kExitRegime;
    } catch (const scto::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        try { r.write_manifest(0, e.what()); } catch (...) {}
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
