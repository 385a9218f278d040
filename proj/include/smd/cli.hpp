#ifndef SMD_CLI_HPP
#define SMD_CLI_HPP

/**
 * @file cli.hpp
 * @brief Command-line front end: single solves, Monte Carlo runs, lambda
 *        sweeps, optimal-lambda search, spectral-vs-MC comparison.
 *
 * Configuration precedence: command-line flags override the JSON config file
 * (--config) which overrides built-in defaults. The config schema mirrors
 * the ProblemParams / SolverConfig / McConfig field names exactly. The seed
 * falls back to the SMD_SEED environment variable when neither a flag nor a
 * config entry provides one.
 *
 * Exit codes: 0 success, 1 input validation error, 2 numerical failure
 * (ill-conditioning, censoring, residual floor, |z| > 3 in compare),
 * 3 no interior minimum in an optimize bracket.
 */

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "smd/errors.hpp"
#include "smd/geometry.hpp"
#include "smd/io.hpp"
#include "smd/mc.hpp"
#include "smd/solver.hpp"
#include "smd/sweep.hpp"

namespace smd::cli {

using nlohmann::json;

namespace detail {

struct Resolved {
    ProblemParams params;
    SolverConfig solver;
    McConfig mc;
    MeanConvention mean = MeanConvention::average;
    std::string format = "csv";
    std::string out_path;
};

inline void expect_keys(const json& j, std::initializer_list<const char*> allowed,
                        const std::string& section) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || key == k;
        if (!ok)
            throw validation_error("config: unknown key '" + key + "' in " + section);
    }
}

template <typename T>
void assign_if(const json& j, const char* key, T& target) {
    if (!j.contains(key)) return;
    try {
        target = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw validation_error(std::string("config: bad value for '") + key + "'");
    }
}

inline json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw validation_error("config: parse failure in '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw validation_error("config: top level must be an object");
    expect_keys(j, {"geometry", "transport", "solver", "mc"}, "top level");
    return j;
}

inline void apply_config(const json& j, ProblemParams& p, SolverConfig& s, McConfig& m,
                         bool& seed_from_config, bool& dt_from_config,
                         bool& max_time_from_config) {
    if (j.contains("geometry")) {
        const json& g = j.at("geometry");
        expect_keys(g, {"R", "target_center", "target_half_width"}, "geometry");
        assign_if(g, "R", p.geometry.R);
        assign_if(g, "target_center", p.geometry.target_center);
        assign_if(g, "target_half_width", p.geometry.target_half_width);
    }
    if (j.contains("transport")) {
        const json& t = j.at("transport");
        expect_keys(t, {"D1", "D2", "lambda", "a"}, "transport");
        assign_if(t, "D1", p.transport.D1);
        assign_if(t, "D2", p.transport.D2);
        assign_if(t, "lambda", p.transport.lambda);
        assign_if(t, "a", p.transport.a);
    }
    if (j.contains("solver")) {
        const json& s_ = j.at("solver");
        expect_keys(s_,
                    {"order", "oversampling", "mode", "gamma_enabled", "quadrature_points",
                     "rank_tolerance"},
                    "solver");
        assign_if(s_, "order", s.order);
        assign_if(s_, "oversampling", s.oversampling);
        if (s_.contains("mode"))
            s.mode = solve_mode_from_string(s_.at("mode").get<std::string>());
        assign_if(s_, "gamma_enabled", s.gamma_enabled);
        assign_if(s_, "quadrature_points", s.quadrature_points);
        assign_if(s_, "rank_tolerance", s.rank_tolerance);
    }
    if (j.contains("mc")) {
        const json& m_ = j.at("mc");
        expect_keys(m_, {"paths", "dt_surface", "dt_bulk", "seed", "max_time", "threads"},
                    "mc");
        assign_if(m_, "paths", m.paths);
        if (m_.contains("dt_surface") || m_.contains("dt_bulk")) dt_from_config = true;
        assign_if(m_, "dt_surface", m.dt_surface);
        assign_if(m_, "dt_bulk", m.dt_bulk);
        if (m_.contains("seed")) seed_from_config = true;
        assign_if(m_, "seed", m.seed);
        if (m_.contains("max_time")) max_time_from_config = true;
        assign_if(m_, "max_time", m.max_time);
        assign_if(m_, "threads", m.threads);
    }
}

inline json effective_config(const std::string& command, const Resolved& r) {
    json j;
    j["command"] = command;
    j["geometry"] = {{"R", r.params.geometry.R},
                     {"target_center", r.params.geometry.target_center},
                     {"target_half_width", r.params.geometry.target_half_width}};
    j["transport"] = {{"D1", r.params.transport.D1},
                      {"D2", r.params.transport.D2},
                      {"lambda", r.params.transport.lambda},
                      {"a", r.params.transport.a}};
    j["solver"] = {{"order", r.solver.order},
                   {"oversampling", r.solver.oversampling},
                   {"mode", std::string(to_string(r.solver.mode))},
                   {"gamma_enabled", r.solver.gamma_enabled},
                   {"quadrature_points", r.solver.quadrature_points},
                   {"rank_tolerance", r.solver.rank_tolerance}};
    j["mc"] = {{"paths", r.mc.paths},
               {"dt_surface", r.mc.dt_surface},
               {"dt_bulk", r.mc.dt_bulk},
               {"seed", r.mc.seed},
               {"max_time", r.mc.max_time},
               {"threads", r.mc.threads}};
    j["mean"] = std::string(to_string(r.mean));
    j["format"] = r.format;
    j["out"] = r.out_path;
    return j;
}

inline void write_output(const Resolved& r, const std::string& text, std::ostream& out) {
    if (r.out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(r.out_path, std::ios::binary);
    if (!f) throw validation_error("cannot open output file '" + r.out_path + "'");
    f << text;
}

inline std::string solution_report(const SpectralSolution& sol, double mean,
                                   MeanConvention conv) {
    std::string s;
    s += "mean_mfpt: " + format_double(mean) + "\n";
    s += "convention: " + std::string(to_string(conv)) + "\n";
    s += "boundary_residual_sup: " + format_double(sol.boundary_residual_sup) + "\n";
    s += "boundary_residual_l2: " + format_double(sol.boundary_residual_l2) + "\n";
    s += "ode_residual_max: " + format_double(sol.ode_residual_max) + "\n";
    s += "condition_estimate: " + format_double(sol.condition_estimate) + "\n";
    s += "degenerate: " + std::string(sol.degenerate ? "true" : "false") + "\n";
    s += "mode: " + std::string(to_string(sol.config.mode)) + "\n";
    s += "order: " + std::to_string(sol.config.order) + "\n";
    return s;
}

inline json solution_json(const SpectralSolution& sol, double mean, MeanConvention conv) {
    json j;
    j["mean_mfpt"] = mean;
    j["convention"] = std::string(to_string(conv));
    j["boundary_residual_sup"] = sol.boundary_residual_sup;
    j["boundary_residual_l2"] = sol.boundary_residual_l2;
    j["ode_residual_max"] = sol.ode_residual_max;
    j["condition_estimate"] = sol.condition_estimate;
    j["degenerate"] = sol.degenerate;
    j["mode"] = std::string(to_string(sol.config.mode));
    j["order"] = sol.config.order;
    return j;
}

inline std::string t1_profile(const SpectralSolution& sol, int points = 512) {
    const Geometry& g = sol.params.geometry;
    const double eps = g.target_half_width;
    const double L = off_target_arc_length(g);
    std::vector<std::pair<double, double>> rows;
    rows.reserve(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) {
        const double phi = eps + (k + 0.5) * L / points;
        const double theta = global_angle(g, phi);
        rows.emplace_back(theta, sol.surface_mfpt(theta));
    }
    return profile_csv(rows);
}

}  // namespace detail

/// Parse and dispatch. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
    CLI::App app{"surface-mediated diffusion MFPT toolkit"};
    app.require_subcommand(1);

    struct Flags {
        double R = 1.0, D1 = 1.0, D2 = 1.0, lambda = 1.0, a = 0.1, eps = 0.3;
        double target_center = 0.0;
        std::string mode = "general";
        bool gamma = false;
        int order = 32;
        int oversampling = 4;
        long long paths = 50000;
        double dt = 0.0;
        std::uint64_t seed = 0;
        double max_time = 0.0;
        int threads = 0;
        std::string mean = "average";
        std::string config_path, out_path;
        std::string format = "csv";
        // sweep
        double lambda_min = 0.01, lambda_max = 100.0;
        int points = 25;
        std::string scale = "log";
        // optimize
        double lo = 0.1, hi = 100.0, tol = 1e-4;
        // converge
        std::string orders = "8,16,32";
    } f;

    auto add_common = [&f](CLI::App* sub) {
        sub->add_option("--R", f.R, "disk radius");
        sub->add_option("--D1", f.D1, "surface diffusion coefficient");
        sub->add_option("--D2", f.D2, "bulk diffusion coefficient");
        sub->add_option("--lambda", f.lambda, "desorption rate");
        sub->add_option("--a", f.a, "ejection distance");
        sub->add_option("--eps", f.eps, "target arc half-width");
        sub->add_option("--target-center", f.target_center, "target arc center angle");
        sub->add_option("--mode", f.mode, "ansatz mode: symmetric|general");
        sub->add_flag("--gamma", f.gamma, "carry the linear-in-theta term (experimental)");
        sub->add_option("--order", f.order, "truncation order N");
        sub->add_option("--oversampling", f.oversampling, "collocation points per unknown");
        sub->add_option("--paths", f.paths, "Monte Carlo path count");
        sub->add_option("--dt", f.dt, "Monte Carlo time step (surface and bulk)");
        sub->add_option("--seed", f.seed, "Monte Carlo master seed");
        sub->add_option("--max-time", f.max_time, "Monte Carlo per-path time cap");
        sub->add_option("--threads", f.threads, "Monte Carlo worker threads (0 = auto)");
        sub->add_option("--mean", f.mean, "mean convention: integral|average");
        sub->add_option("--config", f.config_path, "JSON config file");
        sub->add_option("--out", f.out_path, "output file (default: stdout)");
        sub->add_option("--format", f.format, "output format: csv|json");
    };

    CLI::App* cmd_solve = app.add_subcommand("solve", "one spectral solve");
    CLI::App* cmd_special = app.add_subcommand("special", "closed-form branch (lambda=0 or a=R)");
    CLI::App* cmd_simulate = app.add_subcommand("simulate", "Monte Carlo MFPT estimate");
    CLI::App* cmd_compare = app.add_subcommand("compare", "solve + simulate + z-score");
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "mean MFPT over a lambda grid");
    CLI::App* cmd_optimize = app.add_subcommand("optimize", "golden-section lambda search");
    CLI::App* cmd_converge = app.add_subcommand("converge", "truncation-order study");
    for (CLI::App* sub :
         {cmd_solve, cmd_special, cmd_simulate, cmd_compare, cmd_sweep, cmd_optimize,
          cmd_converge})
        add_common(sub);
    cmd_sweep->add_option("--lambda-min", f.lambda_min, "sweep lower bound");
    cmd_sweep->add_option("--lambda-max", f.lambda_max, "sweep upper bound");
    cmd_sweep->add_option("--points", f.points, "sweep grid size");
    cmd_sweep->add_option("--scale", f.scale, "grid spacing: linear|log");
    cmd_optimize->add_option("--lo", f.lo, "bracket lower bound");
    cmd_optimize->add_option("--hi", f.hi, "bracket upper bound");
    cmd_optimize->add_option("--tol", f.tol, "relative bracket tolerance");
    cmd_converge->add_option("--orders", f.orders, "comma-separated truncation orders");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 1;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();

    try {
        // Resolution: built-in defaults, then config file, then explicit flags.
        detail::Resolved r;
        bool seed_set = false, dt_set = false, max_time_set = false;
        if (sub->count("--config") > 0) {
            const json cfg = detail::load_config_file(f.config_path);
            detail::apply_config(cfg, r.params, r.solver, r.mc, seed_set, dt_set,
                                 max_time_set);
        }
        auto set_if = [&sub](const char* flag, auto& target, const auto& value) {
            if (sub->count(flag) > 0) target = value;
        };
        set_if("--R", r.params.geometry.R, f.R);
        set_if("--target-center", r.params.geometry.target_center, f.target_center);
        set_if("--eps", r.params.geometry.target_half_width, f.eps);
        set_if("--D1", r.params.transport.D1, f.D1);
        set_if("--D2", r.params.transport.D2, f.D2);
        set_if("--lambda", r.params.transport.lambda, f.lambda);
        set_if("--a", r.params.transport.a, f.a);
        set_if("--order", r.solver.order, f.order);
        set_if("--oversampling", r.solver.oversampling, f.oversampling);
        if (sub->count("--mode") > 0) r.solver.mode = solve_mode_from_string(f.mode);
        if (sub->count("--gamma") > 0) r.solver.gamma_enabled = f.gamma;
        validate(r.params);
        r.params.geometry.target_center = wrap_angle(r.params.geometry.target_center);

        const McConfig mc_defaults = default_mc_config(r.params);
        if (!dt_set) {
            r.mc.dt_surface = mc_defaults.dt_surface;
            r.mc.dt_bulk = mc_defaults.dt_bulk;
        }
        if (!max_time_set) r.mc.max_time = mc_defaults.max_time;
        set_if("--paths", r.mc.paths, f.paths);
        set_if("--threads", r.mc.threads, f.threads);
        set_if("--max-time", r.mc.max_time, f.max_time);
        if (sub->count("--dt") > 0) {
            r.mc.dt_surface = f.dt;
            r.mc.dt_bulk = f.dt;
        }
        if (sub->count("--seed") > 0) {
            r.mc.seed = f.seed;
        } else if (!seed_set) {
            if (const char* env = std::getenv("SMD_SEED")) {
                char* end = nullptr;
                const unsigned long long v = std::strtoull(env, &end, 10);
                if (end == env || *end != '\0')
                    throw validation_error("SMD_SEED is not an unsigned integer");
                r.mc.seed = v;
            }
        }
        r.mean = mean_convention_from_string(f.mean);
        if (f.format != "csv" && f.format != "json")
            throw validation_error("unknown format '" + f.format + "' (csv|json)");
        r.format = f.format;
        r.out_path = f.out_path;

        // Reproducibility echo: one JSON line with every resolved setting.
        err << detail::effective_config(command, r).dump() << "\n";

        if (command == "solve" || command == "special") {
            if (command == "special" && !is_degenerate(r.params))
                throw validation_error("special requires lambda = 0 or a = R");
            const SpectralSolution sol = solve(r.params, r.solver);
            const double mean = mean_surface_mfpt(sol, r.mean);
            out << detail::solution_report(sol, mean, r.mean);
            if (!r.out_path.empty()) {
                const std::string payload =
                    r.format == "json" ? detail::solution_json(sol, mean, r.mean).dump(2) + "\n"
                                       : detail::t1_profile(sol);
                detail::write_output(r, payload, out);
            }
            return 0;
        }

        if (command == "simulate") {
            const McEstimate est = estimate_mfpt(r.params, StartState::uniform(), r.mc);
            std::string report;
            report += "mc_mean: " + format_double(est.mean) + "\n";
            report += "mc_stderr: " + format_double(est.std_error) + "\n";
            report += "paths_used: " + std::to_string(est.paths_used) + "\n";
            report += "censored: " + std::to_string(est.censored) + "\n";
            out << report;
            if (!r.out_path.empty()) {
                if (r.format == "json") {
                    json j;
                    j["mc_mean"] = est.mean;
                    j["mc_stderr"] = est.std_error;
                    j["paths_used"] = est.paths_used;
                    j["censored"] = est.censored;
                    detail::write_output(r, j.dump(2) + "\n", out);
                } else {
                    std::string csv = "mc_mean,mc_stderr,paths_used,censored\n";
                    csv += format_double(est.mean) + "," + format_double(est.std_error) +
                           "," + std::to_string(est.paths_used) + "," +
                           std::to_string(est.censored) + "\n";
                    detail::write_output(r, csv, out);
                }
            }
            if (est.degenerate_sample)
                err << "warning: degenerate sample (fewer than two paths); std_error is 0\n";
            return 0;
        }

        if (command == "compare") {
            const SpectralSolution sol = solve(r.params, r.solver);
            // MC uniform starts estimate the arc average, so the comparison
            // always uses the average convention.
            const double spectral = mean_surface_mfpt(sol, MeanConvention::average);
            const McEstimate est = estimate_mfpt(r.params, StartState::uniform(), r.mc);
            const double z = zscore(spectral, est);
            json j;
            j["spectral_mean"] = spectral;
            j["mc_mean"] = est.mean;
            j["mc_stderr"] = est.std_error;
            j["zscore"] = z;
            j["paths"] = r.mc.paths;
            j["censored"] = est.censored;
            const std::string payload = j.dump(2) + "\n";
            out << payload;
            if (!r.out_path.empty()) detail::write_output(r, payload, out);
            return std::abs(z) <= 3.0 ? 0 : 2;
        }

        if (command == "sweep") {
            SweepSpec spec;
            spec.lambda_min = f.lambda_min;
            spec.lambda_max = f.lambda_max;
            spec.points = f.points;
            if (f.scale == "linear") spec.scale = SweepSpec::Scale::linear;
            else if (f.scale == "log") spec.scale = SweepSpec::Scale::log;
            else throw validation_error("unknown scale '" + f.scale + "' (linear|log)");
            const SweepResult result = sweep_lambda(r.params, spec, r.solver, r.mean);
            for (const auto& failure : result.failures)
                err << "sweep: lambda=" << format_double(failure.lambda)
                    << " failed: " << failure.message << "\n";
            if (r.format == "json") {
                json arr = json::array();
                for (const auto& rec : result.records)
                    arr.push_back({{"lambda", rec.lambda},
                                   {"mean_mfpt", rec.mean_mfpt},
                                   {"boundary_residual_l2", rec.boundary_residual_l2},
                                   {"mode", rec.mode}});
                detail::write_output(r, arr.dump(2) + "\n", out);
            } else {
                detail::write_output(r, sweep_csv(result.records), out);
            }
            return result.failures.empty() ? 0 : 2;
        }

        if (command == "optimize") {
            const OptimizeResult res =
                optimize_lambda(r.params, f.lo, f.hi, f.tol, r.solver, r.mean);
            std::string report;
            report += "lambda_star: " + format_double(res.lambda_star) + "\n";
            report += "mean_mfpt_star: " + format_double(res.mean_mfpt_star) + "\n";
            out << report;
            if (!r.out_path.empty()) {
                json j;
                j["lambda_star"] = res.lambda_star;
                j["mean_mfpt_star"] = res.mean_mfpt_star;
                detail::write_output(
                    r, r.format == "json" ? j.dump(2) + "\n" : report, out);
            }
            return 0;
        }

        if (command == "converge") {
            std::vector<int> orders;
            std::stringstream ss(f.orders);
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) orders.push_back(std::stoi(tok));
            const auto rows = convergence_study(r.params, orders, r.solver, r.mean);
            std::string csv = "order,mean_mfpt,boundary_residual_l2\n";
            bool any_failed = false;
            for (const auto& row : rows) {
                if (row.error) {
                    any_failed = true;
                    err << "converge: order=" << row.order << " failed: " << *row.error
                        << "\n";
                    continue;
                }
                csv += std::to_string(row.order) + "," + format_double(row.mean_mfpt) +
                       "," + format_double(row.boundary_residual_l2) + "\n";
            }
            detail::write_output(r, csv, out);
            return any_failed ? 2 : 0;
        }

        throw validation_error("unknown subcommand '" + command + "'");
    } catch (const no_interior_minimum& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const validation_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const numerical_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace smd::cli

#endif  // SMD_CLI_HPP
