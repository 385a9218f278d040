#ifndef SMD_SWEEP_HPP
#define SMD_SWEEP_HPP

/// @file sweep.hpp
/// @brief Desorption-rate sweeps and scalar minimization of the mean MFPT.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "smd/errors.hpp"
#include "smd/geometry.hpp"
#include "smd/solver.hpp"

namespace smd {

struct SweepSpec {
    double lambda_min = 0.0;
    double lambda_max = 1.0;
    int points = 25;
    enum class Scale { linear, log } scale = Scale::linear;
};

inline void validate(const SweepSpec& s) {
    if (!std::isfinite(s.lambda_min) || !std::isfinite(s.lambda_max) ||
        s.lambda_min < 0.0 || !(s.lambda_min < s.lambda_max))
        throw validation_error("SweepSpec: requires 0 <= lambda_min < lambda_max");
    if (s.points < 2) throw validation_error("SweepSpec: points must be >= 2");
    if (s.scale == SweepSpec::Scale::log && s.lambda_min <= 0.0)
        throw validation_error("SweepSpec: log scale requires lambda_min > 0");
}

/// The lambda grid of a sweep, ascending, endpoints exact.
inline std::vector<double> lambda_grid(const SweepSpec& s) {
    validate(s);
    std::vector<double> grid(static_cast<std::size_t>(s.points));
    const int last = s.points - 1;
    for (int i = 0; i <= last; ++i) {
        const double f = static_cast<double>(i) / last;
        grid[static_cast<std::size_t>(i)] =
            s.scale == SweepSpec::Scale::linear
                ? s.lambda_min + f * (s.lambda_max - s.lambda_min)
                : std::exp(std::log(s.lambda_min) +
                           f * (std::log(s.lambda_max) - std::log(s.lambda_min)));
    }
    grid.front() = s.lambda_min;
    grid.back() = s.lambda_max;
    return grid;
}

struct SweepRecord {
    double lambda = 0.0;
    double mean_mfpt = 0.0;
    double boundary_residual_l2 = 0.0;  ///< 0 for the closed-form lambda = 0 row
    std::string mode;
};

struct SweepFailure {
    double lambda = 0.0;
    std::string message;
};

struct SweepResult {
    std::vector<SweepRecord> records;
    std::vector<SweepFailure> failures;
};

/// One solve per grid lambda (the lambda = 0 grid point takes the
/// closed-form branch). Per-row failures are recorded and the sweep
/// continues.
inline SweepResult sweep_lambda(const ProblemParams& base, const SweepSpec& spec,
                                const SolverConfig& cfg, MeanConvention convention) {
    validate(base);
    validate(cfg);
    SweepResult out;
    for (double lambda : lambda_grid(spec)) {
        ProblemParams p = base;
        p.transport.lambda = lambda;
        try {
            const SpectralSolution sol = solve(p, cfg);
            out.records.push_back({lambda, mean_surface_mfpt(sol, convention),
                                   sol.boundary_residual_l2, std::string(to_string(cfg.mode))});
        } catch (const std::exception& e) {
            out.failures.push_back({lambda, e.what()});
        }
    }
    return out;
}

/// Golden-section minimization of f on [lo, hi]. Requires an interior
/// bracket: f at the midpoint must lie below f at both ends, otherwise
/// no_interior_minimum is thrown. Terminates when the bracket width drops
/// below rel_tol times the current midpoint; returns (midpoint, f(midpoint)).
template <typename F>
std::pair<double, double> golden_section_minimize(F&& f, double lo, double hi,
                                                  double rel_tol, int max_iter = 200) {
    if (!(lo < hi)) throw validation_error("golden_section_minimize: requires lo < hi");
    if (!(rel_tol > 0.0)) throw validation_error("golden_section_minimize: rel_tol must be > 0");

    const double f_lo = f(lo), f_hi = f(hi), f_mid = f(0.5 * (lo + hi));
    if (!(f_mid < f_lo && f_mid < f_hi))
        throw no_interior_minimum("no interior minimum in bracket [" + std::to_string(lo) +
                                  ", " + std::to_string(hi) + "]");

    constexpr double inv_phi = 0.6180339887498948482;  // 1/golden ratio
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < max_iter && (b - a) > rel_tol * (0.5 * (a + b)); ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    const double mid = 0.5 * (a + b);
    return {mid, f(mid)};
}

struct OptimizeResult {
    double lambda_star = 0.0;
    double mean_mfpt_star = 0.0;
};

/// Minimize lambda -> mean MFPT over [lo, hi] by golden-section search.
inline OptimizeResult optimize_lambda(const ProblemParams& base, double lo, double hi,
                                      double rel_tol, const SolverConfig& cfg,
                                      MeanConvention convention) {
    validate(base);
    validate(cfg);
    if (!(lo > 0.0) || !(lo < hi))
        throw validation_error("optimize_lambda: requires 0 < lo < hi");
    auto objective = [&](double lambda) {
        ProblemParams p = base;
        p.transport.lambda = lambda;
        return mean_surface_mfpt(solve(p, cfg), convention);
    };
    const auto [lambda_star, value] = golden_section_minimize(objective, lo, hi, rel_tol);
    return {lambda_star, value};
}

}  // namespace smd

#endif  // SMD_SWEEP_HPP
