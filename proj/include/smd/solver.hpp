#ifndef SMD_SOLVER_HPP
#define SMD_SOLVER_HPP

/**
 * @file solver.hpp
 * @brief Least-squares collocation solver for the surface/bulk MFPT system.
 *
 * The series coefficients are determined by enforcing the boundary matching
 * t2(R,theta) = t1(theta) on the whole circle (t1 = 0 on the target arc) at
 * equispaced collocation angles, together with the two exact absorbing
 * conditions t1(eps) = t1(2*pi - eps) = 0 at the arc edges. The collocation
 * rows are solved in least squares; the two edge conditions are exact linear
 * constraints, eliminated before the factorization so they hold to machine
 * precision.
 *
 * The grid is anchored in the target frame and its size depends only on the
 * truncation order, not on the mode, so that
 *  - the general mode at target_center = 0 reproduces the symmetric mode
 *    identically (the sine block decouples), and
 *  - rotating the target rotates the solution exactly.
 */

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "smd/errors.hpp"
#include "smd/geometry.hpp"
#include "smd/quadrature.hpp"
#include "smd/series.hpp"

namespace smd {

enum class SolveMode { symmetric, general };

inline std::string_view to_string(SolveMode m) {
    return m == SolveMode::symmetric ? "symmetric" : "general";
}

inline SolveMode solve_mode_from_string(std::string_view s) {
    if (s == "symmetric") return SolveMode::symmetric;
    if (s == "general") return SolveMode::general;
    throw validation_error("unknown mode '" + std::string(s) + "' (symmetric|general)");
}

enum class MeanConvention { integral, average };

inline std::string_view to_string(MeanConvention c) {
    return c == MeanConvention::integral ? "integral" : "average";
}

inline MeanConvention mean_convention_from_string(std::string_view s) {
    if (s == "integral") return MeanConvention::integral;
    if (s == "average") return MeanConvention::average;
    throw validation_error("unknown mean convention '" + std::string(s) +
                           "' (integral|average)");
}

struct SolverConfig {
    int order = 32;           ///< truncation N (harmonic pairs)
    int oversampling = 4;     ///< collocation points per unknown
    SolveMode mode = SolveMode::general;
    bool gamma_enabled = false;
    int quadrature_points = 2048;
    double rank_tolerance = 1e-12;
};

inline void validate(const SolverConfig& c) {
    if (c.order < 1) throw validation_error("SolverConfig: order must be >= 1");
    if (c.oversampling < 2) throw validation_error("SolverConfig: oversampling must be >= 2");
    if (c.quadrature_points < 64)
        throw validation_error("SolverConfig: quadrature_points must be >= 64");
    if (!(c.rank_tolerance > 0.0) || !std::isfinite(c.rank_tolerance))
        throw validation_error("SolverConfig: rank_tolerance must be positive");
    if (c.gamma_enabled && c.mode == SolveMode::symmetric)
        throw validation_error("SolverConfig: gamma requires general mode");
}

/// Assembled boundary-matching system. The unknown vector is
/// [alpha0, (gamma'), A_1..A_N, B_1..B_N (general mode), c1, c2] where
/// gamma' = alpha0*gamma keeps the rows linear when gamma is enabled.
/// Rows 0..collocation_rows-1 match t2(R,.) against t1 (off-target) or 0
/// (on-target); the last two rows are the absorbing edge conditions, scaled
/// by sqrt(collocation_rows).
struct CollocationSystem {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
    int collocation_rows = 0;
    int unknowns = 0;
    std::vector<double> angles;     ///< target-frame collocation angles
    std::vector<bool> row_on_target;

    // unknown layout
    int order = 0;
    bool gamma_enabled = false;
    SolveMode mode = SolveMode::general;
    int idx_alpha0() const { return 0; }
    int idx_gamma() const { return gamma_enabled ? 1 : -1; }
    int idx_alpha(int n) const { return (gamma_enabled ? 2 : 1) + (n - 1); }
    int idx_beta(int n) const { return idx_alpha(order) + 1 + (n - 1); }
    int idx_c1() const { return unknowns - 2; }
    int idx_c2() const { return unknowns - 1; }
};

namespace detail {

inline int unknown_count(int order, SolveMode mode, bool gamma_enabled) {
    int u = (mode == SolveMode::general ? 2 * order : order) + 3;
    if (gamma_enabled) u += 1;
    return u;
}

struct SeriesFactors {
    double sig, lam, sl, q, rho, L, eps, ra2_4d2, r2_4d2, inv_lam;
};

inline SeriesFactors series_factors(const ProblemParams& p) {
    SeriesFactors f;
    f.sig = sigma(p);
    f.lam = p.transport.lambda;
    f.sl = f.sig * f.lam;
    f.q = std::sqrt(f.sl);
    f.rho = (p.geometry.R - p.transport.a) / p.geometry.R;
    f.eps = p.geometry.target_half_width;
    f.L = off_target_arc_length(p.geometry);
    const double ra = p.geometry.R - p.transport.a;
    f.ra2_4d2 = ra * ra / (4.0 * p.transport.D2);
    f.r2_4d2 = p.geometry.R * p.geometry.R / (4.0 * p.transport.D2);
    f.inv_lam = 1.0 / f.lam;
    return f;
}

/// s_n = rho^n / (n^2/(sigma*lambda) + 1) for n = 1..N.
inline std::vector<double> surface_series_factors(const SeriesFactors& f, int order) {
    std::vector<double> s(static_cast<std::size_t>(order));
    double rn = 1.0;
    for (int n = 1; n <= order; ++n) {
        rn *= f.rho;
        s[static_cast<std::size_t>(n - 1)] = rn / (static_cast<double>(n) * n / f.sl + 1.0);
    }
    return s;
}

}  // namespace detail

/// Build the boundary-matching least-squares system. Throws for degenerate
/// configurations (lambda = 0 or a = R), which route to the closed form.
inline CollocationSystem assemble_collocation_system(const ProblemParams& p,
                                                     const SolverConfig& cfg) {
    validate(p);
    validate(cfg);
    if (is_degenerate(p))
        throw validation_error(
            "degenerate configuration (lambda = 0 or a = R): closed-form branch applies");

    const int N = cfg.order;
    const auto f = detail::series_factors(p);
    const auto s = detail::surface_series_factors(f, N);

    CollocationSystem sys;
    sys.order = N;
    sys.gamma_enabled = cfg.gamma_enabled;
    sys.mode = cfg.mode;
    sys.unknowns = detail::unknown_count(N, cfg.mode, cfg.gamma_enabled);
    // Grid size tracks the full (general-mode) unknown count for this order so
    // the grid, and therefore the fitted even part, is identical across modes.
    const int grid_unknowns = detail::unknown_count(N, SolveMode::general, cfg.gamma_enabled);
    const int M = cfg.oversampling * grid_unknowns;
    sys.collocation_rows = M;
    sys.matrix = Eigen::MatrixXd::Zero(M + 2, sys.unknowns);
    sys.rhs = Eigen::VectorXd::Zero(M + 2);
    sys.angles.resize(static_cast<std::size_t>(M));
    sys.row_on_target.resize(static_cast<std::size_t>(M));

    const bool general = cfg.mode == SolveMode::general;
    const double eps = f.eps;

    auto fill_row = [&](int row, double phi, double weight, bool edge_row) {
        const double theta = global_angle(p.geometry, phi);
        const bool on = !edge_row && (phi <= eps || phi >= two_pi - eps);
        if (!edge_row) {
            sys.angles[static_cast<std::size_t>(row)] = phi;
            sys.row_on_target[static_cast<std::size_t>(row)] = on;
        }
        if (on) {
            // t2(R, theta) = 0:  alpha0 + gamma'*theta + sum A_n cos + B_n sin
            //                    = R^2/(4 D2)
            sys.matrix(row, sys.idx_alpha0()) = 1.0;
            if (cfg.gamma_enabled) sys.matrix(row, sys.idx_gamma()) = theta;
            for (int n = 1; n <= N; ++n) {
                sys.matrix(row, sys.idx_alpha(n)) = std::cos(n * theta);
                if (general) sys.matrix(row, sys.idx_beta(n)) = std::sin(n * theta);
            }
            sys.rhs(row) = f.r2_4d2;
            return;
        }
        // t1(theta) - t2(R, theta) = 0 (alpha0 and gamma' cancel); edge rows
        // are t1 alone. Constants move to the right-hand side.
        const double hp = sinh_ratio(f.q, phi - eps, f.L);
        const double hm = sinh_ratio(f.q, two_pi - eps - phi, f.L);
        if (edge_row) {
            sys.matrix(row, sys.idx_alpha0()) = weight;
            if (cfg.gamma_enabled) sys.matrix(row, sys.idx_gamma()) = weight * theta;
        }
        for (int n = 1; n <= N; ++n) {
            const double sn = s[static_cast<std::size_t>(n - 1)];
            const double factor = edge_row ? sn : (sn - 1.0);
            sys.matrix(row, sys.idx_alpha(n)) = weight * factor * std::cos(n * theta);
            if (general) sys.matrix(row, sys.idx_beta(n)) = weight * factor * std::sin(n * theta);
        }
        sys.matrix(row, sys.idx_c1()) = weight * hp;
        sys.matrix(row, sys.idx_c2()) = weight * hm;
        sys.rhs(row) = edge_row ? weight * (f.ra2_4d2 - f.inv_lam)
                                : -(f.inv_lam - f.ra2_4d2 + f.r2_4d2);
    };

    for (int j = 0; j < M; ++j) fill_row(j, two_pi * j / M, 1.0, false);
    const double w = std::sqrt(static_cast<double>(M));
    fill_row(M, eps, w, true);
    fill_row(M + 1, two_pi - eps, w, true);
    return sys;
}

struct BoundaryResidual {
    double sup = 0.0;
    double l2 = 0.0;
};

struct SpectralSolution {
    SeriesCoefficients coeffs;
    ProblemParams params;
    SolverConfig config;
    bool degenerate = false;
    double boundary_residual_sup = 0.0;
    double boundary_residual_l2 = 0.0;
    double ode_residual_max = 0.0;
    double condition_estimate = 0.0;

    /// Surface MFPT at a boundary angle; zero on the target arc.
    double surface_mfpt(double theta) const {
        if (degenerate) return smd::surface_mfpt_degenerate(params, theta);
        if (on_target(params.geometry, theta)) return 0.0;
        return smd::surface_mfpt(coeffs, params, theta);
    }

    /// Bulk MFPT at an interior point. Not defined on the degenerate branch.
    double bulk_mfpt(double r, double theta) const {
        if (degenerate)
            throw numerical_error("bulk MFPT undefined for degenerate branch");
        return smd::bulk_mfpt(coeffs, params, r, theta);
    }
};

/// Raised when the fitted boundary match is too poor to trust (truncation
/// order too small for the target width, or the mode cannot represent the
/// solution). Carries the completed solution so diagnostics stay observable.
class residual_floor_error : public numerical_error {
public:
    residual_floor_error(const std::string& msg, SpectralSolution sol)
        : numerical_error(msg), solution(std::move(sol)) {}
    SpectralSolution solution;
};

namespace detail {

/// Boundary-matching residuals on an equispaced verification grid offset by
/// half a step, so no verification angle coincides with a collocation angle.
inline BoundaryResidual boundary_residual_impl(const SpectralSolution& sol, int grid_size) {
    const Geometry& g = sol.params.geometry;
    const double eps = g.target_half_width;
    double sup = 0.0, sum_sq = 0.0;
    for (int k = 0; k < grid_size; ++k) {
        const double phi = (k + 0.5) * two_pi / grid_size;
        const double theta = global_angle(g, phi);
        const double t2 = smd::bulk_mfpt(sol.coeffs, sol.params, g.R, theta);
        const bool on = phi <= eps || phi >= two_pi - eps;
        const double r =
            on ? std::abs(t2) : std::abs(t2 - smd::surface_mfpt(sol.coeffs, sol.params, theta));
        sup = std::max(sup, r);
        sum_sq += r * r;
    }
    return {sup, std::sqrt(sum_sq / grid_size)};
}

}  // namespace detail

/// Determine the series coefficients for the given parameters. Degenerate
/// configurations return the closed-form branch; otherwise the collocation
/// system is solved by rank-revealing SVD with the two edge conditions
/// eliminated exactly, and residual diagnostics are evaluated on a
/// 4096-point verification grid disjoint from the collocation grid.
inline SpectralSolution solve(const ProblemParams& p, const SolverConfig& cfg) {
    validate(p);
    validate(cfg);

    SpectralSolution sol;
    sol.params = p;
    sol.config = cfg;
    sol.coeffs = SeriesCoefficients::zero(cfg.order);
    if (is_degenerate(p)) {
        sol.degenerate = true;
        return sol;
    }

    const CollocationSystem sys = assemble_collocation_system(p, cfg);
    const int U = sys.unknowns;
    const int M = sys.collocation_rows;
    const double w = std::sqrt(static_cast<double>(M));

    // Exact edge conditions: the last two rows with their weight divided
    // out. c1 and c2 appear in them through the exchange matrix
    // [[0,1],[1,0]], so they eliminate cleanly and are recovered after the
    // reduced least-squares solve.
    const Eigen::MatrixXd C = sys.matrix.bottomRows(2) / w;
    const Eigen::Vector2d d = sys.rhs.tail(2) / w;
    const Eigen::Matrix2d Cc = C.rightCols(2);
    const Eigen::MatrixXd Crest = C.leftCols(U - 2);
    const Eigen::Matrix2d Cci = Cc.inverse();

    const Eigen::MatrixXd Acoll = sys.matrix.topRows(M);
    const Eigen::VectorXd bcoll = sys.rhs.head(M);
    const Eigen::MatrixXd reduced =
        Acoll.leftCols(U - 2) - Acoll.rightCols(2) * (Cci * Crest);
    const Eigen::VectorXd rhs_reduced = bcoll - Acoll.rightCols(2) * (Cci * d);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(reduced,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(cfg.rank_tolerance);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    sol.condition_estimate =
        smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    if (svd.rank() < U - 2)
        throw ill_conditioned_error(
            "collocation system ill-conditioned beyond rank_tolerance (condition ~" +
                std::to_string(sol.condition_estimate) + ")",
            sol.condition_estimate);

    const Eigen::VectorXd x = svd.solve(rhs_reduced);
    const Eigen::Vector2d c = Cci * (d - Crest * x);

    SeriesCoefficients& co = sol.coeffs;
    co.alpha0 = x(sys.idx_alpha0());
    if (cfg.gamma_enabled) {
        const double g = x(sys.idx_gamma());
        if (co.alpha0 == 0.0) {
            if (g != 0.0)
                throw numerical_error("gamma not recoverable: alpha0 vanished");
        } else {
            co.gamma = g / co.alpha0;
        }
    }
    for (int n = 1; n <= cfg.order; ++n) {
        co.alpha[static_cast<std::size_t>(n - 1)] = x(sys.idx_alpha(n));
        if (cfg.mode == SolveMode::general)
            co.beta[static_cast<std::size_t>(n - 1)] = x(sys.idx_beta(n));
    }
    co.c1 = c(0);
    co.c2 = c(1);

    // Diagnostics on the verification grid.
    constexpr int verification_grid = 4096;
    const BoundaryResidual br = detail::boundary_residual_impl(sol, verification_grid);
    sol.boundary_residual_sup = br.sup;
    sol.boundary_residual_l2 = br.l2;

    const double eps = p.geometry.target_half_width;
    double ode_max = 0.0, t1_scale = 0.0;
    for (int k = 0; k < verification_grid; ++k) {
        const double phi = (k + 0.5) * two_pi / verification_grid;
        if (phi <= eps || phi >= two_pi - eps) continue;
        const double theta = global_angle(p.geometry, phi);
        ode_max = std::max(ode_max, std::abs(surface_ode_residual(co, p, theta)));
        t1_scale = std::max(t1_scale, std::abs(smd::surface_mfpt(co, p, theta)));
    }
    sol.ode_residual_max = ode_max;

    if (sol.boundary_residual_sup > 0.05 * t1_scale)
        throw residual_floor_error(
            "boundary residual floor exceeded (sup " +
                std::to_string(sol.boundary_residual_sup) + " vs solution scale " +
                std::to_string(t1_scale) + "): truncation order too small for this target",
            sol);
    return sol;
}

/// Boundary-matching residual of a non-degenerate solution on a fresh
/// equispaced grid (offset by half a step from any collocation layout).
inline BoundaryResidual boundary_residual(const SpectralSolution& sol, int grid_size) {
    if (grid_size < 2) throw validation_error("boundary_residual: grid_size must be >= 2");
    if (sol.degenerate)
        throw numerical_error("diagnostic undefined for degenerate branch");
    return detail::boundary_residual_impl(sol, grid_size);
}

/// Mean surface MFPT over the off-target arc by composite Gauss-Legendre
/// quadrature: `integral` is the unnormalized arc integral of t1, `average`
/// divides by the arc length 2*pi - 2*eps.
inline double mean_surface_mfpt(const SpectralSolution& sol, MeanConvention convention) {
    const Geometry& g = sol.params.geometry;
    const double eps = g.target_half_width;
    const double L = off_target_arc_length(g);
    const double value = integrate(
        [&](double phi) { return sol.surface_mfpt(global_angle(g, phi)); }, eps,
        two_pi - eps, sol.config.quadrature_points);
    return convention == MeanConvention::integral ? value : value / L;
}

struct ConvergenceRow {
    int order = 0;
    double mean_mfpt = 0.0;
    double boundary_residual_l2 = 0.0;
    std::optional<std::string> error;  ///< set when the solve failed
};

/// Solve at each truncation order and tabulate mean MFPT and boundary
/// residual. Failed rows are marked and the study continues.
inline std::vector<ConvergenceRow> convergence_study(const ProblemParams& p,
                                                     const std::vector<int>& orders,
                                                     const SolverConfig& base,
                                                     MeanConvention convention) {
    if (orders.empty()) throw validation_error("convergence_study: empty order list");
    for (std::size_t i = 1; i < orders.size(); ++i)
        if (orders[i] <= orders[i - 1])
            throw validation_error("convergence_study: orders must be strictly increasing");
    std::vector<ConvergenceRow> rows;
    rows.reserve(orders.size());
    for (int N : orders) {
        ConvergenceRow row;
        row.order = N;
        SolverConfig cfg = base;
        cfg.order = N;
        try {
            const SpectralSolution sol = solve(p, cfg);
            row.mean_mfpt = mean_surface_mfpt(sol, convention);
            row.boundary_residual_l2 = sol.boundary_residual_l2;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace smd

#endif  // SMD_SOLVER_HPP
