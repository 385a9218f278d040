#ifndef SMD_SERIES_HPP
#define SMD_SERIES_HPP

/**
 * @file series.hpp
 * @brief Closed-form evaluators for the truncated harmonic representation of
 *        the mean first-passage time (MFPT).
 *
 * The bulk MFPT is represented as a harmonic series plus the radial
 * particular term:
 *
 *   t2(r,theta) = alpha0*(1 + gamma*theta) - r^2/(4*D2)
 *               + sum_{n>=1} (r/R)^n [ A_n cos(n*theta) + B_n sin(n*theta) ]
 *
 * where A_n, B_n are the stored coefficients, pre-scaled by R^n so that all
 * boundary matrix entries are O(1) regardless of truncation order.
 *
 * Given that series, the surface MFPT on the off-target arc solves
 *
 *   t1'' - sigma*lambda*t1 = -sigma*(1 + lambda*t2(R-a, theta))
 *
 * exactly:
 *
 *   t1(theta) = c1*Hp(phi) + c2*Hm(phi) + alpha0*(1 + gamma*theta)
 *             - (R-a)^2/(4*D2) + 1/lambda
 *             + sum_{n>=1} s_n [ A_n cos(n*theta) + B_n sin(n*theta) ],
 *     s_n = ((R-a)/R)^n / (n^2/(sigma*lambda) + 1),
 *
 * with phi the target-frame angle and Hp/Hm a bounded basis of the
 * homogeneous solutions (see sinh_ratio). When lambda = 0 or a = R the
 * surface equation decouples and t1 is the explicit parabola of
 * surface_mfpt_degenerate.
 */

#include <cmath>
#include <cstddef>
#include <vector>

#include "smd/errors.hpp"
#include "smd/geometry.hpp"

namespace smd {

/// Harmonic series coefficients at truncation order N.
/// alpha/beta hold the cosine/sine amplitudes scaled by R^n; c1, c2 are the
/// amplitudes of the two homogeneous surface solutions.
struct SeriesCoefficients {
    int order = 0;
    double alpha0 = 0.0;
    double gamma = 0.0;
    std::vector<double> alpha;
    std::vector<double> beta;
    double c1 = 0.0;
    double c2 = 0.0;

    static SeriesCoefficients zero(int order) {
        SeriesCoefficients c;
        c.order = order;
        c.alpha.assign(static_cast<std::size_t>(order), 0.0);
        c.beta.assign(static_cast<std::size_t>(order), 0.0);
        return c;
    }
};

inline void validate(const SeriesCoefficients& c) {
    if (c.order < 0)
        throw validation_error("SeriesCoefficients: negative order");
    if (c.alpha.size() != static_cast<std::size_t>(c.order) ||
        c.beta.size() != static_cast<std::size_t>(c.order))
        throw validation_error("SeriesCoefficients: alpha/beta must have exactly N entries");
    if (!std::isfinite(c.alpha0) || !std::isfinite(c.gamma) ||
        !std::isfinite(c.c1) || !std::isfinite(c.c2))
        throw validation_error("SeriesCoefficients: non-finite entry");
    for (double v : c.alpha)
        if (!std::isfinite(v)) throw validation_error("SeriesCoefficients: non-finite alpha");
    for (double v : c.beta)
        if (!std::isfinite(v)) throw validation_error("SeriesCoefficients: non-finite beta");
}

/// sinh(q*x)/sinh(q*span), computed without evaluating large sinh arguments.
/// For x in [0, span] the value lies in [0, 1] for any q >= 0, so the pair
/// { sinh(q*(phi-eps))/sinh(q*L), sinh(q*(2*pi-eps-phi))/sinh(q*L) } spans the
/// homogeneous solutions e^{+-q*theta} while staying bounded on the arc.
inline double sinh_ratio(double q, double x, double span) {
    if (q == 0.0) return x / span;
    return std::exp(q * (x - span)) * std::expm1(-2.0 * q * x) / std::expm1(-2.0 * q * span);
}

namespace detail {

inline double off_target_frame_angle(const Geometry& g, double theta) {
    const double eps = g.target_half_width;
    double phi = target_frame_angle(g, theta);
    // Queries exactly at the arc edges survive the frame round-trip.
    const double slack = 1e-12 * two_pi;
    if (phi < eps - slack || phi > two_pi - eps + slack)
        throw validation_error("surface MFPT queried on the target arc");
    if (phi < eps) phi = eps;
    if (phi > two_pi - eps) phi = two_pi - eps;
    return phi;
}

inline void require_non_degenerate(const ProblemParams& p) {
    if (is_degenerate(p))
        throw validation_error(
            "degenerate configuration (lambda = 0 or a = R): use surface_mfpt_degenerate");
}

}  // namespace detail

/// Bulk MFPT t2(r, theta) for the given coefficients. Requires 0 <= r <= R.
inline double bulk_mfpt(const SeriesCoefficients& c, const ProblemParams& p,
                        double r, double theta) {
    if (!std::isfinite(r) || !std::isfinite(theta))
        throw validation_error("bulk_mfpt: non-finite input");
    const double R = p.geometry.R;
    if (r < 0.0 || r > R)
        throw validation_error("bulk_mfpt: r outside [0, R]");
    theta = wrap_angle(theta);
    const double x = r / R;
    double acc = c.alpha0 * (1.0 + c.gamma * theta) - r * r / (4.0 * p.transport.D2);
    double xn = 1.0;
    for (int n = 1; n <= c.order; ++n) {
        xn *= x;
        const std::size_t k = static_cast<std::size_t>(n - 1);
        acc += xn * (c.alpha[k] * std::cos(n * theta) + c.beta[k] * std::sin(n * theta));
    }
    return acc;
}

/// Surface MFPT t1(theta) on the off-target arc (non-degenerate
/// configurations: lambda > 0 and a < R).
inline double surface_mfpt(const SeriesCoefficients& c, const ProblemParams& p,
                           double theta) {
    if (!std::isfinite(theta)) throw validation_error("surface_mfpt: non-finite angle");
    detail::require_non_degenerate(p);
    theta = wrap_angle(theta);
    const double phi = detail::off_target_frame_angle(p.geometry, theta);
    const double eps = p.geometry.target_half_width;
    const double L = off_target_arc_length(p.geometry);
    const double lam = p.transport.lambda;
    const double sl = sigma(p) * lam;
    const double q = std::sqrt(sl);
    const double rho = (p.geometry.R - p.transport.a) / p.geometry.R;

    double acc = c.c1 * sinh_ratio(q, phi - eps, L) + c.c2 * sinh_ratio(q, two_pi - eps - phi, L);
    const double ra = p.geometry.R - p.transport.a;
    acc += c.alpha0 * (1.0 + c.gamma * theta) - ra * ra / (4.0 * p.transport.D2) + 1.0 / lam;
    double rn = 1.0;
    for (int n = 1; n <= c.order; ++n) {
        rn *= rho;
        const double sn = rn / (static_cast<double>(n) * n / sl + 1.0);
        const std::size_t k = static_cast<std::size_t>(n - 1);
        acc += sn * (c.alpha[k] * std::cos(n * theta) + c.beta[k] * std::sin(n * theta));
    }
    return acc;
}

/// Surface MFPT for the degenerate branch (lambda = 0 or a = R) where the
/// surface equation reduces to t1'' = -sigma with absorbing endpoints:
///
///   t1(phi) = sigma*(2*pi - eps - phi)*(phi - eps)/2,  phi in [eps, 2*pi-eps],
///
/// in the target frame; zero on the target arc itself.
inline double surface_mfpt_degenerate(const ProblemParams& p, double theta) {
    if (!std::isfinite(theta))
        throw validation_error("surface_mfpt_degenerate: non-finite angle");
    if (!is_degenerate(p))
        throw validation_error(
            "surface_mfpt_degenerate requires lambda = 0 or a = R; use surface_mfpt");
    const double eps = p.geometry.target_half_width;
    const double phi = target_frame_angle(p.geometry, theta);
    if (phi <= eps || phi >= two_pi - eps) return 0.0;
    return sigma(p) * (two_pi - eps - phi) * (phi - eps) / 2.0;
}

/// Residual of the surface equation,
///   t1''(theta) - sigma*lambda*t1(theta) + sigma*(1 + lambda*t2(R-a, theta)),
/// with the second derivative taken analytically. Zero (to roundoff) for
/// every coefficient set, because the surface representation is constructed
/// as the exact solution driven by the bulk series.
inline double surface_ode_residual(const SeriesCoefficients& c, const ProblemParams& p,
                                   double theta) {
    if (!std::isfinite(theta))
        throw validation_error("surface_ode_residual: non-finite angle");
    detail::require_non_degenerate(p);
    theta = wrap_angle(theta);
    const double phi = detail::off_target_frame_angle(p.geometry, theta);
    const double eps = p.geometry.target_half_width;
    const double L = off_target_arc_length(p.geometry);
    const double sig = sigma(p);
    const double lam = p.transport.lambda;
    const double sl = sig * lam;
    const double q = std::sqrt(sl);
    const double rho = (p.geometry.R - p.transport.a) / p.geometry.R;

    // t1'' term by term: the homogeneous pair reproduces q^2 * itself, the
    // constant and linear terms vanish, each harmonic picks up -n^2.
    double d2 = sl * (c.c1 * sinh_ratio(q, phi - eps, L) +
                      c.c2 * sinh_ratio(q, two_pi - eps - phi, L));
    double rn = 1.0;
    for (int n = 1; n <= c.order; ++n) {
        rn *= rho;
        const double n2 = static_cast<double>(n) * n;
        const double sn = rn / (n2 / sl + 1.0);
        const std::size_t k = static_cast<std::size_t>(n - 1);
        d2 -= n2 * sn * (c.alpha[k] * std::cos(n * theta) + c.beta[k] * std::sin(n * theta));
    }

    const double t1 = surface_mfpt(c, p, theta);
    const double t2 = bulk_mfpt(c, p, p.geometry.R - p.transport.a, theta);
    return d2 - sl * t1 + sig * (1.0 + lam * t2);
}

/// Residual of the bulk equation, D2*Laplacian(t2) + 1, with the Laplacian
/// taken term by term. Every harmonic term contributes exactly zero and the
/// -r^2/(4*D2) term contributes -1/D2, so the result is zero up to roundoff
/// for any coefficient set. Requires an interior point, 0 < r < R.
inline double bulk_pde_residual(const SeriesCoefficients& c, const ProblemParams& p,
                                double r, double theta) {
    if (!std::isfinite(r) || !std::isfinite(theta))
        throw validation_error("bulk_pde_residual: non-finite input");
    const double R = p.geometry.R;
    if (r <= 0.0)
        throw validation_error("bulk_pde_residual: requires r > 0 (polar Laplacian of the "
                               "angular terms divides by r)");
    if (r >= R) throw validation_error("bulk_pde_residual: requires r < R");
    theta = wrap_angle(theta);

    const double x = r / R;
    // Radial particular term; the constant and gamma*theta terms have zero
    // radial derivatives and zero second angular derivative.
    double lap = -1.0 / p.transport.D2;
    double xn = 1.0;
    for (int n = 1; n <= c.order; ++n) {
        xn *= x;
        // (d_rr + d_r/r + d_tt/r^2) r^n trig(n theta)
        //   = [n(n-1) + n - n^2] r^(n-2) trig(n theta), identically zero
        const double radial = static_cast<double>(n) * (n - 1) + n - static_cast<double>(n) * n;
        const std::size_t k = static_cast<std::size_t>(n - 1);
        lap += radial * xn / (r * r) *
               (c.alpha[k] * std::cos(n * theta) + c.beta[k] * std::sin(n * theta));
    }
    return p.transport.D2 * lap + 1.0;
}

}  // namespace smd

#endif  // SMD_SERIES_HPP
