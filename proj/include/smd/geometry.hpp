#ifndef SMD_GEOMETRY_HPP
#define SMD_GEOMETRY_HPP

/**
 * @file geometry.hpp
 * @brief Problem geometry and transport parameters for surface-mediated
 *        diffusion in a disk.
 *
 * A molecule diffuses inside a disk of radius R, alternating between
 * diffusion along the boundary circle (coefficient D1) and diffusion in the
 * bulk (coefficient D2). It desorbs from the boundary at rate lambda and is
 * ejected radially to radius R - a. An absorbing target arc of half-width
 * eps sits on the boundary, centered at angle theta_c.
 */

#include <cmath>
#include <string>

#include "smd/errors.hpp"

namespace smd {

inline constexpr double two_pi = 6.28318530717958647692528676655900577;

/// Normalize an angle into [0, 2*pi).
inline double wrap_angle(double theta) {
    double r = std::fmod(theta, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

/// Disk radius and absorbing target arc.
struct Geometry {
    double R = 1.0;                 ///< disk radius
    double target_center = 0.0;     ///< arc center theta_c, normalized to [0, 2*pi)
    double target_half_width = 0.3; ///< arc half-width eps, 0 < eps < pi
};

inline void validate(const Geometry& g) {
    if (!std::isfinite(g.R) || g.R <= 0.0)
        throw validation_error("Geometry: R must be positive and finite");
    if (!std::isfinite(g.target_center))
        throw validation_error("Geometry: target_center must be finite");
    if (!std::isfinite(g.target_half_width) || g.target_half_width <= 0.0 ||
        g.target_half_width >= M_PI)
        throw validation_error("Geometry: target_half_width must lie in (0, pi)");
}

/// Surface/bulk diffusion coefficients, desorption rate, ejection distance.
struct Transport {
    double D1 = 1.0;     ///< surface diffusion coefficient
    double D2 = 1.0;     ///< bulk diffusion coefficient
    double lambda = 1.0; ///< desorption rate, >= 0
    double a = 0.1;      ///< ejection distance, 0 <= a <= R
};

inline void validate(const Transport& t) {
    if (!std::isfinite(t.D1) || t.D1 <= 0.0)
        throw validation_error("Transport: D1 must be positive and finite");
    if (!std::isfinite(t.D2) || t.D2 <= 0.0)
        throw validation_error("Transport: D2 must be positive and finite");
    if (!std::isfinite(t.lambda) || t.lambda < 0.0)
        throw validation_error("Transport: lambda must be nonnegative and finite");
    if (!std::isfinite(t.a) || t.a < 0.0)
        throw validation_error("Transport: a must be nonnegative and finite");
}

struct ProblemParams {
    Geometry geometry;
    Transport transport;
};

inline void validate(const ProblemParams& p) {
    validate(p.geometry);
    validate(p.transport);
    if (p.transport.a > p.geometry.R)
        throw validation_error("ProblemParams: ejection distance a exceeds radius R");
    const double s = p.geometry.R * p.geometry.R / p.transport.D1;
    if (!std::isfinite(s) || s <= 0.0)
        throw validation_error("ProblemParams: sigma = R^2/D1 is not positive finite");
}

/// sigma = R^2 / D1, the squared boundary length scale over the surface
/// diffusion coefficient. Natural time unit of the surface process.
inline double sigma(const ProblemParams& p) {
    return p.geometry.R * p.geometry.R / p.transport.D1;
}

/// True when the closed-form branch applies (no desorption, or ejection to
/// the disk center). The surface equation then decouples from the bulk.
inline bool is_degenerate(const ProblemParams& p) {
    return p.transport.lambda == 0.0 || p.transport.a == p.geometry.R;
}

/// Angle in the target-centered frame: phi = wrap(theta - theta_c).
/// In this frame the target arc is [0, eps] U [2*pi - eps, 2*pi) and the
/// off-target interval is contiguous: [eps, 2*pi - eps].
inline double target_frame_angle(const Geometry& g, double theta) {
    return wrap_angle(theta - g.target_center);
}

/// Inverse of target_frame_angle.
inline double global_angle(const Geometry& g, double phi) {
    return wrap_angle(g.target_center + phi);
}

/// Whether a boundary angle lies on the absorbing target arc.
inline bool on_target(const Geometry& g, double theta) {
    const double phi = target_frame_angle(g, theta);
    return phi <= g.target_half_width || phi >= two_pi - g.target_half_width;
}

/// Length of the off-target arc in the target frame: L = 2*pi - 2*eps.
inline double off_target_arc_length(const Geometry& g) {
    return two_pi - 2.0 * g.target_half_width;
}

}  // namespace smd

#endif  // SMD_GEOMETRY_HPP
