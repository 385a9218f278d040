#ifndef SMD_QUADRATURE_HPP
#define SMD_QUADRATURE_HPP

/// @file quadrature.hpp
/// @brief Gauss-Legendre nodes/weights and composite integration on an
///        interval.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "smd/errors.hpp"

namespace smd {

struct GaussLegendreRule {
    std::vector<double> nodes;   ///< on [-1, 1], ascending
    std::vector<double> weights;
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
inline GaussLegendreRule gauss_legendre(int n) {
    if (n < 1) throw validation_error("gauss_legendre: order must be >= 1");
    GaussLegendreRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const std::size_t lo = static_cast<std::size_t>(i);
        const std::size_t hi = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[lo] = -x;
        rule.nodes[hi] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    return rule;
}

/// Composite Gauss-Legendre integral of f over [a, b] using panels of a
/// 16-point rule; the panel count is chosen so the total node count is at
/// least `points`.
template <typename F>
double integrate(F&& f, double a, double b, int points) {
    if (!(b >= a)) throw validation_error("integrate: requires b >= a");
    if (points < 1) throw validation_error("integrate: requires points >= 1");
    constexpr int panel_order = 16;
    const int panels = (points + panel_order - 1) / panel_order;
    static const GaussLegendreRule rule = gauss_legendre(panel_order);
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * width;
        const double half = 0.5 * width;
        double panel_sum = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k)
            panel_sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
        total += half * panel_sum;
    }
    return total;
}

}  // namespace smd

#endif  // SMD_QUADRATURE_HPP
