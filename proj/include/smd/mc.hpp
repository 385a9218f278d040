#ifndef SMD_MC_HPP
#define SMD_MC_HPP

/**
 * @file mc.hpp
 * @brief Stochastic simulator of the surface-mediated diffusion process,
 *        used as an independent oracle for the spectral solver.
 *
 * Each path alternates:
 *  - surface phase: Euler-Maruyama angular diffusion with per-step variance
 *    2*(D1/R^2)*dt_surface; absorption is detected by arc crossing before
 *    desorption is sampled (probability 1 - exp(-lambda*dt_surface) per
 *    step); on desorption the particle is ejected radially to radius R - a;
 *  - bulk phase: isotropic Gaussian increments with per-coordinate variance
 *    2*D2*dt_bulk; on crossing r >= R the particle adsorbs at the angle of
 *    the endpoint projected to the circle. Adsorbing onto the target arc is
 *    a capture.
 *
 * Paths are seeded counter-style from (master seed, path index) so serial
 * and parallel runs agree bit for bit.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "smd/errors.hpp"
#include "smd/geometry.hpp"

namespace smd {

/// SplitMix64 mixing step; the standard way to spread a 64-bit counter into
/// an independent-looking stream seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Deterministic per-path seed from the master seed and path index.
inline std::uint64_t path_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 1));
}

struct McConfig {
    long long paths = 50000;
    double dt_surface = 1e-4;  ///< surface-phase time step
    double dt_bulk = 1e-4;     ///< bulk-phase time step
    std::uint64_t seed = 1;
    double max_time = 1e4;     ///< per-path cap; paths reaching it are censored
    int threads = 0;           ///< 0 = hardware concurrency
};

/// Default stepping: dt = 1e-4 * R^2/max(D1,D2), cap 1e4 * R^2/min(D1,D2).
inline McConfig default_mc_config(const ProblemParams& p) {
    McConfig c;
    const double r2 = p.geometry.R * p.geometry.R;
    c.dt_surface = c.dt_bulk = 1e-4 * r2 / std::max(p.transport.D1, p.transport.D2);
    c.max_time = 1e4 * r2 / std::min(p.transport.D1, p.transport.D2);
    return c;
}

inline void validate(const McConfig& c, const ProblemParams& p) {
    if (c.paths < 1) throw validation_error("McConfig: paths must be >= 1");
    const double bound =
        1e-2 * p.geometry.R * p.geometry.R / std::max(p.transport.D1, p.transport.D2);
    for (double dt : {c.dt_surface, c.dt_bulk})
        if (!(dt > 0.0) || dt > bound || !std::isfinite(dt))
            throw validation_error(
                "McConfig: dt must satisfy 0 < dt <= 1e-2 * R^2/max(D1,D2)");
    if (!(c.max_time > 0.0) || !std::isfinite(c.max_time))
        throw validation_error("McConfig: max_time must be positive");
    if (c.threads < 0) throw validation_error("McConfig: threads must be >= 0");
}

enum class StartPhase { surface, bulk, uniform_off_target };

/// Where a path begins: a boundary angle, a bulk point, or the tag for
/// start angles stratified uniformly over the off-target arc.
struct StartState {
    StartPhase phase = StartPhase::uniform_off_target;
    double theta = 0.0;  ///< global angle (surface and bulk starts)
    double r = 0.0;      ///< radius (bulk starts only)

    static StartState surface(double theta) { return {StartPhase::surface, theta, 0.0}; }
    static StartState bulk(double r, double theta) { return {StartPhase::bulk, theta, r}; }
    static StartState uniform() { return {}; }
};

inline void validate(const StartState& s, const ProblemParams& p) {
    switch (s.phase) {
        case StartPhase::surface:
            if (!std::isfinite(s.theta))
                throw validation_error("StartState: non-finite angle");
            if (on_target(p.geometry, s.theta))
                throw validation_error("StartState: surface start lies on the target arc");
            return;
        case StartPhase::bulk:
            if (!std::isfinite(s.theta) || !std::isfinite(s.r))
                throw validation_error("StartState: non-finite bulk start");
            if (s.r < 0.0 || s.r >= p.geometry.R)
                throw validation_error("StartState: bulk start requires 0 <= r < R");
            return;
        case StartPhase::uniform_off_target:
            return;
    }
}

struct PathResult {
    double time = 0.0;
    bool censored = false;
    long long desorptions = 0;
};

/// First-passage time of one path. Requires a concrete start (surface or
/// bulk); the uniform tag is resolved by estimate_mfpt.
inline PathResult simulate_first_passage(const ProblemParams& p, const StartState& start,
                                         const McConfig& cfg, std::uint64_t seed) {
    validate(p);
    validate(cfg, p);
    validate(start, p);
    if (start.phase == StartPhase::uniform_off_target)
        throw validation_error("simulate_first_passage requires a concrete start state");

    const Geometry& g = p.geometry;
    const double eps = g.target_half_width;
    const double lam = p.transport.lambda;
    const double eject_r = g.R - p.transport.a;
    const double surface_step = std::sqrt(2.0 * (p.transport.D1 / (g.R * g.R)) * cfg.dt_surface);
    const double bulk_step = std::sqrt(2.0 * p.transport.D2 * cfg.dt_bulk);
    const double p_desorb = lam > 0.0 ? -std::expm1(-lam * cfg.dt_surface) : 0.0;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    PathResult out;
    bool on_surface = start.phase == StartPhase::surface;
    double phi = target_frame_angle(g, start.theta);
    double x = 0.0, y = 0.0;
    if (!on_surface) {
        x = start.r * std::cos(phi);
        y = start.r * std::sin(phi);
    }

    double t = 0.0;
    while (t < cfg.max_time) {
        if (on_surface) {
            t += cfg.dt_surface;
            phi += surface_step * normal(rng);
            // Crossing check on the unwrapped step interval: the particle
            // lives in (eps, 2*pi - eps) until it steps out.
            if (phi <= eps || phi >= two_pi - eps) {
                out.time = t;
                return out;
            }
            if (p_desorb > 0.0 && uniform(rng) < p_desorb) {
                ++out.desorptions;
                if (eject_r >= g.R) continue;  // a = 0: instantaneous re-adsorption
                on_surface = false;
                x = eject_r * std::cos(phi);
                y = eject_r * std::sin(phi);
            }
        } else {
            t += cfg.dt_bulk;
            x += bulk_step * normal(rng);
            y += bulk_step * normal(rng);
            if (x * x + y * y >= g.R * g.R) {
                const double ang = wrap_angle(std::atan2(y, x));
                if (ang <= eps || ang >= two_pi - eps) {
                    out.time = t;
                    return out;
                }
                on_surface = true;
                phi = ang;
            }
        }
    }
    out.time = cfg.max_time;
    out.censored = true;
    return out;
}

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long long paths_used = 0;      ///< non-censored paths in the mean
    long long censored = 0;
    bool degenerate_sample = false;  ///< fewer than two samples: std_error is 0
    bool valid = true;               ///< false when censoring exceeds 0.1% of paths
};

/// Order-insensitive accumulator of path results (sum, sum of squares,
/// counts); merging two accumulators is exact regardless of which side each
/// path landed on.
struct Accumulator {
    long long count = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
    long long censored = 0;
    long long desorptions = 0;

    void add(const PathResult& r) {
        if (r.censored) {
            ++censored;
        } else {
            ++count;
            sum += r.time;
            sum_sq += r.time * r.time;
        }
        desorptions += r.desorptions;
    }

    void merge(const Accumulator& o) {
        count += o.count;
        sum += o.sum;
        sum_sq += o.sum_sq;
        censored += o.censored;
        desorptions += o.desorptions;
    }

    McEstimate estimate() const {
        if (count < 1) throw numerical_error("estimate invalid: every path censored");
        McEstimate e;
        e.paths_used = count;
        e.censored = censored;
        e.mean = sum / count;
        if (count > 1) {
            const double var =
                std::max(0.0, (sum_sq - count * e.mean * e.mean) / (count - 1));
            e.std_error = std::sqrt(var / count);
        } else {
            e.degenerate_sample = true;
        }
        const long long total = count + censored;
        e.valid = censored * 1000 <= total;
        return e;
    }
};

class censoring_error : public numerical_error {
public:
    censoring_error(const std::string& msg, McEstimate est)
        : numerical_error(msg), estimate(est) {}
    McEstimate estimate;
};

/// Mean first-passage time over `paths` independent paths. Uniform starts
/// are stratified equispaced over the off-target arc. Paths run in parallel;
/// the reduction is a fixed-order pass over per-path results, so the output
/// is identical for any thread count.
inline McEstimate estimate_mfpt(const ProblemParams& p, const StartState& start,
                                const McConfig& cfg) {
    validate(p);
    validate(cfg, p);
    validate(start, p);

    const long long paths = cfg.paths;
    const double L = off_target_arc_length(p.geometry);
    const double eps = p.geometry.target_half_width;
    auto start_for = [&](long long i) -> StartState {
        if (start.phase != StartPhase::uniform_off_target) return start;
        const double phi = eps + (i + 0.5) * L / paths;
        return StartState::surface(global_angle(p.geometry, phi));
    };

    std::vector<PathResult> results(static_cast<std::size_t>(paths));
    auto run_range = [&](long long begin, long long end) {
        for (long long i = begin; i < end; ++i)
            results[static_cast<std::size_t>(i)] =
                simulate_first_passage(p, start_for(i), cfg, path_seed(cfg.seed,
                                       static_cast<std::uint64_t>(i)));
    };

    unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                         : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(
        std::min<long long>(paths, static_cast<long long>(n_threads)));
    if (n_threads <= 1) {
        run_range(0, paths);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        const long long chunk = (paths + n_threads - 1) / n_threads;
        for (unsigned k = 0; k < n_threads; ++k) {
            const long long begin = k * chunk;
            const long long end = std::min(paths, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(run_range, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    Accumulator acc;
    for (const PathResult& r : results) acc.add(r);
    McEstimate est = acc.estimate();
    if (!est.valid)
        throw censoring_error("estimate invalid: censoring exceeded 0.1% of paths", est);
    return est;
}

/// Standardized discrepancy between a deterministic value and a Monte Carlo
/// estimate: (value - mean) / std_error.
inline double zscore(double spectral, const McEstimate& mc) {
    if (!(mc.std_error > 0.0))
        throw numerical_error("zscore: degenerate sample (std_error is zero)");
    return (spectral - mc.mean) / mc.std_error;
}

}  // namespace smd

#endif  // SMD_MC_HPP
