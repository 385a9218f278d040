#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "smd/mc.hpp"
#include "smd/solver.hpp"

using namespace smd;
using Catch::Approx;

namespace {

ProblemParams reference_params() {
    ProblemParams p;
    p.geometry = {1.0, 0.0, 0.3};
    p.transport = {1.0, 1.0, 1.0, 0.1};
    return p;
}

McConfig quick_config(const ProblemParams& p, long long paths, std::uint64_t seed) {
    McConfig c = default_mc_config(p);
    c.paths = paths;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("per-path seeding is deterministic and spread out") {
    CHECK(path_seed(1, 0) == path_seed(1, 0));
    CHECK(path_seed(1, 0) != path_seed(1, 1));
    CHECK(path_seed(1, 0) != path_seed(2, 0));
}

TEST_CASE("config validation") {
    const ProblemParams p = reference_params();
    McConfig c = default_mc_config(p);
    REQUIRE_NOTHROW(validate(c, p));
    SECTION("paths") {
        c.paths = 0;
        REQUIRE_THROWS_AS(validate(c, p), validation_error);
    }
    SECTION("dt upper bound") {
        c.dt_surface = 0.1;  // > 1e-2 R^2/max(D1,D2)
        REQUIRE_THROWS_AS(validate(c, p), validation_error);
    }
    SECTION("dt positive") {
        c.dt_bulk = 0.0;
        REQUIRE_THROWS_AS(validate(c, p), validation_error);
    }
    SECTION("max_time") {
        c.max_time = 0.0;
        REQUIRE_THROWS_AS(validate(c, p), validation_error);
    }
}

TEST_CASE("start state validation") {
    const ProblemParams p = reference_params();
    REQUIRE_NOTHROW(validate(StartState::surface(M_PI), p));
    REQUIRE_THROWS_AS(validate(StartState::surface(0.1), p), validation_error);
    REQUIRE_NOTHROW(validate(StartState::bulk(0.5, 0.1), p));
    REQUIRE_THROWS_AS(validate(StartState::bulk(1.0, 0.1), p), validation_error);
    REQUIRE_NOTHROW(validate(StartState::uniform(), p));
}

TEST_CASE("single path contracts") {
    const ProblemParams p = reference_params();
    const McConfig cfg = quick_config(p, 1, 42);

    SECTION("identical seed, identical outcome") {
        const auto a = simulate_first_passage(p, StartState::surface(M_PI), cfg, 123);
        const auto b = simulate_first_passage(p, StartState::surface(M_PI), cfg, 123);
        CHECK(a.time == b.time);
        CHECK(a.desorptions == b.desorptions);
        const auto c = simulate_first_passage(p, StartState::surface(M_PI), cfg, 124);
        CHECK(a.time != c.time);
    }
    SECTION("strictly positive first-passage times") {
        for (std::uint64_t s = 0; s < 50; ++s) {
            const auto r = simulate_first_passage(p, StartState::surface(M_PI), cfg, s);
            REQUIRE(r.time > 0.0);
        }
    }
    SECTION("uniform tag is not a concrete start") {
        REQUIRE_THROWS_AS(simulate_first_passage(p, StartState::uniform(), cfg, 1),
                          validation_error);
    }
    SECTION("start adjacent to a wide target exits fast") {
        ProblemParams wide = p;
        wide.geometry.target_half_width = 0.9 * M_PI;  // target covers ~90% of the circle
        const McConfig wcfg = quick_config(wide, 1, 7);
        const double eps = wide.geometry.target_half_width;
        double total = 0.0;
        for (std::uint64_t s = 0; s < 200; ++s) {
            const auto r =
                simulate_first_passage(wide, StartState::surface(eps + 0.01), wcfg, s);
            REQUIRE(r.time > 0.0);
            REQUIRE_FALSE(r.censored);
            total += r.time;
        }
        CHECK(total / 200.0 < 0.05);
    }
    SECTION("no desorption ever happens at lambda zero") {
        ProblemParams q = p;
        q.transport.lambda = 0.0;
        const McConfig qcfg = quick_config(q, 1, 9);
        for (std::uint64_t s = 0; s < 100; ++s) {
            const auto r = simulate_first_passage(q, StartState::surface(M_PI), qcfg, s);
            REQUIRE(r.desorptions == 0);
        }
    }
    SECTION("bulk starts adsorb and finish") {
        const auto r = simulate_first_passage(p, StartState::bulk(0.2, M_PI), cfg, 5);
        CHECK(r.time > 0.0);
        CHECK_FALSE(r.censored);
    }
    SECTION("censoring marker") {
        McConfig tiny = cfg;
        tiny.max_time = 10.0 * tiny.dt_surface;
        const auto r = simulate_first_passage(p, StartState::surface(M_PI), tiny, 11);
        CHECK(r.censored);
        CHECK(r.time == Approx(tiny.max_time).margin(2.0 * tiny.dt_surface));
    }
}

TEST_CASE("accumulator merge algebra") {
    const ProblemParams p = reference_params();
    const McConfig cfg = quick_config(p, 1, 100);

    Accumulator a, b, all;
    std::vector<PathResult> results;
    for (std::uint64_t i = 0; i < 64; ++i)
        results.push_back(simulate_first_passage(p, StartState::surface(M_PI), cfg,
                                                 path_seed(100, i)));
    for (std::size_t i = 0; i < results.size(); ++i) {
        (i < 32 ? a : b).add(results[i]);
        all.add(results[i]);
    }

    SECTION("pairwise merge commutes bitwise") {
        Accumulator ab = a, ba = b;
        ab.merge(b);
        ba.merge(a);
        CHECK(ab.sum == ba.sum);
        CHECK(ab.sum_sq == ba.sum_sq);
        CHECK(ab.count == ba.count);
        CHECK(ab.estimate().mean == ba.estimate().mean);
        CHECK(ab.estimate().std_error == ba.estimate().std_error);
    }
    SECTION("merge of halves equals the straight pass") {
        Accumulator ab = a;
        ab.merge(b);
        CHECK(ab.count == all.count);
        CHECK(ab.estimate().mean == Approx(all.estimate().mean).epsilon(1e-14));
        CHECK(ab.estimate().std_error == Approx(all.estimate().std_error).epsilon(1e-12));
    }
    SECTION("sample statistics match the definitions") {
        double mean = 0.0;
        for (const auto& r : results) mean += r.time;
        mean /= static_cast<double>(results.size());
        double var = 0.0;
        for (const auto& r : results) var += (r.time - mean) * (r.time - mean);
        var /= static_cast<double>(results.size() - 1);
        const auto est = all.estimate();
        CHECK(est.mean == Approx(mean).epsilon(1e-13));
        CHECK(est.std_error ==
              Approx(std::sqrt(var / static_cast<double>(results.size()))).epsilon(1e-10));
    }
}

TEST_CASE("estimate contracts") {
    const ProblemParams p = reference_params();

    SECTION("single path reports a degenerate sample") {
        const auto est = estimate_mfpt(p, StartState::uniform(), quick_config(p, 1, 3));
        CHECK(est.paths_used == 1);
        CHECK(est.std_error == 0.0);
        CHECK(est.degenerate_sample);
    }
    SECTION("identical seeds give identical estimates") {
        const McConfig cfg = quick_config(p, 256, 5);
        const auto e1 = estimate_mfpt(p, StartState::uniform(), cfg);
        const auto e2 = estimate_mfpt(p, StartState::uniform(), cfg);
        CHECK(e1.mean == e2.mean);
        CHECK(e1.std_error == e2.std_error);
    }
    SECTION("thread count does not change the estimate") {
        McConfig cfg = quick_config(p, 256, 5);
        cfg.threads = 1;
        const auto serial = estimate_mfpt(p, StartState::uniform(), cfg);
        cfg.threads = 4;
        const auto parallel = estimate_mfpt(p, StartState::uniform(), cfg);
        CHECK(serial.mean == parallel.mean);
        CHECK(serial.std_error == parallel.std_error);
        CHECK(serial.censored == parallel.censored);
    }
    SECTION("excess censoring raises the numerical error") {
        McConfig cfg = quick_config(p, 64, 17);
        cfg.max_time = 20.0 * cfg.dt_surface;
        REQUIRE_THROWS_AS(estimate_mfpt(p, StartState::uniform(), cfg), censoring_error);
        try {
            estimate_mfpt(p, StartState::uniform(), cfg);
        } catch (const censoring_error& e) {
            CHECK(e.estimate.censored > 0);
            CHECK_FALSE(e.estimate.valid);
        }
    }
}

TEST_CASE("no-desorption runs match the closed form") {
    ProblemParams p = reference_params();
    p.transport.lambda = 0.0;
    const double eps = p.geometry.target_half_width;

    SECTION("antipodal start") {
        const double ref = sigma(p) * (two_pi - eps - M_PI) * (M_PI - eps) / 2.0;
        const auto est =
            estimate_mfpt(p, StartState::surface(M_PI), quick_config(p, 10000, 2024));
        const double band = 3.0 * est.std_error + 0.02 * ref;
        INFO("mc " << est.mean << " ref " << ref << " band " << band);
        CHECK(std::abs(est.mean - ref) <= band);
    }
    SECTION("uniform start against the arc average") {
        const double L = off_target_arc_length(p.geometry);
        const double ref = sigma(p) * L * L / 12.0;
        const auto est =
            estimate_mfpt(p, StartState::uniform(), quick_config(p, 10000, 515));
        const double band = 3.0 * est.std_error + 0.02 * ref;
        INFO("mc " << est.mean << " ref " << ref << " band " << band);
        CHECK(std::abs(est.mean - ref) <= band);
    }
}

TEST_CASE("instant re-adsorption at zero ejection distance reduces to pure surface diffusion") {
    // a = 0 sends desorbed particles to the rim, where they stick again at
    // the same angle; the first-passage time distribution is the lambda = 0
    // one even though desorption events fire.
    ProblemParams p = reference_params();
    p.transport.a = 0.0;
    p.transport.lambda = 5.0;
    const double eps = p.geometry.target_half_width;
    const double ref = sigma(p) * (two_pi - eps - M_PI) * (M_PI - eps) / 2.0;
    const auto est = estimate_mfpt(p, StartState::surface(M_PI), quick_config(p, 4000, 77));
    const double band = 3.0 * est.std_error + 0.02 * ref;
    CHECK(std::abs(est.mean - ref) <= band);

    const auto one = simulate_first_passage(p, StartState::surface(M_PI),
                                            quick_config(p, 1, 77), path_seed(77, 0));
    CHECK(one.desorptions > 0);
}

TEST_CASE("z-score") {
    McEstimate est;
    est.mean = 2.0;
    est.std_error = 0.5;
    est.paths_used = 100;
    CHECK(zscore(2.0, est) == 0.0);
    CHECK(zscore(3.0, est) == Approx(2.0));
    est.std_error = 0.0;
    REQUIRE_THROWS_AS(zscore(2.0, est), numerical_error);
}
