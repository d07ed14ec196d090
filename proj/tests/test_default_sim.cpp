#include <doctest.h>

#include <cmath>

#include "dtsm/core_model.hpp"
#include "dtsm/default_sim.hpp"
#include "dtsm/json_io.hpp"
#include "dtsm/math/normal.hpp"
#include "support/oracles.hpp"

using namespace dtsm;
using sim::HazardPath;

namespace {

math::PiecewiseLinear const_lambda(double level, double horizon = 3.0) {
    return math::PiecewiseLinear::constant(0.0, horizon, level);
}

} // namespace

TEST_CASE("hazard path validation and integration") {
    CHECK_THROWS_AS(HazardPath(const_lambda(-0.1), {}), std::invalid_argument);
    CHECK_THROWS_AS(HazardPath(const_lambda(0.1), {{1.0, -0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(HazardPath(const_lambda(0.1), {{2.0, 0.5}, {1.0, 0.5}}),
                    std::invalid_argument);

    HazardPath p(const_lambda(0.1), {{1.0, 0.5}});
    CHECK(p.integrated(0.0) == 0.0);
    CHECK(p.integrated(0.5) == doctest::Approx(0.05));
    CHECK(p.integrated(1.0) == doctest::Approx(0.6));
    CHECK(p.integrated(2.0) == doctest::Approx(0.7));
}

TEST_CASE("simulate tau: dominant atom absorbs almost all mass") {
    HazardPath p(const_lambda(0.0), {{1.0, 50.0}});
    int at_atom = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto s = sim::simulate_tau(p, math::derive_seed(17, static_cast<std::uint64_t>(i)));
        if (s.tau == 1.0 && s.hit_atom && *s.hit_atom == 0) ++at_atom;
    }
    CHECK(at_atom == 10000); // P(miss) = e^{-50}
}

TEST_CASE("simulate tau: unit hazard with no atoms is Exp(1)") {
    HazardPath p(const_lambda(1.0, 20.0), {});
    std::vector<double> taus;
    const std::size_t n = 20000;
    for (std::size_t i = 0; i < n; ++i) {
        const auto s = sim::simulate_tau(p, math::derive_seed(29, i));
        REQUIRE(std::isfinite(s.tau)); // horizon 20: truncation mass e^{-20}
        CHECK(!s.hit_atom);
        taus.push_back(s.tau);
    }
    const double d = oracles::ks_statistic(taus, [](double x) { return -std::expm1(-x); });
    CHECK(d < oracles::ks_critical_1pct(n));
}

TEST_CASE("simulate tau: atom probability matches the exponential law") {
    HazardPath p(const_lambda(0.0), {{1.0, 0.5}});
    oracles::MeanAccumulator acc;
    for (int i = 0; i < 100000; ++i) {
        const auto s = sim::simulate_tau(p, math::derive_seed(31, static_cast<std::uint64_t>(i)));
        acc.add(s.tau == 1.0 ? 1.0 : 0.0);
    }
    CHECK(std::abs(acc.mean() - 0.393469340287366576) <= 3.0 * acc.std_error());
}

TEST_CASE("simulate tau is deterministic given the seed") {
    HazardPath p(const_lambda(0.4), {{1.0, 0.3}});
    for (std::uint64_t seed : {1ULL, 99ULL, 12345ULL}) {
        const auto a = sim::simulate_tau(p, seed);
        const auto b = sim::simulate_tau(p, seed);
        CHECK(a.tau == b.tau);
        CHECK(a.hit_atom == b.hit_atom);
    }
}

TEST_CASE("conditional atom probability") {
    CHECK(sim::conditional_atom_prob(0.0) == 0.0);
    CHECK(sim::conditional_atom_prob(0.5) ==
          doctest::Approx(0.393469340287366576).epsilon(1e-15));
    CHECK_THROWS_AS(sim::conditional_atom_prob(-0.1), std::invalid_argument);

    // lam' ~ Exp(1): E[1 - e^{-lam'}] = 1/2 (Laplace transform at 1)
    const auto est = sim::conditional_atom_prob_mc(
        [](math::Rng& rng) { return rng.exponential(); }, 100000, 37);
    CHECK(std::abs(est.mean - 0.5) <= 3.0 * est.std_error);
    CHECK(est.std_error > 0.0);
    CHECK(est.mean >= 0.0);
    CHECK(est.mean < 1.0);
}

TEST_CASE("survival probability formula and h_prime identity") {
    core::CompensatorSpec spec(const_lambda(0.1),
                               core::RiskySchedule({{1.0, 0.3, std::nullopt}}));
    CHECK(sim::survival_probability(spec, 0.0) == 1.0);
    CHECK(sim::survival_probability(spec, 2.0) ==
          doctest::Approx(0.573111527154587301).epsilon(1e-14));

    // -log survival equals h_prime exactly
    for (double t : {0.2, 0.7, 1.0, 1.4, 2.0, 2.7}) {
        CHECK(-std::log(sim::survival_probability(spec, t)) ==
              doctest::Approx(core::h_prime(spec, t)).epsilon(1e-14));
    }

    // non-increasing and right-continuous at the atom
    double prev = 1.0;
    for (double t = 0.0; t <= 3.0 + 1e-9; t += 0.05) {
        const double v = sim::survival_probability(spec, std::min(t, 3.0));
        CHECK(v <= prev + 1e-16);
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }
}

TEST_CASE("empirical survival matches the product formula under the gamma mapping") {
    // Gamma_i = 1 - e^{-lam'_i}: lam' = -log(1 - Gamma)
    const double g1 = 0.3, g2 = 0.2;
    core::CompensatorSpec spec(
        const_lambda(0.1), core::RiskySchedule({{1.0, g1, std::nullopt}, {1.5, g2, std::nullopt}}));
    HazardPath path(const_lambda(0.1),
                    {{1.0, -std::log1p(-g1)}, {1.5, -std::log1p(-g2)}});

    const std::size_t n = 100000;
    const auto samples = sim::simulate_ensemble(path, n, 41);
    for (double t : {0.5, 1.0, 1.5, 2.0}) {
        oracles::MeanAccumulator acc;
        for (const auto& s : samples) acc.add(s.tau > t ? 1.0 : 0.0);
        const double want = sim::survival_probability(spec, t);
        CHECK(std::abs(acc.mean() - want) <= 3.0 * acc.std_error());
    }

    // windowed KS distance between the empirical CDF and 1 - survival;
    // censored draws (tau = inf) only enter through the survival side
    std::vector<double> taus;
    for (const auto& s : samples) taus.push_back(s.tau);
    std::sort(taus.begin(), taus.end());
    auto empirical = [&](double x) {
        const auto it = std::upper_bound(taus.begin(), taus.end(), x);
        return static_cast<double>(it - taus.begin()) / static_cast<double>(taus.size());
    };
    double d = 0.0;
    for (int k = 0; k <= 2500; ++k) {
        const double x = 2.5 * k / 2500.0;
        d = std::max(d, std::abs(empirical(x) - (1.0 - sim::survival_probability(spec, x))));
    }
    CHECK(d < 0.01);
}

TEST_CASE("deterministic term structure mirrors the core bond price") {
    HazardPath path(const_lambda(0.05), {{1.0, 0.4}});
    CHECK(sim::deterministic_term_structure(path, 0.7, 0.7, false) == 1.0);
    CHECK(sim::deterministic_term_structure(path, 0.2, 1.8, true) == 0.0);
    CHECK(sim::deterministic_term_structure(path, 0.5, 1.5, false) ==
          doctest::Approx(std::exp(-0.05 - 0.4)).epsilon(1e-14));

    // consistency with core_model.bond_price under f = lambda, g = lam'
    std::vector<double> tg{0.0, 1.5, 3.0};
    std::vector<double> mg{0.0, 0.75, 1.5, 2.25, 3.0};
    std::vector<std::vector<double>> f(tg.size(), std::vector<double>(mg.size(), 0.05));
    core::RiskySchedule schedule({{1.0, 0.3, std::nullopt}});
    std::vector<std::vector<double>> g{std::vector<double>(tg.size(), 0.4)};
    core::ForwardSurface surface(tg, mg, f, schedule, g);
    for (double t : {0.0, 0.4, 1.2}) {
        for (double T : {1.3, 2.0, 3.0}) {
            CHECK(sim::deterministic_term_structure(path, t, T, false) ==
                  doctest::Approx(core::bond_price(surface, t, T, false)).epsilon(1e-13));
        }
    }
}

TEST_CASE("announced scenario") {
    auto exp_delay = [](math::Rng& rng) { return rng.exponential(); };

    // vanishing rate produces an empty schedule almost surely
    const auto empty = sim::announced_scenario(1e-9, exp_delay, 5.0, 7);
    CHECK(empty.size() == 0);

    // every atom carries gamma = 1 - e^{-1} and a valid announcement
    const auto schedule = sim::announced_scenario(1.0, exp_delay, 5.0, 11);
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        CHECK(schedule[i].gamma == doctest::Approx(0.632120558828557678).epsilon(1e-15));
        REQUIRE(schedule[i].announce_time.has_value());
        CHECK(*schedule[i].announce_time < schedule[i].time);
        CHECK(schedule[i].time <= 5.0);
    }

    // expected retained-atom count vs an independent thinned-poisson oracle
    oracles::MeanAccumulator ours, oracle;
    for (int i = 0; i < 10000; ++i) {
        ours.add(static_cast<double>(
            sim::announced_scenario(1.0, exp_delay, 5.0, math::derive_seed(43, static_cast<std::uint64_t>(i)))
                .size()));
        math::Rng rng(math::derive_seed(44, static_cast<std::uint64_t>(i)));
        double s = 0.0;
        int count = 0;
        while ((s += rng.exponential()) < 5.0)
            if (s + rng.exponential() <= 5.0) ++count;
        oracle.add(count);
    }
    const double se = std::hypot(ours.std_error(), oracle.std_error());
    CHECK(std::abs(ours.mean() - oracle.mean()) <= 3.0 * se);
}

TEST_CASE("azema path: degenerate prior decays deterministically") {
    math::PiecewiseLinear f({0.0, 1.0, 2.0}, {0.0, 0.4, 1.0});
    const std::vector<double> obs{0.5, 1.0, 1.5};
    const auto path = sim::azema_path(f, obs, 0.5, 1.0, 13, 0.05);
    CHECK(path.x_true == 1.0);
    for (std::size_t i = 0; i < path.t.size(); ++i)
        CHECK(path.z[i] == doctest::Approx(std::exp(-f(path.t[i]))).epsilon(1e-14));
    for (const auto& j : path.jumps) CHECK(j.z_after == doctest::Approx(j.z_before).epsilon(1e-14));
}

TEST_CASE("azema path: jumps in both directions across an ensemble, Z in (0,1]") {
    math::PiecewiseLinear f({0.0, 1.0, 2.0}, {0.0, 0.5, 1.2});
    const std::vector<double> obs{0.4, 0.8, 1.2, 1.6};
    int up = 0, down = 0;
    for (int i = 0; i < 300; ++i) {
        const auto path = sim::azema_path(f, obs, 1.0, 0.5, math::derive_seed(47, static_cast<std::uint64_t>(i)), 0.05);
        for (std::size_t k = 0; k < path.t.size(); ++k) {
            CHECK(path.z[k] > 0.0);
            CHECK(path.z[k] <= 1.0);
        }
        // between observations Z is non-increasing
        std::size_t jump_idx = 0;
        for (std::size_t k = 1; k < path.t.size(); ++k) {
            const bool at_obs = jump_idx < path.jumps.size() &&
                                std::abs(path.t[k] - path.jumps[jump_idx].time) <= 1e-12;
            if (at_obs) {
                ++jump_idx;
                continue;
            }
            CHECK(path.z[k] <= path.z[k - 1] + 1e-14);
        }
        for (const auto& j : path.jumps) {
            if (j.z_after > j.z_before) ++up;
            if (j.z_after < j.z_before) ++down;
        }
    }
    CHECK(up > 0);
    CHECK(down > 0);
}

TEST_CASE("azema path: supermartingale property by nested monte carlo") {
    math::PiecewiseLinear f({0.0, 1.0, 2.0}, {0.0, 0.5, 1.2});
    const std::vector<double> obs{0.4, 0.8, 1.2, 1.6};
    // outer path to t = 1.0: posterior from two observations
    const auto outer = sim::azema_path(f, obs, 1.0, 0.5, 59, 0.05);
    // recover pi_t(1) from Z at t = 1.0: Z = p e^{-f} + (1-p) e^{-2f}
    const double ft = f(1.0);
    auto it = std::lower_bound(outer.t.begin(), outer.t.end(), 1.0);
    const double z_t = outer.z[static_cast<std::size_t>(it - outer.t.begin())];
    const double p_t = (z_t - std::exp(-2.0 * ft)) / (std::exp(-ft) - std::exp(-2.0 * ft));

    // inner: draw X ~ pi_t, observe at 1.2 and 1.6, evaluate Z at t+s = 1.8
    const double ts = 1.8;
    const double fs = f(ts);
    math::Rng rng(61);
    oracles::MeanAccumulator acc;
    for (int i = 0; i < 200000; ++i) {
        const double x = rng.uniform() < p_t ? 1.0 : 2.0;
        double p = p_t;
        for (double tobs : {1.2, 1.6}) {
            (void)tobs;
            const double y = x + 0.5 * rng.normal();
            const double l1 = math::normal_pdf((y - 1.0) / 0.5);
            const double l2 = math::normal_pdf((y - 2.0) / 0.5);
            p = p * l1 / (p * l1 + (1.0 - p) * l2);
        }
        acc.add(p * std::exp(-fs) + (1.0 - p) * std::exp(-2.0 * fs));
    }
    CHECK(acc.mean() <= z_t + 3.0 * acc.std_error());
    // and the tower-property value is the deterministic decay of the mixture
    const double expect = p_t * std::exp(-fs) + (1.0 - p_t) * std::exp(-2.0 * fs);
    CHECK(std::abs(acc.mean() - expect) <= 3.0 * acc.std_error());
}

TEST_CASE("hazard scenario json") {
    const char* doc = R"({"lambda": [0.1, 0.1, 0.3], "atoms": [{"u": 1.0, "lamp": 0.5}], "horizon": 2.0})";
    const auto path = io::hazard_path_from_json(io::json::parse(doc));
    CHECK(path.horizon() == 2.0);
    CHECK(path.lambda()(0.5) == doctest::Approx(0.1));
    CHECK(path.lambda()(1.5) == doctest::Approx(0.2));
    CHECK(path.atoms().size() == 1);
    const auto j = io::hazard_path_to_json(path);
    CHECK(j.at("horizon").get<double>() == 2.0);
}
