#include <doctest.h>

#include <cmath>
#include <random>

#include "agemdp/benchmarks.hpp"
#include "agemdp/sim.hpp"
#include "fixtures.hpp"

using namespace agemdp;

namespace {

// Average age by walking the sawtooth of a long deterministic delay sequence
// that cycles through every ordered pair of support points in proportion to
// their probabilities (probabilities here are multiples of 1/10).
double sawtooth_average(const DelayPmf& pmf, const SamplingRule& rule) {
    std::vector<int> bag;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        for (int k = 0; k < static_cast<int>(std::lround(pmf.probs[i] * 10)); ++k) bag.push_back(pmf.support[i]);
    }
    double area = 0.0;
    double time = 0.0;
    for (int y : bag) {
        for (int y_next : bag) {
            const int len = rule.wait_for(y) + y_next;
            for (int t = 0; t < len; ++t) area += y + t;
            time += len;
        }
    }
    return area / time;
}

}  // namespace

TEST_CASE("average age for deterministic delays") {
    CHECK(average_aoi({{1}, {1.0}}, SamplingRule::zero_wait()) == doctest::Approx(1.0));
    CHECK(average_aoi({{10}, {1.0}}, SamplingRule::zero_wait()) == doctest::Approx(14.5));
    const ThresholdChoice one = aoi_optimal_threshold({{1}, {1.0}}, 5);
    CHECK(one.beta == 1);
    CHECK(one.average_aoi == doctest::Approx(1.0));
    const ThresholdChoice ten = aoi_optimal_threshold({{10}, {1.0}}, 5);
    CHECK(ten.beta == 10);
    CHECK(ten.rule.wait_for(10) == 0);
}

TEST_CASE("average age agrees with a direct sawtooth walk") {
    const DelayPmf pmf = DelayPmf::two_point(0.3, 1, 10);
    for (int beta : {1, 3, 6, 11, 25}) {
        const SamplingRule rule = SamplingRule::threshold(beta, 20);
        CHECK(average_aoi(pmf, rule) == doctest::Approx(sawtooth_average(pmf, rule)).epsilon(1e-12));
    }
    CHECK(average_aoi(pmf, SamplingRule::zero_wait()) ==
          doctest::Approx(sawtooth_average(pmf, SamplingRule::zero_wait())).epsilon(1e-12));
}

TEST_CASE("threshold search is its own certificate") {
    for (double p : {0.1, 0.5, 0.9}) {
        const DelayPmf pmf = DelayPmf::two_point(p, 1, 10);
        const ThresholdChoice best = aoi_optimal_threshold(pmf, 20);
        for (int beta = 1; beta <= 30; ++beta) {
            CHECK(best.average_aoi <= average_aoi(pmf, SamplingRule::threshold(beta, 20)));
        }
        CHECK(best.average_aoi <= average_aoi(pmf, SamplingRule::zero_wait()));
        CHECK(average_aoi(pmf, SamplingRule::zero_wait()) == average_aoi(pmf, SamplingRule::threshold(1, 20)));
    }
}

TEST_CASE("sampling rule waits") {
    const SamplingRule r = SamplingRule::threshold(8, 3);
    CHECK(r.wait_for(10) == 0);
    CHECK(r.wait_for(6) == 2);
    CHECK(r.wait_for(1) == 3);
    CHECK(r.capped_for(1));
    CHECK_FALSE(r.capped_for(6));
    CHECK_THROWS_AS(SamplingRule::free().wait_for(1), std::logic_error);
    CHECK_THROWS_AS(average_aoi({{1}, {1.0}}, SamplingRule::free()), std::invalid_argument);
}

TEST_CASE("free rule with z_max = 0 equals zero wait") {
    const AugmentedMdp mdp(fixtures::case_study(0.5, 0));
    const SolveReport free = control_under_fixed_sampling(mdp, SamplingRule::free());
    const SolveReport zero = control_under_fixed_sampling(mdp, SamplingRule::zero_wait());
    CHECK(free.h_star == zero.h_star);
    CHECK(free.policy.decisions == zero.policy.decisions);
}

TEST_CASE("restricting the sampling never helps") {
    for (double p : {0.2, 0.5, 0.8}) {
        const AugmentedMdp mdp(fixtures::case_study(p));
        const double h_free = control_under_fixed_sampling(mdp, SamplingRule::free()).h_star;
        CHECK(h_free <= control_under_fixed_sampling(mdp, SamplingRule::zero_wait()).h_star + 1e-9);
        for (int beta : {2, 5, 10, 15}) {
            CHECK(h_free <= control_under_fixed_sampling(mdp, SamplingRule::threshold(beta, 20)).h_star + 1e-9);
        }
    }
}

TEST_CASE("restricted policies follow the rule") {
    const AugmentedMdp mdp(fixtures::case_study(0.5));
    const ThresholdChoice t = aoi_optimal_threshold(mdp.model().delay(), 20);
    const SolveReport r = control_under_fixed_sampling(mdp, t.rule);
    CHECK(r.solver == "fpbi/aoi-optimal");
    for (std::size_t g = 0; g < mdp.num_states(); ++g) {
        CHECK(r.policy(g).wait == t.rule.wait_for(mdp.space().state(g).delay));
    }
    CHECK(r.warnings.empty());

    const SolveReport capped = control_under_fixed_sampling(mdp, SamplingRule::threshold(30, 20));
    CHECK_FALSE(capped.warnings.empty());
}

TEST_CASE("chain-based age matches the closed form for delay-only rules") {
    const AugmentedMdp mdp(fixtures::case_study(0.4));
    for (const SamplingRule rule : {SamplingRule::zero_wait(), SamplingRule::threshold(6, 20)}) {
        const SolveReport r = control_under_fixed_sampling(mdp, rule);
        CHECK(evaluate_policy_average_aoi(mdp, r.policy) == doctest::Approx(average_aoi(mdp.model().delay(), rule)).epsilon(1e-10));
    }
}

TEST_CASE("simulated age under zero wait matches the closed form") {
    const MarkovControlModel m = fixtures::case_study(0.5);
    const AugmentedMdp mdp(m);
    const SolveReport r = control_under_fixed_sampling(mdp, SamplingRule::zero_wait());
    SimConfig cfg;
    cfg.horizon = 1'000'000;
    cfg.burn_in = 10'000;
    cfg.seed = 17;
    const SimReport sim = simulate(m, r.policy, cfg);
    CHECK(std::abs(sim.avg_age - average_aoi(m.delay(), SamplingRule::zero_wait())) <= 3.0 * sim.se_age);
}
