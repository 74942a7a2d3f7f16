#include <doctest.h>

#include <cmath>
#include <random>

#include "agemdp/analysis.hpp"
#include "agemdp/solvers.hpp"
#include "fixtures.hpp"

using namespace agemdp;

namespace {

MarkovControlModel random_model(std::mt19937_64& gen, int n_states, int z_max) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RawModel raw;
    for (int a = 0; a < 2; ++a) {
        Matrix P(n_states, n_states);
        for (int i = 0; i < n_states; ++i) {
            for (int j = 0; j < n_states; ++j) P(i, j) = 0.05 + u(gen);
            P.row(i) /= P.row(i).sum();
        }
        raw.kernels.push_back(P);
    }
    raw.cost = Matrix(n_states, 2);
    for (int i = 0; i < n_states; ++i) {
        for (int a = 0; a < 2; ++a) raw.cost(i, a) = 10.0 * u(gen);
    }
    const double p = 0.2 + 0.6 * u(gen);
    raw.delay = {{1, 3}, {p, 1.0 - p}};
    raw.z_max = z_max;
    return validate_model(raw);
}

MarkovControlModel constant_cost(double c) {
    RawModel raw = fixtures::case_study_raw(0.4, 5);
    raw.cost = Matrix::Constant(2, 2, c);
    return validate_model(raw);
}

}  // namespace

TEST_CASE("mrvi on a single state with a single decision") {
    RawModel raw;
    raw.kernels = {Matrix::Identity(1, 1)};
    raw.cost = Matrix::Constant(1, 1, 4.0);
    raw.delay = {{1}, {1.0}};
    raw.z_max = 0;
    const AugmentedMdp mdp(validate_model(raw));
    const MrviResult r = mrvi_solve(mdp, 1.5, {});
    // q = 4, f = 1, g = 4 - 1.5
    CHECK(r.average_cost == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(r.converged);
    CHECK(r.sweeps <= 2);
}

TEST_CASE("mrvi matches the brute-force minimum stage average") {
    std::mt19937_64 gen(3);
    // one 3-state instance (4^12 policies) and a few 2-state ones
    for (int trial = 0; trial < 4; ++trial) {
        const AugmentedMdp mdp(random_model(gen, trial == 0 ? 3 : 2, 1));
        REQUIRE(mdp.num_decisions() == 4);
        const HStarBounds b = h_star_bounds(mdp.model());
        const std::vector<double> grid = trial == 0 ? std::vector<double>{0.5 * (b.lower + b.upper)}
                                                    : std::vector<double>{b.lower, 0.5 * (b.lower + b.upper), b.upper};
        for (double lambda : grid) {
            const MrviResult r = mrvi_solve(mdp, lambda, {});
            CHECK(r.converged);
            const double brute = brute_force_min_stage_average(mdp, lambda, 20'000'000);
            CHECK(r.average_cost == doctest::Approx(brute).epsilon(1e-7));
            CHECK(evaluate_policy_stage_average(mdp, r.policy, lambda) == doctest::Approx(brute).epsilon(1e-7));
        }
    }
}

TEST_CASE("case study: U(20) <= 0 and both solvers agree") {
    const AugmentedMdp mdp(fixtures::case_study());
    CHECK(mrvi_solve(mdp, 20.0, {}).average_cost <= 0.0);
    CHECK(mrvi_solve(mdp, 0.0, {}).average_cost > 0.0);

    const SolveReport bisec = bisec_mrvi(mdp);
    const SolveReport fpbi = fpbi_solve(mdp);
    CHECK(bisec.converged);
    CHECK(fpbi.converged);
    CHECK(bisec.h_star >= 0.0);
    CHECK(bisec.h_star <= 20.0);
    CHECK(fpbi.h_star >= 0.0);
    CHECK(fpbi.h_star <= 20.0);
    CHECK(std::abs(bisec.h_star - fpbi.h_star) < 2e-6);
    CHECK(std::abs(evaluate_policy_average_cost(mdp, bisec.policy) - evaluate_policy_average_cost(mdp, fpbi.policy)) <
          2e-6);
    // the greedy policy is optimal: its exact value is h* itself, which a
    // tightly converged run pins down far below the default epsilon
    const SolveReport tight = fpbi_solve(mdp, {1e-9, 1e-11, 0.5, 100000});
    CHECK(std::abs(evaluate_policy_average_cost(mdp, fpbi.policy) - tight.h_star) < 1e-8);
    CHECK(std::abs(fpbi.h_star - tight.h_star) < 1e-6);
    CHECK(std::abs(mrvi_solve(mdp, fpbi.h_star, {}).average_cost) < 1e-5);
    CHECK(fpbi.values.values[fpbi.values.ref_state] == 0.0);
}

TEST_CASE("bisection trace records cumulative sweeps") {
    const AugmentedMdp mdp(fixtures::case_study(0.7));
    const SolveReport r = bisec_mrvi(mdp, {1e-9, 1e-3, 0.5, 100000});
    REQUIRE(!r.trace.empty());
    std::size_t prev = 0;
    for (const auto& t : r.trace) {
        CHECK(t.sweep_count > prev);
        prev = t.sweep_count;
    }
    CHECK(r.trace.back().sweep_count == r.sweeps);
    // width 20 halved until < 1e-3: 15 midpoints
    CHECK(r.trace.size() >= 15);
}

TEST_CASE("fpbi metric decreases over the tail of the trace") {
    const AugmentedMdp mdp(fixtures::case_study(0.3));
    const SolveReport r = fpbi_solve(mdp);
    REQUIRE(r.trace.size() >= 10);
    for (std::size_t i = r.trace.size() - 9; i < r.trace.size(); ++i) {
        CHECK(r.trace[i].metric <= r.trace[i - 1].metric);
    }
}

TEST_CASE("constant cost: h* = c for both solvers") {
    const double c = 6.5;
    const AugmentedMdp mdp(constant_cost(c));
    const HStarBounds b = h_star_bounds(mdp.model());
    CHECK(b.lower == c);
    CHECK(b.upper == doctest::Approx(c));
    const SolveReport bisec = bisec_mrvi(mdp);
    CHECK(bisec.h_star == doctest::Approx(c).epsilon(1e-12));
    const SolveReport fpbi = fpbi_solve(mdp);
    CHECK(fpbi.h_star == doctest::Approx(c).epsilon(1e-12));
    CHECK(fpbi.sweeps <= 2);
    for (double w : fpbi.values.values) CHECK(std::abs(w) < 1e-9);
    const StagePolicy any{std::vector<Decision>(mdp.num_states(), Decision{2, 1})};
    CHECK(evaluate_policy_average_cost(mdp, any) == doctest::Approx(c).epsilon(1e-12));
}

TEST_CASE("fpbi equals brute force on the tiny instance") {
    const AugmentedMdp mdp(fixtures::tiny(2));
    CHECK(policy_count(mdp) == 1679616);
    const BruteForceResult brute = brute_force_optimum(mdp, 2'000'000);
    const SolveReport fpbi = fpbi_solve(mdp);
    CHECK(brute.policies_evaluated + brute.not_unichain == 1679616);
    CHECK(std::abs(fpbi.h_star - brute.best_average_cost) < 1e-6);
    CHECK(evaluate_policy_average_cost(mdp, fpbi.policy) == doctest::Approx(brute.best_average_cost).epsilon(1e-9));
}

TEST_CASE("oracle refuses large instances") {
    const AugmentedMdp mdp(fixtures::case_study());
    CHECK_THROWS_AS(brute_force_optimum(mdp, 1'000'000), OracleTooLargeError);
}

TEST_CASE("h* stays within bounds on random models") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 20; ++trial) {
        const AugmentedMdp mdp(random_model(gen, 2 + trial % 3, 3));
        const HStarBounds b = h_star_bounds(mdp.model());
        const SolveReport r = fpbi_solve(mdp);
        CHECK(r.h_star >= b.lower - 1e-9);
        CHECK(r.h_star <= b.upper + 1e-6);
    }
}

TEST_CASE("decision restrictions") {
    const AugmentedMdp mdp(fixtures::case_study());
    CHECK_THROWS_AS(DecisionRestriction({{0}, {}}), std::invalid_argument);
    const DecisionRestriction full = DecisionRestriction::full(mdp);
    CHECK(full.allowed(3).size() == mdp.num_decisions());

    // only action 0 with no waiting: a single policy, so h is its average cost
    const DecisionRestriction only(std::vector<std::vector<std::size_t>>(mdp.num_states(), {0}));
    const SolveReport r = fpbi_solve(mdp, {}, &only);
    const StagePolicy pinned{std::vector<Decision>(mdp.num_states(), Decision{0, 0})};
    CHECK(r.h_star == doctest::Approx(evaluate_policy_average_cost(mdp, pinned)).epsilon(1e-8));
    CHECK(r.policy.decisions == pinned.decisions);
}

TEST_CASE("wait at the cap raises a warning") {
    // with a small cap the warning must track whether the policy sits on it
    const AugmentedMdp mdp(fixtures::case_study(0.5, 2));
    const SolveReport r = fpbi_solve(mdp);
    bool hits = false;
    for (const auto& d : r.policy.decisions) hits = hits || d.wait == 2;
    CHECK(hits == !r.warnings.empty());
}

TEST_CASE("invalid options are rejected") {
    const AugmentedMdp mdp(fixtures::tiny(1));
    CHECK_THROWS_AS(mrvi_solve(mdp, 0.0, {1e-9, 1e-6, 0.0, 10}), std::invalid_argument);
    CHECK_THROWS_AS(bisec_mrvi(mdp, {1e-9, -1.0, 0.5, 10}), std::invalid_argument);
    CHECK_THROWS_AS(fpbi_solve(mdp, {1e-9, 0.0, 0.5, 10}), std::invalid_argument);
}
