#include <doctest.h>

#include <cmath>
#include <limits>

#include "agemdp/model.hpp"
#include "fixtures.hpp"

using namespace agemdp;

TEST_CASE("case-study model validates") {
    const MarkovControlModel m = fixtures::case_study();
    CHECK(m.num_states() == 2);
    CHECK(m.num_actions() == 2);
    CHECK(m.z_max() == 20);
    CHECK(m.delay().support == std::vector<int>{1, 10});
    CHECK(delay_expectation(m.delay()) == doctest::Approx(5.5));
}

TEST_CASE("non-stochastic kernel row is reported") {
    RawModel raw = fixtures::case_study_raw();
    raw.kernels[0](0, 1) = 0.2;  // row sums to 1.1
    try {
        validate_model(raw);
        FAIL("expected ModelValidationError");
    } catch (const ModelValidationError& e) {
        CHECK(e.has(ViolationKind::NonStochasticRow));
    }
}

TEST_CASE("all violations are collected") {
    RawModel raw = fixtures::case_study_raw();
    raw.kernels[1](1, 0) = -0.01;
    raw.kernels[1](1, 1) = 1.01;
    raw.delay = {{0, 3}, {0.5, 0.6}};
    raw.cost(0, 0) = std::numeric_limits<double>::infinity();
    raw.z_max = -1;
    try {
        validate_model(raw);
        FAIL("expected ModelValidationError");
    } catch (const ModelValidationError& e) {
        CHECK(e.has(ViolationKind::NegativeProbability));
        CHECK(e.has(ViolationKind::ZeroOrNegativeDelaySupport));
        CHECK(e.has(ViolationKind::PmfNotNormalized));
        CHECK(e.has(ViolationKind::NonFiniteCost));
        CHECK(e.has(ViolationKind::NegativeWaitCap));
        CHECK(e.violations().size() >= 5);
    }
}

TEST_CASE("dimension and delay ordering checks") {
    RawModel raw = fixtures::case_study_raw();
    raw.cost = Matrix::Zero(3, 2);
    CHECK_THROWS_AS(validate_model(raw), ModelValidationError);

    raw = fixtures::case_study_raw();
    raw.delay = {{10, 1}, {0.5, 0.5}};
    try {
        validate_model(raw);
        FAIL("expected ModelValidationError");
    } catch (const ModelValidationError& e) {
        CHECK(e.has(ViolationKind::DelaySupportNotIncreasing));
    }

    raw.delay = {{1, 10}, {1.0, 0.0}};
    try {
        validate_model(raw);
        FAIL("expected ModelValidationError");
    } catch (const ModelValidationError& e) {
        CHECK(e.has(ViolationKind::NonPositiveDelayProbability));
    }
}

TEST_CASE("row sums within 1e-12 are accepted") {
    RawModel raw = fixtures::case_study_raw();
    raw.kernels[0](0, 0) += 5e-13;
    CHECK_NOTHROW(validate_model(raw));
}

TEST_CASE("two point pmf") {
    const DelayPmf d = DelayPmf::two_point(0.3, 2, 7);
    CHECK(d.support == std::vector<int>{2, 7});
    CHECK(d.probs[0] == doctest::Approx(0.3));
    CHECK(d.probs[1] == doctest::Approx(0.7));
    CHECK(d.index_of(7) == 1);
    CHECK_THROWS_AS(d.index_of(3), std::out_of_range);

    const DelayPmf one = DelayPmf::two_point(1.0, 2, 7);
    CHECK(one.support == std::vector<int>{2});
}

TEST_CASE("augmented state enumeration is lexicographic and bijective") {
    const MarkovControlModel m = fixtures::case_study();
    const AugmentedSpace space(m);
    const auto states = enumerate_augmented_states(m);
    REQUIRE(states.size() == 8);
    CHECK(states[0] == AugmentedState{0, 1, 0});
    CHECK(states[1] == AugmentedState{0, 1, 1});
    CHECK(states[2] == AugmentedState{0, 10, 0});
    CHECK(states[7] == AugmentedState{1, 10, 1});
    for (std::size_t i = 0; i < states.size(); ++i) {
        CHECK(space.index(states[i]) == i);
        CHECK(space.state(i) == states[i]);
    }
    CHECK(space.num_decisions() == 42);
    for (std::size_t k = 0; k < space.num_decisions(); ++k) CHECK(space.decision_index(space.decision(k)) == k);
    CHECK(space.decision(3) == Decision{1, 1});
}

TEST_CASE("augmented space cardinality") {
    RawModel raw = fixtures::case_study_raw();
    raw.delay = {{1, 2, 5}, {0.2, 0.3, 0.5}};
    const MarkovControlModel m = validate_model(raw);
    CHECK(AugmentedSpace(m).num_states() == 2 * 3 * 2);
}
