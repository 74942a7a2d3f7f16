#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace agemdp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Discrete channel-delay distribution over positive integer slot counts.
struct DelayPmf {
    std::vector<int> support;
    std::vector<double> probs;

    std::size_t size() const { return support.size(); }
    int min_delay() const { return support.front(); }
    int max_delay() const { return support.back(); }

    /// Position of `delay` in the support; throws std::out_of_range if absent.
    std::size_t index_of(int delay) const;

    /// Two-point family Pr(Y = y_low) = p, Pr(Y = y_high) = 1 - p.
    /// p == 1 collapses to the degenerate pmf on y_low.
    static DelayPmf two_point(double p, int y_low, int y_high);
};

/// Expected channel delay, sum of y * Pr(Y = y).
double delay_expectation(const DelayPmf& pmf);

/// Unvalidated model description, as read from a config or built in code.
struct RawModel {
    std::vector<Matrix> kernels;   // one |S|x|S| matrix per action
    Matrix cost;                   // |S|x|A|, cost(s, a)
    DelayPmf delay;
    int z_max = 0;
};

enum class ViolationKind {
    DimensionMismatch,
    NonStochasticRow,
    NegativeProbability,
    ZeroOrNegativeDelaySupport,
    DelaySupportNotIncreasing,
    NonPositiveDelayProbability,
    PmfNotNormalized,
    NonFiniteCost,
    NegativeWaitCap,
};

const char* to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string detail;
};

class ModelValidationError : public std::runtime_error {
public:
    explicit ModelValidationError(std::vector<Violation> violations);

    const std::vector<Violation>& violations() const { return violations_; }
    bool has(ViolationKind kind) const;

private:
    std::vector<Violation> violations_;
};

/// Controlled Markov source plus channel. Immutable once constructed; the only
/// way to obtain one is validate_model.
class MarkovControlModel {
public:
    std::size_t num_states() const { return static_cast<std::size_t>(cost_.rows()); }
    std::size_t num_actions() const { return kernels_.size(); }
    const Matrix& kernel(std::size_t action) const { return kernels_[action]; }
    const std::vector<Matrix>& kernels() const { return kernels_; }
    double cost(std::size_t state, std::size_t action) const {
        return cost_(static_cast<Eigen::Index>(state), static_cast<Eigen::Index>(action));
    }
    const Matrix& cost_table() const { return cost_; }
    const DelayPmf& delay() const { return delay_; }
    int z_max() const { return z_max_; }

    RawModel to_raw() const { return RawModel{kernels_, cost_, delay_, z_max_}; }

private:
    friend MarkovControlModel validate_model(const RawModel& raw);
    MarkovControlModel() = default;

    std::vector<Matrix> kernels_;
    Matrix cost_;
    DelayPmf delay_;
    int z_max_ = 0;
};

/// Checks every model invariant and throws ModelValidationError listing all of
/// the violations found, not just the first.
MarkovControlModel validate_model(const RawModel& raw);

/// Sufficient statistic at a delivery: sampled source state, the realized delay
/// of that sample, and the control action in force before the delivery.
struct AugmentedState {
    std::size_t source_state = 0;
    int delay = 1;
    std::size_t prev_action = 0;

    friend bool operator==(const AugmentedState&, const AugmentedState&) = default;
};

struct Decision {
    int wait = 0;
    std::size_t action = 0;

    friend bool operator==(const Decision&, const Decision&) = default;
};

/// Index arithmetic for the augmented state and decision spaces. States are
/// ordered lexicographically by (source_state, delay, prev_action); decisions by
/// (wait, action).
class AugmentedSpace {
public:
    explicit AugmentedSpace(const MarkovControlModel& model);

    std::size_t num_states() const { return n_source_ * delay_.size() * n_actions_; }
    std::size_t num_decisions() const { return static_cast<std::size_t>(z_max_ + 1) * n_actions_; }

    std::size_t index(const AugmentedState& g) const;
    AugmentedState state(std::size_t index) const;

    std::size_t decision_index(const Decision& d) const {
        return static_cast<std::size_t>(d.wait) * n_actions_ + d.action;
    }
    Decision decision(std::size_t index) const {
        return Decision{static_cast<int>(index / n_actions_), index % n_actions_};
    }

private:
    std::size_t n_source_;
    std::size_t n_actions_;
    DelayPmf delay_;
    int z_max_;
};

std::vector<AugmentedState> enumerate_augmented_states(const MarkovControlModel& model);

/// Deterministic stationary policy over the augmented space, indexed by
/// augmented state index.
struct StagePolicy {
    std::vector<Decision> decisions;

    const Decision& operator()(std::size_t state_index) const { return decisions.at(state_index); }
    std::size_t size() const { return decisions.size(); }
};

}  // namespace agemdp
