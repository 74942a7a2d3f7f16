#pragma once

#include "agemdp/model.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace agemdp {

/// Memoized powers P_a^k, k = 0..max_power, for every action.
class MatrixPowerCache {
public:
    MatrixPowerCache(const MarkovControlModel& model, int max_power);

    const Matrix& power(std::size_t action, int k) const;
    int max_power() const { return max_power_; }

private:
    int max_power_;
    std::vector<std::vector<Matrix>> powers_;  // [action][k]
};

/// The delay-free MDP over augmented states with decisions (wait, action).
/// Kernel, expected frame cost q and frame length f are materialized once;
/// the Dinkelbach parameter only enters through stage_cost.
class AugmentedMdp {
public:
    explicit AugmentedMdp(MarkovControlModel model);

    const MarkovControlModel& model() const { return model_; }
    const AugmentedSpace& space() const { return space_; }
    std::size_t num_states() const { return n_states_; }
    std::size_t num_decisions() const { return n_decisions_; }

    /// Probability vector over next augmented states.
    std::span<const double> kernel_row(std::size_t state, std::size_t decision) const {
        return {kernel_.data() + (state * n_decisions_ + decision) * n_states_, n_states_};
    }
    double q(std::size_t state, std::size_t decision) const { return q_[state * n_decisions_ + decision]; }
    double f(int wait) const { return f_[static_cast<std::size_t>(wait)]; }
    double f_of_decision(std::size_t decision) const { return f(space_.decision(decision).wait); }
    double stage_cost(std::size_t state, std::size_t decision, double lambda) const {
        return q(state, decision) - lambda * f_of_decision(decision);
    }

    /// Expectation of `values` under the kernel row for (state, decision).
    double expected_next(std::size_t state, std::size_t decision, std::span<const double> values) const;

    /// |S_aug| x |S_aug| transition matrix of the chain induced by `policy`.
    Matrix induced_chain(const StagePolicy& policy) const;

    void write_kernel_csv(std::ostream& os) const;
    void write_q_csv(std::ostream& os) const;

private:
    MarkovControlModel model_;
    AugmentedSpace space_;
    std::size_t n_states_;
    std::size_t n_decisions_;
    std::vector<double> kernel_;
    std::vector<double> q_;
    std::vector<double> f_;
};

/// Next-state distribution for a single (state, decision); computed directly
/// from the model without the materialized tables.
std::vector<double> transition_kernel(const MarkovControlModel& model, const AugmentedState& g, const Decision& d);

/// Expected cost accumulated over the frame that starts at the delivery of g
/// and ends at the next delivery, holding action d.action throughout.
double expected_frame_cost(const MarkovControlModel& model, const AugmentedState& g, const Decision& d);

/// q - lambda * (wait + E[Y]).
double stage_cost(const AugmentedMdp& mdp, const AugmentedState& g, const Decision& d, double lambda);

}  // namespace agemdp
