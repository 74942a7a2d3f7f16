#pragma once

#include "agemdp/model.hpp"
#include "agemdp/solvers.hpp"

#include <string>

namespace agemdp {

/// How the waiting time is chosen after each delivery.
struct SamplingRule {
    enum class Kind { ZeroWait, Threshold, Free };

    Kind kind = Kind::Free;
    int beta = 0;   // threshold only
    int z_max = 0;  // cap applied to threshold waits

    static SamplingRule zero_wait() { return {Kind::ZeroWait, 0, 0}; }
    static SamplingRule threshold(int beta, int z_max) { return {Kind::Threshold, beta, z_max}; }
    static SamplingRule free() { return {Kind::Free, 0, 0}; }

    /// Wait after a delivery whose sample had delay `delay`. Not defined for Free.
    int wait_for(int delay) const;
    /// True when max(0, beta - delay) exceeded z_max and was clipped.
    bool capped_for(int delay) const;

    std::string name() const;
};

/// Exact long-run average age under a delay-only sampling rule:
/// E[Y L + L(L-1)/2] / E[L] with L = Z(Y) + Y', Y and Y' independent.
double average_aoi(const DelayPmf& pmf, const SamplingRule& rule);

struct ThresholdChoice {
    int beta;
    SamplingRule rule;
    double average_aoi;
    bool capped;  // some delay in the support has its wait clipped at z_max
};

/// Exhaustive search over integer beta in [min support, max support + z_max];
/// ties resolve to the smaller beta.
ThresholdChoice aoi_optimal_threshold(const DelayPmf& pmf, int z_max);

/// Decision sets {(Z(delay), A) : A} per augmented state; Free keeps everything.
DecisionRestriction restriction_for(const AugmentedMdp& mdp, const SamplingRule& rule);

/// Age-aware optimal control with the sampling rule held fixed, solved by the
/// restricted fixed-point iteration.
SolveReport control_under_fixed_sampling(const AugmentedMdp& mdp, const SamplingRule& rule,
                                         const SolverOptions& options = {});

/// Exact average age of an arbitrary stationary policy via its induced chain.
double evaluate_policy_average_aoi(const AugmentedMdp& mdp, const StagePolicy& policy);

}  // namespace agemdp
