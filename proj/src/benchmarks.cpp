#include "agemdp/benchmarks.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace agemdp {

namespace {

// E[delay * L + L(L-1)/2] over L = wait + Y'.
double expected_frame_age(const DelayPmf& pmf, int delay, int wait) {
    double acc = 0.0;
    for (std::size_t j = 0; j < pmf.size(); ++j) {
        const double len = wait + pmf.support[j];
        acc += pmf.probs[j] * (delay * len + 0.5 * len * (len - 1.0));
    }
    return acc;
}

}  // namespace

int SamplingRule::wait_for(int delay) const {
    switch (kind) {
        case Kind::ZeroWait: return 0;
        case Kind::Threshold: return std::min(std::max(0, beta - delay), z_max);
        case Kind::Free: break;
    }
    throw std::logic_error("a free sampling rule has no fixed wait");
}

bool SamplingRule::capped_for(int delay) const { return kind == Kind::Threshold && beta - delay > z_max; }

std::string SamplingRule::name() const {
    switch (kind) {
        case Kind::ZeroWait: return "zero-wait";
        case Kind::Threshold: return "aoi-optimal";
        case Kind::Free: return "optimal";
    }
    return "unknown";
}

double average_aoi(const DelayPmf& pmf, const SamplingRule& rule) {
    if (rule.kind == SamplingRule::Kind::Free) throw std::invalid_argument("average_aoi needs a delay-only sampling rule");
    const double mean_delay = delay_expectation(pmf);
    double age = 0.0;
    double length = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        const int wait = rule.wait_for(pmf.support[i]);
        age += pmf.probs[i] * expected_frame_age(pmf, pmf.support[i], wait);
        length += pmf.probs[i] * (wait + mean_delay);
    }
    return age / length;
}

ThresholdChoice aoi_optimal_threshold(const DelayPmf& pmf, int z_max) {
    ThresholdChoice best{0, SamplingRule::zero_wait(), std::numeric_limits<double>::infinity(), false};
    for (int beta = pmf.min_delay(); beta <= pmf.max_delay() + z_max; ++beta) {
        const SamplingRule rule = SamplingRule::threshold(beta, z_max);
        const double aoi = average_aoi(pmf, rule);
        if (aoi < best.average_aoi) best = {beta, rule, aoi, false};
    }
    for (int y : pmf.support) best.capped = best.capped || best.rule.capped_for(y);
    return best;
}

DecisionRestriction restriction_for(const AugmentedMdp& mdp, const SamplingRule& rule) {
    if (rule.kind == SamplingRule::Kind::Free) return DecisionRestriction::full(mdp);
    const AugmentedSpace& space = mdp.space();
    const std::size_t n_actions = mdp.model().num_actions();
    std::vector<std::vector<std::size_t>> allowed(mdp.num_states());
    for (std::size_t g = 0; g < mdp.num_states(); ++g) {
        const int wait = std::min(rule.wait_for(space.state(g).delay), mdp.model().z_max());
        for (std::size_t a = 0; a < n_actions; ++a) allowed[g].push_back(space.decision_index({wait, a}));
    }
    return DecisionRestriction(std::move(allowed));
}

SolveReport control_under_fixed_sampling(const AugmentedMdp& mdp, const SamplingRule& rule,
                                         const SolverOptions& options) {
    if (rule.kind == SamplingRule::Kind::Free) return fpbi_solve(mdp, options);
    const DecisionRestriction restriction = restriction_for(mdp, rule);
    SolveReport report = fpbi_solve(mdp, options, &restriction);
    report.solver = "fpbi/" + rule.name();
    for (int y : mdp.model().delay().support) {
        if (rule.capped_for(y) || rule.wait_for(y) > mdp.model().z_max()) {
            report.warnings.push_back("threshold wait for delay " + std::to_string(y) +
                                      " is clipped at z_max; benchmark differs from the uncapped rule");
        }
    }
    return report;
}

double evaluate_policy_average_aoi(const AugmentedMdp& mdp, const StagePolicy& policy) {
    const PolicyEvaluation eval = evaluate_policy(mdp, policy);
    const AugmentedSpace& space = mdp.space();
    double age = 0.0;
    for (std::size_t g = 0; g < mdp.num_states(); ++g) {
        age += eval.stationary(static_cast<Eigen::Index>(g)) *
               expected_frame_age(mdp.model().delay(), space.state(g).delay, policy(g).wait);
    }
    return age / eval.mean_frame_length;
}

}  // namespace agemdp
