#include "agemdp/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

namespace agemdp {

namespace {

constexpr std::size_t kRefState = 0;
constexpr double kBoundSignTolerance = 1e-9;

const DecisionRestriction& resolve(const AugmentedMdp& mdp, const DecisionRestriction* restriction,
                                   std::optional<DecisionRestriction>& storage) {
    if (restriction != nullptr) {
        if (restriction->num_states() != mdp.num_states()) {
            throw std::invalid_argument("decision restriction does not match the augmented state space");
        }
        return *restriction;
    }
    return storage.emplace(DecisionRestriction::full(mdp));
}

// One greedy backup of `values` with stage cost q - lambda * f. Fills `backup`
// and `argmin`; ties go to the lexicographically smallest (wait, action).
void bellman_backup(const AugmentedMdp& mdp, const DecisionRestriction& allowed, double lambda,
                    const std::vector<double>& values, std::vector<double>& backup, std::vector<std::size_t>& argmin) {
    for (std::size_t g = 0; g < mdp.num_states(); ++g) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_d = 0;
        for (std::size_t d : allowed.allowed(g)) {
            const double v = mdp.stage_cost(g, d, lambda) + mdp.expected_next(g, d, values);
            if (v < best) {
                best = v;
                best_d = d;
            }
        }
        backup[g] = best;
        argmin[g] = best_d;
    }
}

StagePolicy to_policy(const AugmentedMdp& mdp, const std::vector<std::size_t>& argmin) {
    StagePolicy policy;
    policy.decisions.reserve(argmin.size());
    for (std::size_t d : argmin) policy.decisions.push_back(mdp.space().decision(d));
    return policy;
}

void warn_if_wait_capped(const AugmentedMdp& mdp, SolveReport& report) {
    const int z_max = mdp.model().z_max();
    if (z_max == 0) return;
    const bool capped = std::any_of(report.policy.decisions.begin(), report.policy.decisions.end(),
                                    [z_max](const Decision& d) { return d.wait == z_max; });
    if (capped) {
        report.warnings.push_back("policy selects wait = z_max = " + std::to_string(z_max) +
                                  " somewhere; the wait truncation may bias h*");
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

DecisionRestriction DecisionRestriction::full(const AugmentedMdp& mdp) {
    std::vector<std::size_t> all(mdp.num_decisions());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return DecisionRestriction(std::vector<std::vector<std::size_t>>(mdp.num_states(), all));
}

DecisionRestriction::DecisionRestriction(std::vector<std::vector<std::size_t>> allowed) : allowed_(std::move(allowed)) {
    for (auto& set : allowed_) {
        if (set.empty()) throw std::invalid_argument("every augmented state needs at least one allowed decision");
        std::sort(set.begin(), set.end());
    }
}

MrviResult mrvi_solve(const AugmentedMdp& mdp, double lambda, const SolverOptions& options,
                      const DecisionRestriction* restriction) {
    if (!(options.damping > 0.0 && options.damping <= 1.0)) throw std::invalid_argument("MRVI damping must lie in (0, 1]");
    if (!(options.tol > 0.0)) throw std::invalid_argument("MRVI tolerance must be positive");
    std::optional<DecisionRestriction> storage;
    const DecisionRestriction& allowed = resolve(mdp, restriction, storage);

    const std::size_t n = mdp.num_states();
    const double tau = options.damping;
    std::vector<double> values(n, 0.0), backup(n), next(n);
    std::vector<std::size_t> argmin(n, 0);

    MrviResult result{0.0, {}, {}, 0, false, std::numeric_limits<double>::infinity()};
    while (result.sweeps < options.max_sweeps) {
        bellman_backup(mdp, allowed, lambda, values, backup, argmin);
        ++result.sweeps;
        result.average_cost = backup[kRefState] - values[kRefState];

        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t g = 0; g < n; ++g) {
            next[g] = (1.0 - tau) * values[g] + tau * backup[g];
            const double diff = next[g] - values[g];
            lo = std::min(lo, diff);
            hi = std::max(hi, diff);
        }
        const double pin = next[kRefState];
        for (double& v : next) v -= pin;
        values.swap(next);
        result.span = hi - lo;

        if (!std::isfinite(result.span)) throw NonFiniteValueError("MRVI diverged (non-finite relative values)");
        if (result.span < options.tol) {
            result.converged = true;
            break;
        }
    }
    result.values = RelativeValueTable{std::move(values), kRefState};
    result.policy = to_policy(mdp, argmin);
    return result;
}

SolveReport bisec_mrvi(const AugmentedMdp& mdp, const SolverOptions& options) {
    if (!(options.epsilon > 0.0)) throw std::invalid_argument("bisection tolerance must be positive");
    const auto start = std::chrono::steady_clock::now();
    const HStarBounds bounds = h_star_bounds(mdp.model());

    SolveReport report;
    report.solver = "bisec-mrvi";
    report.converged = true;
    double lo = bounds.lower;
    double hi = bounds.upper;
    bool lo_moved = false;
    bool hi_moved = false;
    std::size_t iteration = 0;
    MrviResult last{};
    bool have_last = false;

    auto solve_at = [&](double lambda) {
        MrviResult r = mrvi_solve(mdp, lambda, options);
        report.sweeps += r.sweeps;
        if (!r.converged) {
            report.converged = false;
            std::ostringstream os;
            os << "MRVI hit max_sweeps at lambda = " << lambda;
            report.warnings.push_back(os.str());
        }
        report.trace.push_back({++iteration, report.sweeps, lambda, r.average_cost});
        return r;
    };

    while (hi - lo >= options.epsilon) {
        const double lambda = 0.5 * (lo + hi);
        last = solve_at(lambda);
        have_last = true;
        if (last.average_cost > 0.0) {
            lo = lambda;
            lo_moved = true;
        } else {
            hi = lambda;
            hi_moved = true;
        }
    }

    // The bounds are only trusted where the search actually ended up pressed
    // against one of them.
    if (!lo_moved) {
        MrviResult r = solve_at(bounds.lower);
        if (r.average_cost < -kBoundSignTolerance) {
            std::ostringstream os;
            os << "U(lower bound " << bounds.lower << ") = " << r.average_cost << " < 0";
            throw BoundsInvertedError(os.str());
        }
        if (!have_last) last = std::move(r), have_last = true;
    }
    if (!hi_moved && bounds.upper != bounds.lower) {
        MrviResult r = solve_at(bounds.upper);
        if (r.average_cost > kBoundSignTolerance) {
            std::ostringstream os;
            os << "U(upper bound " << bounds.upper << ") = " << r.average_cost << " > 0";
            throw BoundsInvertedError(os.str());
        }
    }

    report.h_star = 0.5 * (lo + hi);
    report.policy = std::move(last.policy);
    report.values = std::move(last.values);
    report.wall_seconds = seconds_since(start);
    warn_if_wait_capped(mdp, report);
    return report;
}

SolveReport fpbi_solve(const AugmentedMdp& mdp, const SolverOptions& options, const DecisionRestriction* restriction) {
    if (!(options.epsilon > 0.0)) throw std::invalid_argument("fixed-point tolerance must be positive");
    const auto start = std::chrono::steady_clock::now();
    std::optional<DecisionRestriction> storage;
    const DecisionRestriction& allowed = resolve(mdp, restriction, storage);

    const std::size_t n = mdp.num_states();
    std::vector<double> values(n, 0.0), next(n);
    std::vector<std::size_t> argmin(n, 0);

    SolveReport report;
    report.solver = restriction == nullptr ? "fpbi" : "fpbi-restricted";
    auto ratio_at_ref = [&] {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t d : allowed.allowed(kRefState)) {
            best = std::min(best, (mdp.q(kRefState, d) + mdp.expected_next(kRefState, d, values)) / mdp.f_of_decision(d));
        }
        if (!std::isfinite(best)) throw NonFiniteValueError("fixed-point iteration produced a non-finite h");
        return best;
    };
    double h = 0.0;
    while (report.sweeps < options.max_sweeps) {
        h = ratio_at_ref();

        bellman_backup(mdp, allowed, h, values, next, argmin);
        ++report.sweeps;
        const double pin = next[kRefState];
        double change = 0.0;
        for (std::size_t g = 0; g < n; ++g) {
            next[g] -= pin;
            change = std::max(change, std::abs(next[g] - values[g]));
        }
        if (!std::isfinite(change)) throw NonFiniteValueError("fixed-point iteration produced non-finite values");
        values.swap(next);
        report.trace.push_back({report.sweeps, report.sweeps, h, change});
        if (change < options.epsilon) {
            report.converged = true;
            break;
        }
    }
    if (!report.converged) report.warnings.push_back("fixed-point iteration hit max_sweeps before converging");
    // one more ratio step on the final W; no sweep needed
    h = ratio_at_ref();

    report.h_star = h;
    report.policy = to_policy(mdp, argmin);
    report.values = RelativeValueTable{std::move(values), kRefState};
    report.wall_seconds = seconds_since(start);
    if (restriction == nullptr) warn_if_wait_capped(mdp, report);
    return report;
}

PolicyEvaluation evaluate_policy(const AugmentedMdp& mdp, const StagePolicy& policy) {
    const Matrix chain = mdp.induced_chain(policy);
    const ChainReport chain_report = unichain_check(chain);
    if (!chain_report.is_unichain) {
        throw NotUnichainError("policy induces " + std::to_string(chain_report.closed_classes) +
                               " closed classes; its average cost depends on the initial state");
    }
    PolicyEvaluation eval{0.0, 0.0, 0.0, stationary_distribution_unchecked(chain)};
    const AugmentedSpace& space = mdp.space();
    for (std::size_t g = 0; g < mdp.num_states(); ++g) {
        const double mu = eval.stationary(static_cast<Eigen::Index>(g));
        eval.mean_frame_cost += mu * mdp.q(g, space.decision_index(policy(g)));
        eval.mean_frame_length += mu * mdp.f(policy(g).wait);
    }
    eval.average_cost = eval.mean_frame_cost / eval.mean_frame_length;
    return eval;
}

double evaluate_policy_average_cost(const AugmentedMdp& mdp, const StagePolicy& policy) {
    return evaluate_policy(mdp, policy).average_cost;
}

double evaluate_policy_stage_average(const AugmentedMdp& mdp, const StagePolicy& policy, double lambda) {
    const PolicyEvaluation eval = evaluate_policy(mdp, policy);
    return eval.mean_frame_cost - lambda * eval.mean_frame_length;
}

}  // namespace agemdp
