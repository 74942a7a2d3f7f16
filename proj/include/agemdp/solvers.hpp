#pragma once

#include "agemdp/analysis.hpp"
#include "agemdp/augmentation.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace agemdp {

struct SolverOptions {
    double tol = 1e-9;        // MRVI span-seminorm threshold
    double epsilon = 1e-6;    // bisection width / FPBI sup-norm threshold
    double damping = 0.5;     // MRVI tau in (0, 1]
    std::size_t max_sweeps = 100000;
};

/// Per-state subsets of the decision space. Solvers minimize only over the
/// allowed decisions; the benchmarks use this to pin the waiting time.
class DecisionRestriction {
public:
    static DecisionRestriction full(const AugmentedMdp& mdp);
    explicit DecisionRestriction(std::vector<std::vector<std::size_t>> allowed);

    const std::vector<std::size_t>& allowed(std::size_t state) const { return allowed_[state]; }
    std::size_t num_states() const { return allowed_.size(); }

private:
    std::vector<std::vector<std::size_t>> allowed_;
};

struct RelativeValueTable {
    std::vector<double> values;
    std::size_t ref_state = 0;
};

struct TraceEntry {
    std::size_t iteration;
    std::size_t sweep_count;  // cumulative full passes when this entry was recorded
    double value;             // lambda (bisection) or h (fixed point)
    double metric;            // U(lambda) or sup-norm change of W
};

struct SolveReport {
    std::string solver;
    double h_star = 0.0;
    StagePolicy policy;
    RelativeValueTable values;
    std::vector<TraceEntry> trace;
    std::size_t sweeps = 0;
    bool converged = false;
    double wall_seconds = 0.0;
    std::vector<std::string> warnings;
};

struct MrviResult {
    double average_cost;  // U(lambda)
    RelativeValueTable values;
    StagePolicy policy;
    std::size_t sweeps;
    bool converged;
    double span;
};

class BoundsInvertedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonFiniteValueError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OracleTooLargeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Damped relative value iteration for the lambda-parameterized MDP:
///   V <- (1 - tau) V + tau T_lambda V,  then V <- V - V(ref).
/// Stops once the span of successive iterates drops below options.tol.
/// U(lambda) is read off the undamped backup at the reference state.
MrviResult mrvi_solve(const AugmentedMdp& mdp, double lambda, const SolverOptions& options = {},
                      const DecisionRestriction* restriction = nullptr);

/// Bisection on the sign of U(lambda) between the h* bounds, with an MRVI
/// solve per midpoint.
SolveReport bisec_mrvi(const AugmentedMdp& mdp, const SolverOptions& options = {});

/// One-layer fixed-point iteration on (W, h):
///   h_k = min_d [q(ref,d) + E W_{k-1}] / f(d)
///   W_k = T(W_{k-1}, h_k),  W_k(ref) = 0.
SolveReport fpbi_solve(const AugmentedMdp& mdp, const SolverOptions& options = {},
                       const DecisionRestriction* restriction = nullptr);

struct PolicyEvaluation {
    double average_cost;       // mean frame cost / mean frame length
    double mean_frame_cost;    // sum_G mu(G) q(G, pi(G))
    double mean_frame_length;  // sum_G mu(G) f(pi(G).wait)
    Vector stationary;         // mu over augmented states
};

/// Renewal-reward evaluation of a stationary policy on its induced chain.
/// Throws NotUnichainError when the induced chain has several closed classes.
PolicyEvaluation evaluate_policy(const AugmentedMdp& mdp, const StagePolicy& policy);

double evaluate_policy_average_cost(const AugmentedMdp& mdp, const StagePolicy& policy);

/// Long-run per-frame average of g(.; lambda) under `policy`.
double evaluate_policy_stage_average(const AugmentedMdp& mdp, const StagePolicy& policy, double lambda);

struct BruteForceResult {
    double best_average_cost;
    StagePolicy best_policy;
    std::uint64_t policies_evaluated = 0;
    std::uint64_t not_unichain = 0;
};

/// Number of stationary deterministic policies, saturating at UINT64_MAX.
std::uint64_t policy_count(const AugmentedMdp& mdp);

/// Exhaustive search over every stationary deterministic policy. Throws
/// OracleTooLargeError if the policy count exceeds `budget`.
BruteForceResult brute_force_optimum(const AugmentedMdp& mdp, std::uint64_t budget);

/// Minimum over all stationary deterministic policies of the per-frame
/// average of g(.; lambda).
double brute_force_min_stage_average(const AugmentedMdp& mdp, double lambda, std::uint64_t budget);

}  // namespace agemdp
