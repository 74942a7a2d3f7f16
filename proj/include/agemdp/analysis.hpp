#pragma once

#include "agemdp/augmentation.hpp"
#include "agemdp/model.hpp"

#include <stdexcept>
#include <vector>

namespace agemdp {

class NotUnichainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Recurrent/transient decomposition of a finite chain.
struct ChainReport {
    bool is_unichain = false;
    std::size_t closed_classes = 0;
    std::vector<std::size_t> recurrent_class;   // the closed class when unichain
    std::vector<std::size_t> transient_states;  // everything outside it
};

/// Edges are transitions with probability > 1e-15. The chain is unichain iff
/// the condensation of the transition graph has exactly one sink component.
ChainReport unichain_check(const Matrix& transition);

/// Unique pi with pi P = pi, sum(pi) = 1. Throws NotUnichainError otherwise.
Vector stationary_distribution(const Matrix& transition);

/// Same as stationary_distribution but assumes the caller already verified the
/// unichain property.
Vector stationary_distribution_unchecked(const Matrix& transition);

struct HStarBounds {
    double lower;
    double upper;
};

/// lower = min_{s,a} C(s,a); upper = min_a sum_s pi_a(s) C(s,a).
HStarBounds h_star_bounds(const MarkovControlModel& model);

ChainReport induced_chain_check(const AugmentedMdp& mdp, const StagePolicy& policy);

}  // namespace agemdp
