#include "agemdp/solvers.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace agemdp {

namespace {

// Visits every stationary deterministic policy (mixed-radix counter over
// states, decisions in index order) and hands each unichain one's stationary
// evaluation to `visit`.
template <typename Visit>
void for_each_policy(const AugmentedMdp& mdp, std::uint64_t budget, std::uint64_t& not_unichain, Visit&& visit) {
    const std::uint64_t count = policy_count(mdp);
    if (count > budget) {
        throw OracleTooLargeError("exhaustive search over " + std::to_string(count) +
                                  " policies exceeds the budget of " + std::to_string(budget));
    }
    const std::size_t n = mdp.num_states();
    const std::size_t nd = mdp.num_decisions();
    const auto ni = static_cast<Eigen::Index>(n);
    std::vector<std::size_t> choice(n, 0);
    Matrix chain(ni, ni);

    auto load_row = [&](std::size_t g) {
        const auto row = mdp.kernel_row(g, choice[g]);
        for (std::size_t j = 0; j < n; ++j) chain(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(j)) = row[j];
    };
    for (std::size_t g = 0; g < n; ++g) load_row(g);

    while (true) {
        if (unichain_check(chain).is_unichain) {
            visit(choice, stationary_distribution_unchecked(chain));
        } else {
            ++not_unichain;
        }
        std::size_t g = 0;
        while (g < n && ++choice[g] == nd) {
            choice[g] = 0;
            load_row(g);
            ++g;
        }
        if (g == n) break;
        load_row(g);
    }
}

}  // namespace

std::uint64_t policy_count(const AugmentedMdp& mdp) {
    std::uint64_t count = 1;
    const std::uint64_t nd = mdp.num_decisions();
    for (std::size_t g = 0; g < mdp.num_states(); ++g) {
        if (count > std::numeric_limits<std::uint64_t>::max() / nd) return std::numeric_limits<std::uint64_t>::max();
        count *= nd;
    }
    return count;
}

BruteForceResult brute_force_optimum(const AugmentedMdp& mdp, std::uint64_t budget) {
    BruteForceResult result{std::numeric_limits<double>::infinity(), {}, 0, 0};
    std::vector<std::size_t> best;
    for_each_policy(mdp, budget, result.not_unichain, [&](const std::vector<std::size_t>& choice, const Vector& mu) {
        ++result.policies_evaluated;
        double cost = 0.0;
        double length = 0.0;
        for (std::size_t g = 0; g < choice.size(); ++g) {
            const double w = mu(static_cast<Eigen::Index>(g));
            cost += w * mdp.q(g, choice[g]);
            length += w * mdp.f_of_decision(choice[g]);
        }
        const double ratio = cost / length;
        if (ratio < result.best_average_cost) {
            result.best_average_cost = ratio;
            best = choice;
        }
    });
    for (std::size_t d : best) result.best_policy.decisions.push_back(mdp.space().decision(d));
    return result;
}

double brute_force_min_stage_average(const AugmentedMdp& mdp, double lambda, std::uint64_t budget) {
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t not_unichain = 0;
    for_each_policy(mdp, budget, not_unichain, [&](const std::vector<std::size_t>& choice, const Vector& mu) {
        double avg = 0.0;
        for (std::size_t g = 0; g < choice.size(); ++g) {
            avg += mu(static_cast<Eigen::Index>(g)) * mdp.stage_cost(g, choice[g], lambda);
        }
        best = std::min(best, avg);
    });
    return best;
}

}  // namespace agemdp
