#include "agemdp/analysis.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/strong_components.hpp>

namespace agemdp {

namespace {

constexpr double kEdgeThreshold = 1e-15;

using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS>;

}  // namespace

ChainReport unichain_check(const Matrix& transition) {
    const auto n = static_cast<std::size_t>(transition.rows());
    Graph graph(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (transition(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > kEdgeThreshold) {
                boost::add_edge(i, j, graph);
            }
        }
    }

    std::vector<std::size_t> component(n);
    const std::size_t n_components = n == 0 ? 0 : boost::strong_components(graph, component.data());

    std::vector<bool> has_exit(n_components, false);
    for (auto [it, end] = boost::edges(graph); it != end; ++it) {
        const auto from = component[boost::source(*it, graph)];
        const auto to = component[boost::target(*it, graph)];
        if (from != to) has_exit[from] = true;
    }

    ChainReport report;
    std::size_t sink = 0;
    for (std::size_t c = 0; c < n_components; ++c) {
        if (!has_exit[c]) {
            ++report.closed_classes;
            sink = c;
        }
    }
    report.is_unichain = report.closed_classes == 1;
    if (report.is_unichain) {
        for (std::size_t i = 0; i < n; ++i) {
            (component[i] == sink ? report.recurrent_class : report.transient_states).push_back(i);
        }
    }
    return report;
}

Vector stationary_distribution_unchecked(const Matrix& transition) {
    const Eigen::Index n = transition.rows();
    // Balance equations pi (P - I) = 0 with the last one replaced by sum(pi) = 1.
    Matrix system = transition.transpose() - Matrix::Identity(n, n);
    system.row(n - 1).setOnes();
    Vector rhs = Vector::Zero(n);
    rhs(n - 1) = 1.0;
    Vector pi = system.partialPivLu().solve(rhs);
    for (Eigen::Index i = 0; i < n; ++i) pi(i) = std::max(pi(i), 0.0);
    return pi / pi.sum();
}

Vector stationary_distribution(const Matrix& transition) {
    const ChainReport report = unichain_check(transition);
    if (!report.is_unichain) {
        throw NotUnichainError("chain has " + std::to_string(report.closed_classes) +
                               " closed classes; the stationary distribution is not unique");
    }
    return stationary_distribution_unchecked(transition);
}

HStarBounds h_star_bounds(const MarkovControlModel& model) {
    const Matrix& cost = model.cost_table();
    HStarBounds bounds{cost.minCoeff(), std::numeric_limits<double>::infinity()};
    for (std::size_t a = 0; a < model.num_actions(); ++a) {
        const Vector pi = stationary_distribution(model.kernel(a));
        bounds.upper = std::min(bounds.upper, pi.dot(cost.col(static_cast<Eigen::Index>(a))));
    }
    if (bounds.lower > bounds.upper + 1e-12) {
        throw std::logic_error("h* bounds inverted: lower " + std::to_string(bounds.lower) + " > upper " +
                               std::to_string(bounds.upper));
    }
    bounds.upper = std::max(bounds.upper, bounds.lower);
    return bounds;
}

ChainReport induced_chain_check(const AugmentedMdp& mdp, const StagePolicy& policy) {
    return unichain_check(mdp.induced_chain(policy));
}

}  // namespace agemdp
