#include "agemdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace agemdp {

namespace {

constexpr double kRowSumTolerance = 1e-12;

std::string describe_violations(const std::vector<Violation>& violations) {
    std::ostringstream os;
    os << "invalid model (" << violations.size() << " violation" << (violations.size() == 1 ? "" : "s") << ")";
    for (const auto& v : violations) {
        os << "\n  " << to_string(v.kind) << ": " << v.detail;
    }
    return os.str();
}

}  // namespace

std::size_t DelayPmf::index_of(int delay) const {
    auto it = std::lower_bound(support.begin(), support.end(), delay);
    if (it == support.end() || *it != delay) {
        throw std::out_of_range("delay " + std::to_string(delay) + " is not in the delay support");
    }
    return static_cast<std::size_t>(it - support.begin());
}

DelayPmf DelayPmf::two_point(double p, int y_low, int y_high) {
    if (p >= 1.0) return DelayPmf{{y_low}, {1.0}};
    if (p <= 0.0) return DelayPmf{{y_high}, {1.0}};
    return DelayPmf{{y_low, y_high}, {p, 1.0 - p}};
}

double delay_expectation(const DelayPmf& pmf) {
    double mean = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) mean += pmf.support[i] * pmf.probs[i];
    return mean;
}

const char* to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::DimensionMismatch: return "DimensionMismatch";
        case ViolationKind::NonStochasticRow: return "NonStochasticRow";
        case ViolationKind::NegativeProbability: return "NegativeProbability";
        case ViolationKind::ZeroOrNegativeDelaySupport: return "ZeroOrNegativeDelaySupport";
        case ViolationKind::DelaySupportNotIncreasing: return "DelaySupportNotIncreasing";
        case ViolationKind::NonPositiveDelayProbability: return "NonPositiveDelayProbability";
        case ViolationKind::PmfNotNormalized: return "PmfNotNormalized";
        case ViolationKind::NonFiniteCost: return "NonFiniteCost";
        case ViolationKind::NegativeWaitCap: return "NegativeWaitCap";
    }
    return "Unknown";
}

ModelValidationError::ModelValidationError(std::vector<Violation> violations)
    : std::runtime_error(describe_violations(violations)), violations_(std::move(violations)) {}

bool ModelValidationError::has(ViolationKind kind) const {
    return std::any_of(violations_.begin(), violations_.end(), [kind](const Violation& v) { return v.kind == kind; });
}

MarkovControlModel validate_model(const RawModel& raw) {
    std::vector<Violation> out;
    auto report = [&out](ViolationKind kind, std::string detail) { out.push_back({kind, std::move(detail)}); };

    const auto n_actions = static_cast<Eigen::Index>(raw.kernels.size());
    const Eigen::Index n_states = raw.kernels.empty() ? 0 : raw.kernels.front().rows();
    if (raw.kernels.empty()) report(ViolationKind::DimensionMismatch, "no transition kernels (empty action set)");
    if (!raw.kernels.empty() && n_states == 0) report(ViolationKind::DimensionMismatch, "empty state set");

    for (Eigen::Index a = 0; a < n_actions; ++a) {
        const Matrix& p = raw.kernels[static_cast<std::size_t>(a)];
        if (p.rows() != n_states || p.cols() != n_states) {
            std::ostringstream os;
            os << "kernel for action " << a << " is " << p.rows() << "x" << p.cols() << ", expected " << n_states
               << "x" << n_states;
            report(ViolationKind::DimensionMismatch, os.str());
            continue;
        }
        for (Eigen::Index s = 0; s < n_states; ++s) {
            double sum = 0.0;
            for (Eigen::Index t = 0; t < n_states; ++t) {
                const double v = p(s, t);
                if (!(v >= 0.0) || v > 1.0) {
                    std::ostringstream os;
                    os << "P_" << a << "(" << s << "," << t << ") = " << v << " outside [0,1]";
                    report(ViolationKind::NegativeProbability, os.str());
                }
                sum += v;
            }
            if (!(std::abs(sum - 1.0) <= kRowSumTolerance)) {
                std::ostringstream os;
                os.precision(17);
                os << "row " << s << " of P_" << a << " sums to " << sum;
                report(ViolationKind::NonStochasticRow, os.str());
            }
        }
    }

    if (raw.cost.rows() != n_states || raw.cost.cols() != n_actions) {
        std::ostringstream os;
        os << "cost table is " << raw.cost.rows() << "x" << raw.cost.cols() << ", expected " << n_states << "x"
           << n_actions;
        report(ViolationKind::DimensionMismatch, os.str());
    } else {
        for (Eigen::Index s = 0; s < n_states; ++s) {
            for (Eigen::Index a = 0; a < n_actions; ++a) {
                if (!std::isfinite(raw.cost(s, a))) {
                    std::ostringstream os;
                    os << "C(" << s << "," << a << ") = " << raw.cost(s, a);
                    report(ViolationKind::NonFiniteCost, os.str());
                }
            }
        }
    }

    const DelayPmf& pmf = raw.delay;
    if (pmf.support.empty() || pmf.support.size() != pmf.probs.size()) {
        report(ViolationKind::DimensionMismatch, "delay support and probabilities must be non-empty and equally long");
    } else {
        double total = 0.0;
        for (std::size_t i = 0; i < pmf.size(); ++i) {
            if (pmf.support[i] < 1) {
                report(ViolationKind::ZeroOrNegativeDelaySupport,
                       "delay support value " + std::to_string(pmf.support[i]) + " < 1");
            }
            if (i > 0 && pmf.support[i] <= pmf.support[i - 1]) {
                report(ViolationKind::DelaySupportNotIncreasing, "delay support is not strictly increasing");
            }
            if (!(pmf.probs[i] > 0.0)) {
                std::ostringstream os;
                os << "Pr(Y=" << pmf.support[i] << ") = " << pmf.probs[i];
                report(ViolationKind::NonPositiveDelayProbability, os.str());
            }
            total += pmf.probs[i];
        }
        if (!(std::abs(total - 1.0) <= kRowSumTolerance)) {
            std::ostringstream os;
            os.precision(17);
            os << "delay probabilities sum to " << total;
            report(ViolationKind::PmfNotNormalized, os.str());
        }
    }

    if (raw.z_max < 0) report(ViolationKind::NegativeWaitCap, "z_max = " + std::to_string(raw.z_max));

    if (!out.empty()) throw ModelValidationError(std::move(out));

    MarkovControlModel model;
    model.kernels_ = raw.kernels;
    model.cost_ = raw.cost;
    model.delay_ = raw.delay;
    model.z_max_ = raw.z_max;
    return model;
}

AugmentedSpace::AugmentedSpace(const MarkovControlModel& model)
    : n_source_(model.num_states()), n_actions_(model.num_actions()), delay_(model.delay()), z_max_(model.z_max()) {}

std::size_t AugmentedSpace::index(const AugmentedState& g) const {
    return (g.source_state * delay_.size() + delay_.index_of(g.delay)) * n_actions_ + g.prev_action;
}

AugmentedState AugmentedSpace::state(std::size_t index) const {
    const std::size_t a = index % n_actions_;
    const std::size_t rest = index / n_actions_;
    const std::size_t yi = rest % delay_.size();
    const std::size_t s = rest / delay_.size();
    return AugmentedState{s, delay_.support[yi], a};
}

std::vector<AugmentedState> enumerate_augmented_states(const MarkovControlModel& model) {
    const AugmentedSpace space(model);
    std::vector<AugmentedState> states;
    states.reserve(space.num_states());
    for (std::size_t s = 0; s < model.num_states(); ++s) {
        for (int y : model.delay().support) {
            for (std::size_t a = 0; a < model.num_actions(); ++a) states.push_back({s, y, a});
        }
    }
    return states;
}

}  // namespace agemdp
