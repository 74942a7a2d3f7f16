#include "agemdp/augmentation.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "agemdp/csv.hpp"

namespace agemdp {

namespace {

constexpr double kStochasticTolerance = 1e-10;

void require_row_stochastic(const Matrix& m, const char* what) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double sum = m.row(r).sum();
        if (std::abs(sum - 1.0) > kStochasticTolerance) {
            std::ostringstream os;
            os.precision(17);
            os << what << ": row " << r << " sums to " << sum;
            throw std::domain_error(os.str());
        }
    }
}

}  // namespace

MatrixPowerCache::MatrixPowerCache(const MarkovControlModel& model, int max_power) : max_power_(max_power) {
    const auto n = static_cast<Eigen::Index>(model.num_states());
    powers_.resize(model.num_actions());
    for (std::size_t a = 0; a < model.num_actions(); ++a) {
        auto& seq = powers_[a];
        seq.reserve(static_cast<std::size_t>(max_power) + 1);
        seq.push_back(Matrix::Identity(n, n));
        for (int k = 1; k <= max_power; ++k) {
            seq.push_back(seq.back() * model.kernel(a));
            require_row_stochastic(seq.back(), "cached matrix power");
        }
    }
}

const Matrix& MatrixPowerCache::power(std::size_t action, int k) const {
    if (k < 0 || k > max_power_) throw std::out_of_range("matrix power exponent outside the cached range");
    return powers_.at(action)[static_cast<std::size_t>(k)];
}

AugmentedMdp::AugmentedMdp(MarkovControlModel model)
    : model_(std::move(model)),
      space_(model_),
      n_states_(space_.num_states()),
      n_decisions_(space_.num_decisions()) {
    const DelayPmf& pmf = model_.delay();
    const int z_max = model_.z_max();
    const int horizon = z_max + pmf.max_delay();
    const std::size_t n_src = model_.num_states();
    const std::size_t n_act = model_.num_actions();
    const MatrixPowerCache cache(model_, horizon);

    // prefix[A][L] = sum_{t<L} P_A^t * C(:,A), the expected cost of L slots under A
    // from each starting source state.
    std::vector<std::vector<Vector>> prefix(n_act);
    for (std::size_t a = 0; a < n_act; ++a) {
        const Vector c = model_.cost_table().col(static_cast<Eigen::Index>(a));
        auto& acc = prefix[a];
        acc.reserve(static_cast<std::size_t>(horizon) + 1);
        acc.push_back(Vector::Zero(static_cast<Eigen::Index>(n_src)));
        for (int t = 0; t < horizon; ++t) acc.push_back(acc.back() + cache.power(a, t) * c);
    }

    const double mean_delay = delay_expectation(pmf);
    f_.resize(static_cast<std::size_t>(z_max) + 1);
    for (int z = 0; z <= z_max; ++z) f_[static_cast<std::size_t>(z)] = z + mean_delay;

    kernel_.assign(n_states_ * n_decisions_ * n_states_, 0.0);
    q_.assign(n_states_ * n_decisions_, 0.0);

    for (std::size_t gi = 0; gi < n_states_; ++gi) {
        const AugmentedState g = space_.state(gi);
        const Eigen::RowVectorXd at_delivery =
            cache.power(g.prev_action, g.delay).row(static_cast<Eigen::Index>(g.source_state));
        for (std::size_t di = 0; di < n_decisions_; ++di) {
            const Decision d = space_.decision(di);
            const Eigen::RowVectorXd at_sample = at_delivery * cache.power(d.action, d.wait);

            double* row = kernel_.data() + (gi * n_decisions_ + di) * n_states_;
            double row_sum = 0.0;
            for (std::size_t s = 0; s < n_src; ++s) {
                for (std::size_t yi = 0; yi < pmf.size(); ++yi) {
                    const double p = pmf.probs[yi] * at_sample(static_cast<Eigen::Index>(s));
                    row[space_.index({s, pmf.support[yi], d.action})] = p;
                    row_sum += p;
                }
            }
            if (std::abs(row_sum - 1.0) > kStochasticTolerance) {
                std::ostringstream os;
                os.precision(17);
                os << "augmented kernel row (state " << gi << ", decision " << di << ") sums to " << row_sum;
                throw std::domain_error(os.str());
            }

            double q = 0.0;
            for (std::size_t yi = 0; yi < pmf.size(); ++yi) {
                const auto len = static_cast<std::size_t>(d.wait + pmf.support[yi]);
                q += pmf.probs[yi] * at_delivery.dot(prefix[d.action][len]);
            }
            q_[gi * n_decisions_ + di] = q;
        }
    }
}

double AugmentedMdp::expected_next(std::size_t state, std::size_t decision, std::span<const double> values) const {
    const auto row = kernel_row(state, decision);
    double acc = 0.0;
    for (std::size_t j = 0; j < n_states_; ++j) acc += row[j] * values[j];
    return acc;
}

Matrix AugmentedMdp::induced_chain(const StagePolicy& policy) const {
    if (policy.size() != n_states_) throw std::invalid_argument("policy does not cover the augmented state space");
    const auto n = static_cast<Eigen::Index>(n_states_);
    Matrix chain(n, n);
    for (std::size_t g = 0; g < n_states_; ++g) {
        const auto row = kernel_row(g, space_.decision_index(policy(g)));
        for (std::size_t j = 0; j < n_states_; ++j) chain(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(j)) = row[j];
    }
    return chain;
}

void AugmentedMdp::write_kernel_csv(std::ostream& os) const {
    CsvWriter csv(os, {"state", "wait", "action", "next_state", "probability"});
    for (std::size_t g = 0; g < n_states_; ++g) {
        for (std::size_t di = 0; di < n_decisions_; ++di) {
            const Decision d = space_.decision(di);
            const auto row = kernel_row(g, di);
            for (std::size_t j = 0; j < n_states_; ++j) {
                if (row[j] == 0.0) continue;
                csv.row(g, d.wait, d.action, j, row[j]);
            }
        }
    }
}

void AugmentedMdp::write_q_csv(std::ostream& os) const {
    CsvWriter csv(os, {"state", "wait", "action", "q", "f"});
    for (std::size_t g = 0; g < n_states_; ++g) {
        for (std::size_t di = 0; di < n_decisions_; ++di) {
            const Decision d = space_.decision(di);
            csv.row(g, d.wait, d.action, q(g, di), f(d.wait));
        }
    }
}

std::vector<double> transition_kernel(const MarkovControlModel& model, const AugmentedState& g, const Decision& d) {
    const AugmentedSpace space(model);
    const DelayPmf& pmf = model.delay();
    Matrix propagate = Matrix::Identity(static_cast<Eigen::Index>(model.num_states()),
                                        static_cast<Eigen::Index>(model.num_states()));
    for (int k = 0; k < g.delay; ++k) propagate = propagate * model.kernel(g.prev_action);
    for (int k = 0; k < d.wait; ++k) propagate = propagate * model.kernel(d.action);

    std::vector<double> out(space.num_states(), 0.0);
    for (std::size_t s = 0; s < model.num_states(); ++s) {
        for (std::size_t yi = 0; yi < pmf.size(); ++yi) {
            out[space.index({s, pmf.support[yi], d.action})] =
                pmf.probs[yi] * propagate(static_cast<Eigen::Index>(g.source_state), static_cast<Eigen::Index>(s));
        }
    }
    return out;
}

double expected_frame_cost(const MarkovControlModel& model, const AugmentedState& g, const Decision& d) {
    const DelayPmf& pmf = model.delay();
    Eigen::RowVectorXd dist = Eigen::RowVectorXd::Unit(static_cast<Eigen::Index>(model.num_states()),
                                                       static_cast<Eigen::Index>(g.source_state));
    for (int k = 0; k < g.delay; ++k) dist = dist * model.kernel(g.prev_action);

    const Vector c = model.cost_table().col(static_cast<Eigen::Index>(d.action));
    double q = 0.0;
    for (std::size_t yi = 0; yi < pmf.size(); ++yi) {
        Eigen::RowVectorXd x = dist;
        double frame = 0.0;
        for (int t = 0; t < d.wait + pmf.support[yi]; ++t) {
            frame += x.dot(c);
            x = x * model.kernel(d.action);
        }
        q += pmf.probs[yi] * frame;
    }
    return q;
}

double stage_cost(const AugmentedMdp& mdp, const AugmentedState& g, const Decision& d, double lambda) {
    const AugmentedSpace& space = mdp.space();
    return mdp.stage_cost(space.index(g), space.decision_index(d), lambda);
}

}  // namespace agemdp
