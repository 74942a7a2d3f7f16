#include "agemdp/sim.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "agemdp/benchmarks.hpp"
#include "agemdp/csv.hpp"
#include "agemdp/rng.hpp"

namespace agemdp {

namespace {

constexpr std::size_t kBatches = 100;
constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

class BatchMeans {
public:
    explicit BatchMeans(std::uint64_t total) : batches_(std::min<std::uint64_t>(kBatches, std::max<std::uint64_t>(total, 1))),
                                               size_(std::max<std::uint64_t>(total / batches_, 1)),
                                               sums_(batches_, 0.0), counts_(batches_, 0) {}

    void add(std::uint64_t k, double value) {
        const auto b = std::min<std::uint64_t>(k / size_, batches_ - 1);
        sums_[b] += value;
        ++counts_[b];
        total_ += value;
        ++n_;
    }

    double mean() const { return n_ == 0 ? 0.0 : total_ / static_cast<double>(n_); }

    double standard_error() const {
        if (batches_ < 2) return 0.0;
        const double m = mean();
        double ss = 0.0;
        for (std::size_t b = 0; b < batches_; ++b) {
            const double d = sums_[b] / static_cast<double>(counts_[b]) - m;
            ss += d * d;
        }
        const double var = ss / static_cast<double>(batches_ - 1);
        return std::sqrt(var / static_cast<double>(batches_));
    }

    double half_width() const {
        if (batches_ < 2) return 0.0;
        const boost::math::students_t dist(static_cast<double>(batches_ - 1));
        return boost::math::quantile(dist, 0.975) * standard_error();
    }

    std::size_t batches() const { return batches_; }

private:
    std::size_t batches_;
    std::uint64_t size_;
    std::vector<double> sums_;
    std::vector<std::uint64_t> counts_;
    double total_ = 0.0;
    std::uint64_t n_ = 0;
};

auto kernel_row(const MarkovControlModel& model, std::size_t action, std::size_t state) {
    return model.kernel(action).row(static_cast<Eigen::Index>(state));
}

}  // namespace

const char* to_string(SlotEvent event) {
    switch (event) {
        case SlotEvent::None: return "none";
        case SlotEvent::Sample: return "sample";
        case SlotEvent::Delivery: return "delivery";
        case SlotEvent::DeliveryAndSample: return "delivery";
    }
    return "none";
}

SimReport simulate(const MarkovControlModel& model, const StagePolicy& policy, const SimConfig& config) {
    const AugmentedSpace space(model);
    if (policy.size() != space.num_states()) throw std::invalid_argument("policy does not cover the augmented state space");
    const std::uint64_t burn_in = config.effective_burn_in();
    if (config.horizon <= burn_in) throw std::invalid_argument("simulation horizon must exceed the burn-in");
    if (config.initial_state >= model.num_states()) throw std::invalid_argument("initial source state out of range");

    const DelayPmf& pmf = model.delay();
    Xoshiro256 rng(derive_seed(config.seed, "simulate"));
    BatchMeans cost_stats(config.horizon - burn_in);
    BatchMeans age_stats(config.horizon - burn_in);

    SimReport report;
    report.rng = Xoshiro256::kName;
    if (config.record_trajectory) report.trajectory.reserve(config.horizon);

    std::size_t x = config.initial_state;
    std::size_t action = 0;
    std::int64_t age = config.initial_age.value_or(pmf.min_delay());

    // The packet in flight. S_0 = 0: the first sample leaves at t = 0.
    std::size_t sent_state = x;
    int sent_delay = pmf.support[rng.sample_index(pmf.probs)];
    std::uint64_t sent_time = 0;
    std::uint64_t next_delivery = static_cast<std::uint64_t>(sent_delay);
    std::uint64_t next_sample = kNever;
    std::uint64_t last_delivery = kNever;
    int last_wait = 0;

    for (std::uint64_t t = 0; t < config.horizon; ++t) {
        SlotEvent event = SlotEvent::None;
        if (t == next_delivery) {
            if (last_delivery != kNever &&
                t - last_delivery != static_cast<std::uint64_t>(last_wait + sent_delay)) {
                throw std::logic_error("frame length differs from wait + delay");
            }
            age = static_cast<std::int64_t>(t - sent_time);
            const AugmentedState g{sent_state, sent_delay, action};
            const Decision& d = policy(space.index(g));
            action = d.action;
            last_wait = d.wait;
            last_delivery = t;
            next_sample = t + static_cast<std::uint64_t>(d.wait);
            next_delivery = kNever;
            ++report.frames;
            event = SlotEvent::Delivery;
        }
        if (t == next_sample) {
            if (next_delivery != kNever || t < last_delivery) throw std::logic_error("sample taken while the channel is busy");
            sent_state = x;
            sent_time = t;
            sent_delay = pmf.support[rng.sample_index(pmf.probs)];
            next_delivery = t + static_cast<std::uint64_t>(sent_delay);
            next_sample = kNever;
            event = event == SlotEvent::Delivery ? SlotEvent::DeliveryAndSample : SlotEvent::Sample;
        }

        const double cost = model.cost(x, action);
        if (t >= burn_in) {
            cost_stats.add(t - burn_in, cost);
            age_stats.add(t - burn_in, static_cast<double>(age));
        }
        if (config.record_trajectory) report.trajectory.push_back({t, x, action, age, cost, event});

        x = rng.sample_index(kernel_row(model, action, x));
        ++age;
    }

    report.avg_cost = cost_stats.mean();
    report.avg_age = age_stats.mean();
    report.se_cost = cost_stats.standard_error();
    report.se_age = age_stats.standard_error();
    report.ci_halfwidth_cost = cost_stats.half_width();
    report.ci_halfwidth_age = age_stats.half_width();
    report.batches = cost_stats.batches();
    return report;
}

FrameSampleReport frame_sampler(const MarkovControlModel& model, const AugmentedState& g, const Decision& decision,
                                std::uint64_t seed, std::size_t n) {
    if (n == 0) throw std::invalid_argument("frame_sampler needs at least one frame");
    const AugmentedSpace space(model);
    const DelayPmf& pmf = model.delay();
    FrameSampleReport report;
    report.frequencies.assign(space.num_states(), 0.0);
    report.frames = n;

    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Xoshiro256 rng(derive_seed(seed, "frame", i));
        std::size_t x = g.source_state;
        for (int k = 0; k < g.delay; ++k) x = rng.sample_index(kernel_row(model, g.prev_action, x));

        const int next_delay = pmf.support[rng.sample_index(pmf.probs)];
        const int length = decision.wait + next_delay;
        std::size_t sampled = x;
        double frame_cost = 0.0;
        for (int t = 0; t < length; ++t) {
            if (t == decision.wait) sampled = x;
            frame_cost += model.cost(x, decision.action);
            x = rng.sample_index(kernel_row(model, decision.action, x));
        }
        report.frequencies[space.index({sampled, next_delay, decision.action})] += 1.0;
        sum += frame_cost;
        sum_sq += frame_cost * frame_cost;
    }
    const auto nd = static_cast<double>(n);
    for (double& f : report.frequencies) f /= nd;
    report.mean_cost = sum / nd;
    const double var = n > 1 ? std::max(0.0, (sum_sq - nd * report.mean_cost * report.mean_cost) / (nd - 1.0)) : 0.0;
    report.se_cost = std::sqrt(var / nd);
    return report;
}

std::vector<SweepRow> sweep_p(const MarkovControlModel& base, int y_low, int y_high, const std::vector<double>& p_values,
                              const SimConfig& sim_config, const SolverOptions& options) {
    auto run_point = [&](double p) {
        if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("sweep p values must lie in (0, 1]");
        RawModel raw = base.to_raw();
        raw.delay = DelayPmf::two_point(p, y_low, y_high);
        const AugmentedMdp mdp(validate_model(raw));
        const ThresholdChoice threshold = aoi_optimal_threshold(mdp.model().delay(), mdp.model().z_max());

        struct Entry {
            SamplingRule rule;
            std::optional<int> beta;
        };
        const Entry entries[] = {{SamplingRule::free(), std::nullopt},
                                 {SamplingRule::zero_wait(), std::nullopt},
                                 {threshold.rule, threshold.beta}};

        std::vector<SweepRow> rows;
        for (const auto& [rule, beta] : entries) {
            const SolveReport solved = control_under_fixed_sampling(mdp, rule, options);
            SimConfig cfg = sim_config;
            cfg.record_trajectory = false;
            cfg.seed = derive_seed(sim_config.seed, "sweep/" + rule.name() + "/" + format_number(p));
            const SimReport sim = simulate(mdp.model(), solved.policy, cfg);

            SweepRow row{p, rule.name(), solved.h_star, sim.avg_cost, sim.ci_halfwidth_cost, sim.se_cost,
                         sim.avg_age, sim.ci_halfwidth_age, sim.se_age, false, beta};
            if (rule.kind != SamplingRule::Kind::Free) {
                row.avg_age = average_aoi(mdp.model().delay(), rule);
                row.ci_age = 0.0;
                row.se_age = 0.0;
                row.age_is_analytic = true;
            }
            rows.push_back(std::move(row));
        }
        return rows;
    };

    std::vector<std::future<std::vector<SweepRow>>> pending;
    pending.reserve(p_values.size());
    for (double p : p_values) pending.push_back(std::async(std::launch::async, run_point, p));

    std::vector<SweepRow> rows;
    for (auto& f : pending) {
        auto part = f.get();
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& trajectory) {
    CsvWriter csv(os, {"t", "source_state", "action", "age", "cost", "event"});
    for (const auto& r : trajectory) csv.row(r.t, r.source_state, r.action, r.age, r.cost, to_string(r.event));
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    CsvWriter csv(os, {"p", "policy", "h_solver", "avg_cost_sim", "ci_cost", "avg_age", "ci_age", "beta_if_any"});
    for (const auto& r : rows) {
        csv.row(r.p, r.policy, r.h_solver, r.avg_cost_sim, r.ci_cost, r.avg_age, r.ci_age,
                r.beta ? std::to_string(*r.beta) : std::string());
    }
}

}  // namespace agemdp
