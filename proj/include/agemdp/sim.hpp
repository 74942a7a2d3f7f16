#pragma once

#include "agemdp/model.hpp"
#include "agemdp/solvers.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace agemdp {

struct SimConfig {
    std::uint64_t horizon = 1'000'000;
    std::uint64_t seed = 1;
    std::size_t initial_state = 0;
    std::optional<int> initial_age;          // defaults to the smallest delay
    std::optional<std::uint64_t> burn_in;    // defaults to 1% of the horizon
    bool record_trajectory = false;

    std::uint64_t effective_burn_in() const { return burn_in.value_or(horizon / 100); }
};

enum class SlotEvent { None, Sample, Delivery, DeliveryAndSample };

const char* to_string(SlotEvent event);

struct TrajectoryRow {
    std::uint64_t t;
    std::size_t source_state;
    std::size_t action;
    std::int64_t age;
    double cost;
    SlotEvent event;
};

struct SimReport {
    double avg_cost = 0.0;
    double avg_age = 0.0;
    std::uint64_t frames = 0;           // deliveries over the whole horizon
    double se_cost = 0.0;               // batch-means standard errors
    double se_age = 0.0;
    double ci_halfwidth_cost = 0.0;     // 95% batch-means half-widths
    double ci_halfwidth_age = 0.0;
    std::size_t batches = 0;
    std::string rng;
    std::vector<TrajectoryRow> trajectory;
};

/// Slot-by-slot closed loop: source under the held action, sampler waiting
/// policy(G).wait after each delivery, i.i.d. channel delay, controller
/// switching actions only at deliveries. The first frame runs under action 0.
SimReport simulate(const MarkovControlModel& model, const StagePolicy& policy, const SimConfig& config);

struct FrameSampleReport {
    std::vector<double> frequencies;  // empirical next augmented-state distribution
    double mean_cost = 0.0;           // sample mean of accumulated frame cost
    double se_cost = 0.0;
    std::size_t frames = 0;
};

/// Monte Carlo estimate of one augmented transition: n independent frames
/// from G under `decision`, frame i drawing from its own stream.
FrameSampleReport frame_sampler(const MarkovControlModel& model, const AugmentedState& g, const Decision& decision,
                                std::uint64_t seed, std::size_t n);

struct SweepRow {
    double p;
    std::string policy;
    double h_solver;
    double avg_cost_sim;
    double ci_cost;
    double se_cost;
    double avg_age;
    double ci_age;
    double se_age;
    bool age_is_analytic;
    std::optional<int> beta;
};

/// For each p: two-point delay pmf (y_low w.p. p, y_high otherwise), optimal
/// policy by FPBI, both benchmarks by restricted FPBI, then simulation of all
/// three. Rows are ordered by p, then optimal / zero-wait / aoi-optimal.
std::vector<SweepRow> sweep_p(const MarkovControlModel& base, int y_low, int y_high, const std::vector<double>& p_values,
                              const SimConfig& sim_config, const SolverOptions& options = {});

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& trajectory);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace agemdp
