#include "agemdp/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include <json.hpp>

#include "agemdp/analysis.hpp"
#include "agemdp/benchmarks.hpp"
#include "agemdp/csv.hpp"
#include "agemdp/sim.hpp"
#include "agemdp/solvers.hpp"

namespace agemdp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kConvergenceTarget = 1e-4;

fs::path output_dir(const ExperimentConfig& config) {
    fs::path dir(config.output.dir);
    fs::create_directories(dir);
    return dir;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
}

SolveReport solve_with(const AugmentedMdp& mdp, const SolverSection& solver) {
    return solver.algorithm == Algorithm::BisecMrvi ? bisec_mrvi(mdp, solver.options)
                                                     : fpbi_solve(mdp, solver.options);
}

json policy_json(const AugmentedMdp& mdp, const StagePolicy& policy) {
    json rows = json::array();
    for (std::size_t g = 0; g < policy.size(); ++g) {
        const AugmentedState s = mdp.space().state(g);
        rows.push_back({{"index", g},
                        {"source_state", s.source_state},
                        {"delay", s.delay},
                        {"prev_action", s.prev_action},
                        {"wait", policy(g).wait},
                        {"action", policy(g).action}});
    }
    return rows;
}

json report_json(const AugmentedMdp& mdp, const SolveReport& report, const HStarBounds& bounds) {
    json trace = json::array();
    for (const auto& t : report.trace) {
        trace.push_back({{"iteration", t.iteration}, {"sweep_count", t.sweep_count}, {"lambda_or_h", t.value},
                         {"metric", t.metric}});
    }
    return {{"solver", report.solver},
            {"h_star", report.h_star},
            {"bounds", {{"lower", bounds.lower}, {"upper", bounds.upper}}},
            {"converged", report.converged},
            {"sweeps", report.sweeps},
            {"wall_seconds", report.wall_seconds},
            {"warnings", report.warnings},
            {"ref_state", report.values.ref_state},
            {"relative_values", report.values.values},
            {"policy", policy_json(mdp, report.policy)},
            {"trace", trace}};
}

void write_trace_rows(CsvWriter& csv, const SolveReport& report) {
    for (const auto& t : report.trace) csv.row(report.solver, t.iteration, t.sweep_count, t.value, t.metric);
}

void print_policy(std::ostream& out, const AugmentedMdp& mdp, const StagePolicy& policy) {
    out << "  state (s, delay, prev_a) -> (wait, action)\n";
    for (std::size_t g = 0; g < policy.size(); ++g) {
        const AugmentedState s = mdp.space().state(g);
        out << "  " << std::setw(4) << g << "  (" << s.source_state << ", " << s.delay << ", " << s.prev_action
            << ") -> (" << policy(g).wait << ", " << policy(g).action << ")\n";
    }
}

void print_warnings(std::ostream& err, const SolveReport& report) {
    for (const auto& w : report.warnings) err << "warning: " << w << "\n";
}

std::optional<std::size_t> sweeps_to_reach(const SolveReport& report, double h_ref, double target) {
    for (const auto& t : report.trace) {
        if (std::abs(t.value - h_ref) < target) return t.sweep_count;
    }
    return std::nullopt;
}

int cmd_solve(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    const AugmentedMdp mdp(cfg.validated_model());
    const HStarBounds bounds = h_star_bounds(mdp.model());
    const SolveReport report = solve_with(mdp, cfg.solver);
    print_warnings(err, report);

    out << "solver        " << report.solver << "\n"
        << "h*            " << format_number(report.h_star) << "\n"
        << "bounds        [" << format_number(bounds.lower) << ", " << format_number(bounds.upper) << "]\n"
        << "converged     " << (report.converged ? "yes" : "no") << "\n"
        << "sweeps        " << report.sweeps << "\n"
        << "wall seconds  " << format_number(report.wall_seconds) << "\n";
    print_policy(out, mdp, report.policy);

    const fs::path dir = output_dir(cfg);
    open_output(dir / "solve_report.json") << report_json(mdp, report, bounds).dump(2) << "\n";
    auto trace_os = open_output(dir / "trace.csv");
    CsvWriter csv(trace_os, {"solver", "iteration", "sweep_count", "lambda_or_h", "metric"});
    write_trace_rows(csv, report);
    return report.converged ? kExitOk : kExitSolverFailure;
}

int cmd_benchmark(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    const AugmentedMdp mdp(cfg.validated_model());
    const DelayPmf& pmf = mdp.model().delay();
    const ThresholdChoice threshold = aoi_optimal_threshold(pmf, mdp.model().z_max());

    const SolveReport optimal = solve_with(mdp, cfg.solver);
    const SolveReport zero_wait = control_under_fixed_sampling(mdp, SamplingRule::zero_wait(), cfg.solver.options);
    const SolveReport aoi_opt = control_under_fixed_sampling(mdp, threshold.rule, cfg.solver.options);
    for (const auto* r : {&optimal, &zero_wait, &aoi_opt}) print_warnings(err, *r);

    struct Row {
        std::string name;
        double h;
        double aoi;
        std::string beta;
    };
    const Row rows[] = {
        {"optimal", optimal.h_star, evaluate_policy_average_aoi(mdp, optimal.policy), ""},
        {"zero-wait", zero_wait.h_star, average_aoi(pmf, SamplingRule::zero_wait()), ""},
        {"aoi-optimal", aoi_opt.h_star, threshold.average_aoi, std::to_string(threshold.beta)},
    };

    out << std::left << std::setw(14) << "policy" << std::setw(18) << "avg_cost" << std::setw(18) << "avg_aoi"
        << "beta\n";
    auto csv_os = open_output(output_dir(cfg) / "benchmark.csv");
    CsvWriter csv(csv_os, {"policy", "h_solver", "avg_aoi", "beta_if_any"});
    for (const auto& r : rows) {
        out << std::left << std::setw(14) << r.name << std::setw(18) << format_number(r.h) << std::setw(18)
            << format_number(r.aoi) << r.beta << "\n";
        csv.row(r.name, r.h, r.aoi, r.beta);
    }
    return kExitOk;
}

int cmd_simulate(const ExperimentConfig& cfg, const CliOptions& opts, std::ostream& out, std::ostream& err) {
    const AugmentedMdp mdp(cfg.validated_model());
    const SolveReport solved = solve_with(mdp, cfg.solver);
    print_warnings(err, solved);
    SimConfig sim_cfg = cfg.sim;
    sim_cfg.record_trajectory = opts.trajectory;
    const SimReport sim = simulate(mdp.model(), solved.policy, sim_cfg);

    out << "h* (solver)     " << format_number(solved.h_star) << "\n"
        << "avg cost (sim)  " << format_number(sim.avg_cost) << " +/- " << format_number(sim.ci_halfwidth_cost) << "\n"
        << "avg age (sim)   " << format_number(sim.avg_age) << " +/- " << format_number(sim.ci_halfwidth_age) << "\n"
        << "frames          " << sim.frames << "\n"
        << "rng             " << sim.rng << "\n";

    const fs::path dir = output_dir(cfg);
    const json report = {{"h_solver", solved.h_star},
                         {"avg_cost", sim.avg_cost},
                         {"avg_age", sim.avg_age},
                         {"frames", sim.frames},
                         {"ci_halfwidth_cost", sim.ci_halfwidth_cost},
                         {"ci_halfwidth_age", sim.ci_halfwidth_age},
                         {"se_cost", sim.se_cost},
                         {"se_age", sim.se_age},
                         {"batches", sim.batches},
                         {"horizon", sim_cfg.horizon},
                         {"burn_in", sim_cfg.effective_burn_in()},
                         {"seed", sim_cfg.seed},
                         {"rng", sim.rng}};
    open_output(dir / "sim_report.json") << report.dump(2) << "\n";
    if (opts.trajectory) {
        auto os = open_output(dir / "trajectory.csv");
        write_trajectory_csv(os, sim.trajectory);
    }
    return kExitOk;
}

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    int y_low = 0;
    int y_high = 0;
    if (cfg.model.two_point) {
        y_low = cfg.model.two_point->y_low;
        y_high = cfg.model.two_point->y_high;
    } else if (cfg.model.delay && cfg.model.delay->size() == 2) {
        y_low = cfg.model.delay->support[0];
        y_high = cfg.model.delay->support[1];
    } else {
        err << "error: sweep needs a two-point delay model\n";
        return kExitInvalidConfig;
    }
    if (cfg.sweep.p_values.empty()) {
        err << "error: no p values (set sweep.p in the config or pass --p LO:HI:STEP)\n";
        return kExitUsage;
    }

    const std::vector<SweepRow> rows =
        sweep_p(cfg.validated_model(), y_low, y_high, cfg.sweep.p_values, cfg.sim, cfg.solver.options);
    auto os = open_output(output_dir(cfg) / "sweep.csv");
    write_sweep_csv(os, rows);
    write_sweep_csv(out, rows);
    return kExitOk;
}

int cmd_convergence(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    const AugmentedMdp mdp(cfg.validated_model());
    const SolveReport bisec = bisec_mrvi(mdp, cfg.solver.options);
    const SolveReport fpbi = fpbi_solve(mdp, cfg.solver.options);
    print_warnings(err, bisec);
    print_warnings(err, fpbi);

    auto os = open_output(output_dir(cfg) / "convergence.csv");
    CsvWriter csv(os, {"solver", "iteration", "sweep_count", "lambda_or_h", "metric"});
    write_trace_rows(csv, bisec);
    write_trace_rows(csv, fpbi);

    const double h_ref = fpbi.h_star;
    auto describe = [&](const SolveReport& r) {
        const auto reached = sweeps_to_reach(r, h_ref, kConvergenceTarget);
        out << std::left << std::setw(12) << r.solver << " h* " << format_number(r.h_star) << "  total sweeps "
            << r.sweeps << "  sweeps to |h - h*| < 1e-4: " << (reached ? std::to_string(*reached) : "never") << "\n";
    };
    describe(bisec);
    describe(fpbi);
    return kExitOk;
}

void print_chain(std::ostream& out, const ChainReport& r) {
    out << (r.is_unichain ? "unichain" : "not unichain") << ", closed classes " << r.closed_classes;
    if (r.is_unichain) {
        out << ", recurrent {";
        for (std::size_t i = 0; i < r.recurrent_class.size(); ++i) out << (i ? "," : "") << r.recurrent_class[i];
        out << "}, transient {";
        for (std::size_t i = 0; i < r.transient_states.size(); ++i) out << (i ? "," : "") << r.transient_states[i];
        out << "}";
    }
    out << "\n";
}

int cmd_inspect(const ExperimentConfig& cfg, const CliOptions& opts, std::ostream& out) {
    const MarkovControlModel model = cfg.validated_model();
    out << "|S| = " << model.num_states() << ", |A| = " << model.num_actions() << ", |Y| = " << model.delay().size()
        << ", z_max = " << model.z_max() << ", E[Y] = " << format_number(delay_expectation(model.delay())) << "\n";
    bool all_unichain = true;
    for (std::size_t a = 0; a < model.num_actions(); ++a) {
        const ChainReport r = unichain_check(model.kernel(a));
        all_unichain = all_unichain && r.is_unichain;
        out << "P_" << a << ": ";
        print_chain(out, r);
    }
    if (all_unichain) {
        const HStarBounds b = h_star_bounds(model);
        out << "h* bounds: [" << format_number(b.lower) << ", " << format_number(b.upper) << "]\n";
    } else {
        out << "h* bounds: unavailable (some P_a is not unichain)\n";
    }

    const AugmentedMdp mdp(model);
    out << "augmented states (" << mdp.num_states() << "), decisions per state " << mdp.num_decisions() << "\n";
    for (std::size_t g = 0; g < mdp.num_states(); ++g) {
        const AugmentedState s = mdp.space().state(g);
        out << "  " << std::setw(4) << g << "  (" << s.source_state << ", " << s.delay << ", " << s.prev_action << ")\n";
    }
    if (opts.dump_tables) {
        const fs::path dir = output_dir(cfg);
        auto k = open_output(dir / "kernel.csv");
        mdp.write_kernel_csv(k);
        auto q = open_output(dir / "q_table.csv");
        mdp.write_q_csv(q);
    }
    return kExitOk;
}

int cmd_oracle(const ExperimentConfig& cfg, const CliOptions& opts, std::ostream& out) {
    const AugmentedMdp mdp(cfg.validated_model());
    const BruteForceResult brute = brute_force_optimum(mdp, opts.oracle_budget);
    const SolveReport fpbi = fpbi_solve(mdp, cfg.solver.options);
    out << "policies evaluated   " << brute.policies_evaluated << "\n"
        << "not unichain         " << brute.not_unichain << "\n"
        << "brute-force minimum  " << format_number(brute.best_average_cost) << "\n"
        << "fpbi h*              " << format_number(fpbi.h_star) << "\n"
        << "difference           " << format_number(fpbi.h_star - brute.best_average_cost) << "\n";
    print_policy(out, mdp, brute.best_policy);
    return kExitOk;
}

}  // namespace

void apply_overrides(ExperimentConfig& config, const CliOptions& options) {
    if (options.algorithm) config.solver.algorithm = parse_algorithm(*options.algorithm);
    if (options.epsilon) {
        if (!(*options.epsilon > 0.0)) throw std::invalid_argument("--epsilon must be positive");
        config.solver.options.epsilon = *options.epsilon;
    }
    if (options.seed) config.sim.seed = *options.seed;
    if (options.horizon) {
        config.sim.horizon = *options.horizon;
        if (config.sim.horizon <= config.sim.effective_burn_in()) {
            throw std::invalid_argument("--horizon must exceed the burn-in");
        }
    }
    if (options.p_grid) config.sweep.p_values = parse_p_grid(*options.p_grid);
    if (options.out_dir) config.output.dir = *options.out_dir;
}

int run(const std::string& command, const ExperimentConfig& config, const CliOptions& options, std::ostream& out,
        std::ostream& err) {
    try {
        if (command == "solve") return cmd_solve(config, out, err);
        if (command == "benchmark") return cmd_benchmark(config, out, err);
        if (command == "simulate") return cmd_simulate(config, options, out, err);
        if (command == "sweep") return cmd_sweep(config, out, err);
        if (command == "convergence") return cmd_convergence(config, out, err);
        if (command == "inspect") return cmd_inspect(config, options, out);
        if (command == "oracle") return cmd_oracle(config, options, out);
        err << "error: unknown command '" << command << "'\n";
        return kExitUsage;
    } catch (const OracleTooLargeError& e) {
        err << "error: OracleTooLarge: " << e.what() << "\n";
        return kExitOracleTooLarge;
    } catch (const ModelValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const NotUnichainError& e) {
        err << "error: NotUnichain: " << e.what() << "\n";
        return kExitSolverFailure;
    } catch (const BoundsInvertedError& e) {
        err << "error: BoundsInverted: " << e.what() << "\n";
        return kExitSolverFailure;
    } catch (const NonFiniteValueError& e) {
        err << "error: NonFiniteValue: " << e.what() << "\n";
        return kExitSolverFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}

int run_cli(const CliOptions& options, std::ostream& out, std::ostream& err) {
    ExperimentConfig config;
    try {
        config = parse_config(options.config_path);
        apply_overrides(config, options);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return e.kind() == ConfigError::Kind::Parse ? kExitUsage : kExitInvalidConfig;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return run(options.command, config, options, out, err);
}

}  // namespace agemdp
