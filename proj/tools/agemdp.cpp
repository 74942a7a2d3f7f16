#include <iostream>

#include <CLI11.hpp>

#include "agemdp/commands.hpp"

int main(int argc, char** argv) {
    agemdp::CliOptions opts;
    CLI::App app{"agemdp: age-aware remote MDP solver and simulator"};
    app.require_subcommand(1, 1);

    std::string config_flag;
    std::string algorithm;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t horizon = 0;
    std::string p_grid;
    std::string out_dir;

    const char* commands[][2] = {
        {"solve", "compute h* and the optimal stage policy"},
        {"benchmark", "compare optimal, zero-wait and AoI-optimal sampling"},
        {"simulate", "Monte Carlo run of the optimal policy"},
        {"sweep", "solve and simulate the three policies over a p grid"},
        {"convergence", "Bisec-MRVI vs FPBI convergence traces"},
        {"inspect", "print the augmented state space and chain structure"},
        {"oracle", "brute-force check on small instances"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("CONFIG", opts.config_path, "experiment config (YAML)");
        sub->add_option("--config", config_flag, "experiment config (YAML)");
        sub->add_option("--algorithm", algorithm, "bisec-mrvi or fpbi");
        sub->add_option("--epsilon", epsilon, "solver stopping threshold");
        sub->add_option("--seed", seed, "simulation seed");
        sub->add_option("--horizon", horizon, "simulated slots");
        sub->add_option("--p", p_grid, "sweep grid LO:HI:STEP");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_flag("--trajectory", opts.trajectory, "write trajectory.csv");
        sub->add_flag("--dump-tables", opts.dump_tables, "write kernel and q tables");
        sub->add_option("--budget", opts.oracle_budget, "oracle policy-count limit");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : agemdp::kExitUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    opts.command = sub->get_name();
    if (!config_flag.empty()) opts.config_path = config_flag;
    if (opts.config_path.empty()) {
        std::cerr << "error: a config file is required\n";
        return agemdp::kExitUsage;
    }
    if (sub->count("--algorithm")) opts.algorithm = algorithm;
    if (sub->count("--epsilon")) opts.epsilon = epsilon;
    if (sub->count("--seed")) opts.seed = seed;
    if (sub->count("--horizon")) opts.horizon = horizon;
    if (sub->count("--p")) opts.p_grid = p_grid;
    if (sub->count("--out")) opts.out_dir = out_dir;

    return agemdp::run_cli(opts, std::cout, std::cerr);
}
