// riskstop: optimal stopping values and policies for an invested risk
// reserve with inflating, immediately paid, randomly refused claims, plus
// Monte Carlo validation of the computed policies.

#include <CLI11.hpp>

#include "riskstop/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"optimal stopping of an invested risk-reserve process"};
    app.require_subcommand(1);

    riskstop::CliOptions options;
    std::uint64_t seed = 0;
    std::size_t paths = 0;
    unsigned threads = 0;
    std::string mode;
    bool fixed_point = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", options.config_path, "config document (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", options.out_dir, "output directory (overrides run.out)");
        cmd->add_option("--seed", seed, "base seed (overrides run.seed)");
        cmd->add_option("--paths", paths, "Monte Carlo paths (overrides run.paths)");
        cmd->add_option("--threads", threads, "worker threads, 0 = hardware");
        cmd->add_option("--mode", mode, "refused-claim term: consistent | as_printed");
        cmd->add_flag("--fixed-point", fixed_point,
                      "solve/simulate the infinite-claim fixed point");
    };

    CLI::App* validate = app.add_subcommand("validate", "check a config document");
    add_common(validate);

    CLI::App* solve = app.add_subcommand("solve", "compute value and policy grids");
    add_common(solve);

    CLI::App* simulate =
        app.add_subcommand("simulate", "Monte Carlo estimate under solved policies");
    add_common(simulate);
    simulate->add_option("--policy-dir", options.policy_dir,
                         "directory with solve artifacts (default: run.out)");
    simulate->add_flag("--zero-policy", options.zero_policy,
                       "stop immediately on every path instead of loading policies");
    simulate->add_flag("--paths-csv", options.write_paths_csv, "emit per-path records");

    CLI::App* compare = app.add_subcommand("compare", "solve, simulate, and cross-check");
    add_common(compare);

    CLI::App* sweep = app.add_subcommand("sweep", "solve over a parameter grid");
    add_common(sweep);
    sweep->add_option("--sweep", options.sweep_path, "sweep specification (JSON)")
        ->required()
        ->check(CLI::ExistingFile);

    CLI::App* dynkin = app.add_subcommand("dynkin", "generator check via Dynkin's formula");
    add_common(dynkin);
    dynkin->add_option("--h", options.dynkin_horizon,
                       "check horizon (default 0.05 * E[interarrival])");
    dynkin->add_option("--convention", options.convention,
                       "consistent | as_printed | both (default both)");

    CLI11_PARSE(app, argc, argv);

    for (CLI::App* cmd : {validate, solve, simulate, compare, sweep, dynkin}) {
        if (!cmd->parsed()) continue;
        if (cmd->count("--seed") > 0) options.seed = seed;
        if (cmd->count("--paths") > 0) options.paths = paths;
        if (cmd->count("--threads") > 0) options.threads = threads;
        if (cmd->count("--mode") > 0) options.mode = mode;
        if (cmd->count("--fixed-point") > 0) options.fixed_point = fixed_point;
    }

    if (validate->parsed()) return riskstop::cmd_validate(options);
    if (solve->parsed()) return riskstop::cmd_solve(options);
    if (simulate->parsed()) return riskstop::cmd_simulate(options);
    if (compare->parsed()) return riskstop::cmd_compare(options);
    if (sweep->parsed()) return riskstop::cmd_sweep(options);
    if (dynkin->parsed()) return riskstop::cmd_dynkin(options);
    return riskstop::kExitRuntime;
}
