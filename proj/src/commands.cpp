#include "riskstop/commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include "riskstop/artifacts.hpp"
#include "riskstop/config.hpp"
#include "riskstop/diagnostics.hpp"
#include "riskstop/dp_solver.hpp"
#include "riskstop/errors.hpp"
#include "riskstop/simulator.hpp"

namespace riskstop {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

RunConfig load_with_overrides(const CliOptions& options) {
    RunConfig config = load_config(options.config_path);
    if (options.seed) config.run.seed = *options.seed;
    if (options.paths) config.run.paths = *options.paths;
    if (options.threads) config.run.threads = *options.threads;
    if (options.fixed_point) config.run.fixed_point = *options.fixed_point;
    if (options.mode) config.solver.mode = phi_mode_from_string(*options.mode);
    if (!options.out_dir.empty()) config.run.out = options.out_dir;
    config.solver.threads = config.run.threads;
    return config;
}

// Returns false (validation failure) after printing the report.
bool check_and_report(const RunConfig& config) {
    const ConfigCheck check = validate_config(config);
    for (const std::string& warning : check.warnings)
        std::cout << "warning: " << warning << '\n';
    if (!check.ok()) {
        for (const std::string& violation : check.violations)
            std::cout << "violation: " << violation << '\n';
        return false;
    }
    return true;
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc;
    gmtime_r(&tt, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return std::string(buf);
}

struct SolveOutput {
    std::vector<ValueGrid> values;
    std::vector<PolicyGrid> policy_stack;  // stage-indexed, values.size() entries
    double headline = 0.0;
    bool fixed_point = false;
    std::size_t claims = 0;
    double residual = 0.0;
    std::size_t iterations = 0;
};

SolveOutput run_solver(const RunConfig& config) {
    const DpProblem problem{config.model, config.interarrival, config.claim_size,
                            config.utility};
    SolveOutput output;
    output.fixed_point = config.run.fixed_point;
    if (config.run.fixed_point) {
        FixedPointResult fp = fixed_point(problem, config.solver);
        output.headline = fp.value.eval(config.model.a, 0.0);
        output.residual = fp.residual;
        output.iterations = fp.iterations;
        output.values.push_back(std::move(fp.value));
        output.policy_stack.push_back(std::move(fp.policy));
    } else {
        output.claims = config.run.claims;
        BackwardInductionResult bi =
            backward_induction(config.run.claims, problem, config.solver);
        output.headline = bi.values.back().eval(config.model.a, 0.0);
        output.policy_stack = make_policy_stack(bi.policies, bi.values[0].u_axis(),
                                                bi.values[0].t_axis());
        output.values = std::move(bi.values);
    }
    return output;
}

json metadata_json(const RunConfig& config, const SolveOutput& output) {
    json meta;
    meta["artifact"] = "riskstop-solve";
    meta["config_hash"] = config_hash(config);
    meta["mode"] = to_string(config.solver.mode);
    meta["fixed_point"] = output.fixed_point;
    meta["claims"] = output.claims;
    meta["stages"] = output.values.size();
    meta["headline"] = output.headline;
    if (output.fixed_point) {
        meta["residual"] = output.residual;
        meta["iterations"] = output.iterations;
    }
    meta["grid"] = {{"u_nodes", output.values[0].u_count()},
                    {"t_nodes", output.values[0].t_count()},
                    {"u_max", output.values[0].u_top()}};
    meta["generated_at"] = timestamp_utc();
    meta["tool"] = "riskstop";
    return meta;
}

int guard(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace

int cmd_validate(const CliOptions& options) {
    return guard([&]() {
        RunConfig config;
        try {
            config = load_with_overrides(options);
        } catch (const ConfigError& err) {
            std::cout << "violation: " << err.what() << '\n';
            return kExitValidation;
        }
        if (!check_and_report(config)) return kExitValidation;
        std::cout << "OK (config hash " << config_hash(config) << ")\n";
        return kExitOk;
    });
}

int cmd_solve(const CliOptions& options) {
    return guard([&]() {
        const RunConfig config = load_with_overrides(options);
        if (!check_and_report(config)) return kExitValidation;

        const SolveOutput output = run_solver(config);
        fs::create_directories(config.run.out);
        write_values_csv((fs::path(config.run.out) / "values.csv").string(), output.values,
                         output.policy_stack);
        write_json_file((fs::path(config.run.out) / "metadata.json").string(),
                        metadata_json(config, output));
        if (output.fixed_point)
            std::cout << "gamma(a,0) = " << format_double(output.headline) << "  (residual "
                      << format_double(output.residual) << ", " << output.iterations
                      << " iterations)\n";
        else
            std::cout << "gamma_" << output.claims
                      << "(a,0) = " << format_double(output.headline) << '\n';
        return kExitOk;
    });
}

int cmd_simulate(const CliOptions& options) {
    return guard([&]() {
        const RunConfig config = load_with_overrides(options);
        if (!check_and_report(config)) return kExitValidation;

        SimulationOptions sim;
        sim.n_paths = config.run.paths;
        sim.base_seed = config.run.seed;
        sim.threads = config.run.threads;
        sim.keep_paths = options.write_paths_csv;

        SimulationSummary summary;
        bool zero_policy = options.zero_policy;
        if (zero_policy) {
            const Axis u_axis = make_u_axis(config.model, config.solver);
            const Axis t_axis = make_t_axis(config.model, config.solver);
            std::vector<PolicyGrid> stack;
            for (std::size_t j = 0; j <= config.run.claims; ++j)
                stack.emplace_back(u_axis, t_axis, 0.0);
            summary = simulate_policy(config.model, config.interarrival, config.claim_size,
                                      config.utility, stack, config.run.claims, sim);
        } else {
            const std::string policy_dir =
                options.policy_dir.empty() ? config.run.out : options.policy_dir;
            const json meta = read_json_file((fs::path(policy_dir) / "metadata.json").string());
            const std::string expected = config_hash(config);
            const std::string actual = meta.at("config_hash").get<std::string>();
            if (actual != expected)
                throw HashMismatchError("policy artifacts in " + policy_dir +
                                        " were produced under config hash " + actual +
                                        ", current config hashes to " + expected);
            const LoadedStages stages = read_values_csv(
                (fs::path(policy_dir) / "values.csv").string(),
                meta.at("grid").at("u_nodes").get<std::size_t>(),
                meta.at("grid").at("t_nodes").get<std::size_t>(),
                meta.at("stages").get<std::size_t>());
            if (meta.at("fixed_point").get<bool>())
                summary = simulate_policy_stationary(config.model, config.interarrival,
                                                     config.claim_size, config.utility,
                                                     stages.policy_stack[0], sim);
            else
                summary = simulate_policy(config.model, config.interarrival, config.claim_size,
                                          config.utility, stages.policy_stack,
                                          config.run.claims, sim);
        }

        fs::create_directories(config.run.out);
        json doc;
        doc["artifact"] = "riskstop-estimate";
        doc["config_hash"] = config_hash(config);
        doc["zero_policy"] = zero_policy;
        doc["fixed_point"] = config.run.fixed_point;
        doc["claims"] = config.run.claims;
        doc["mean"] = summary.estimate.mean;
        doc["standard_error"] = summary.estimate.standard_error;
        doc["n_paths"] = summary.estimate.n_paths;
        doc["confidence_level"] = summary.estimate.confidence_level;
        doc["seed"] = config.run.seed;
        doc["ruined_paths"] = summary.ruined_paths;
        doc["interclaim_dip_paths"] = summary.interclaim_dip_paths;
        write_json_file((fs::path(config.run.out) / "estimate.json").string(), doc);
        if (options.write_paths_csv)
            write_paths_csv((fs::path(config.run.out) / "paths.csv").string(), summary.paths);

        std::cout << "mean = " << format_double(summary.estimate.mean) << "  SE = "
                  << format_double(summary.estimate.standard_error) << "  ("
                  << summary.estimate.n_paths << " paths, " << summary.ruined_paths
                  << " ruined)\n";
        return kExitOk;
    });
}

int cmd_compare(const CliOptions& options) {
    return guard([&]() {
        const RunConfig config = load_with_overrides(options);
        if (!check_and_report(config)) return kExitValidation;

        const SolveOutput output = run_solver(config);

        // Grid tolerance by the halving test on the headline value.
        RunConfig half = config;
        half.solver.u_cells = std::max<std::size_t>(8, config.solver.u_cells / 2);
        half.solver.t_cells = std::max<std::size_t>(2, config.solver.t_cells / 2);
        const SolveOutput half_output = run_solver(half);
        const double grid_tol = std::abs(output.headline - half_output.headline);

        SimulationOptions sim;
        sim.n_paths = config.run.paths;
        sim.base_seed = config.run.seed;
        sim.threads = config.run.threads;
        SimulationSummary summary;
        if (config.run.fixed_point)
            summary = simulate_policy_stationary(config.model, config.interarrival,
                                                 config.claim_size, config.utility,
                                                 output.policy_stack[0], sim);
        else
            summary = simulate_policy(config.model, config.interarrival, config.claim_size,
                                      config.utility, output.policy_stack, config.run.claims,
                                      sim);

        const double diff = std::abs(output.headline - summary.estimate.mean);
        const double bound = 3.0 * summary.estimate.standard_error + grid_tol;
        const bool within = diff <= bound;

        fs::create_directories(config.run.out);
        json doc;
        doc["artifact"] = "riskstop-compare";
        doc["config_hash"] = config_hash(config);
        doc["dp_value"] = output.headline;
        doc["mc_mean"] = summary.estimate.mean;
        doc["mc_se"] = summary.estimate.standard_error;
        doc["abs_diff"] = diff;
        doc["grid_tolerance"] = grid_tol;
        doc["bound"] = bound;
        doc["within_tolerance"] = within;
        doc["n_paths"] = summary.estimate.n_paths;
        doc["seed"] = config.run.seed;
        write_json_file((fs::path(config.run.out) / "report.json").string(), doc);

        std::cout << "dp = " << format_double(output.headline)
                  << "  mc = " << format_double(summary.estimate.mean)
                  << "  |diff| = " << format_double(diff)
                  << "  bound(3SE+grid) = " << format_double(bound)
                  << (within ? "  PASS" : "  FAIL") << '\n';
        return within ? kExitOk : kExitOutOfTolerance;
    });
}

int cmd_sweep(const CliOptions& options) {
    return guard([&]() {
        if (options.sweep_path.empty())
            throw ConfigError("sweep requires --sweep <spec.json>");
        const json base_doc = read_json_file(options.config_path);
        const json spec = read_json_file(options.sweep_path);
        if (!spec.contains("axes") || !spec.at("axes").is_array() || spec.at("axes").empty())
            throw ConfigError("sweep spec needs a non-empty 'axes' array");
        const bool mc_check = spec.value("mc_check", false);

        struct AxisSpec {
            std::string path;
            std::vector<json> values;
        };
        std::vector<AxisSpec> axes;
        for (const json& axis : spec.at("axes")) {
            AxisSpec parsed;
            parsed.path = axis.at("path").get<std::string>();
            for (const json& v : axis.at("values")) parsed.values.push_back(v);
            if (parsed.values.empty())
                throw ConfigError("sweep axis " + parsed.path + " has no values");
            axes.push_back(std::move(parsed));
        }

        std::size_t total = 1;
        for (const AxisSpec& axis : axes) total *= axis.values.size();

        RunConfig base = load_with_overrides(options);
        fs::create_directories(base.run.out);
        std::ofstream out((fs::path(base.run.out) / "sweep.csv").string());
        if (!out) throw std::runtime_error("cannot write sweep.csv");
        for (const AxisSpec& axis : axes) out << axis.path << ',';
        out << "value,mc_mean,mc_se,status\n";

        for (std::size_t cell = 0; cell < total; ++cell) {
            json doc = base_doc;
            std::size_t rest = cell;
            std::vector<json> coords;
            for (const AxisSpec& axis : axes) {
                const json& v = axis.values[rest % axis.values.size()];
                rest /= axis.values.size();
                std::string pointer = "/" + axis.path;
                for (auto& ch : pointer)
                    if (ch == '.') ch = '/';
                doc[json::json_pointer(pointer)] = v;
                coords.push_back(v);
            }
            for (const json& v : coords) out << v.dump() << ',';
            try {
                RunConfig config = parse_config(doc);
                if (options.seed) config.run.seed = *options.seed;
                if (options.paths) config.run.paths = *options.paths;
                if (options.threads) config.run.threads = *options.threads;
                if (options.mode) config.solver.mode = phi_mode_from_string(*options.mode);
                config.solver.threads = config.run.threads;
                const ConfigCheck check = validate_config(config);
                if (!check.ok()) throw ConfigError(check.violations.front());
                const SolveOutput solved = run_solver(config);
                out << format_double(solved.headline) << ',';
                if (mc_check) {
                    SimulationOptions sim;
                    sim.n_paths = config.run.paths;
                    sim.base_seed = config.run.seed;
                    sim.threads = config.run.threads;
                    const SimulationSummary summary =
                        config.run.fixed_point
                            ? simulate_policy_stationary(config.model, config.interarrival,
                                                         config.claim_size, config.utility,
                                                         solved.policy_stack[0], sim)
                            : simulate_policy(config.model, config.interarrival,
                                              config.claim_size, config.utility,
                                              solved.policy_stack, config.run.claims, sim);
                    out << format_double(summary.estimate.mean) << ','
                        << format_double(summary.estimate.standard_error) << ',';
                } else {
                    out << ",,";
                }
                out << "ok\n";
            } catch (const std::exception& err) {
                // record the failure and keep sweeping
                out << ",,,error: " << err.what() << '\n';
            }
        }
        std::cout << "sweep complete: " << total << " cells\n";
        return kExitOk;
    });
}

int cmd_dynkin(const CliOptions& options) {
    return guard([&]() {
        const RunConfig config = load_with_overrides(options);
        if (!check_and_report(config)) return kExitValidation;

        const double horizon = options.dynkin_horizon > 0.0
                                   ? options.dynkin_horizon
                                   : 0.05 * config.interarrival.mean();
        const ExtendedState state0{0.0, config.model.a, 0.0, 1};

        std::vector<GeneratorConvention> conventions;
        if (options.convention == "both")
            conventions = {GeneratorConvention::Consistent, GeneratorConvention::AsPrinted};
        else
            conventions = {generator_convention_from_string(options.convention)};

        json doc;
        doc["artifact"] = "riskstop-dynkin";
        doc["config_hash"] = config_hash(config);
        doc["h"] = horizon;
        doc["n_paths"] = config.run.paths;
        doc["seed"] = config.run.seed;
        doc["reports"] = json::array();
        for (const GeneratorConvention convention : conventions) {
            const DynkinReport report = dynkin_check(
                state0, horizon, config.run.paths, config.run.seed, config.model,
                config.interarrival, config.claim_size, config.utility, convention, {},
                config.run.threads);
            json entry;
            entry["convention"] = to_string(convention);
            entry["lhs"] = report.lhs;
            entry["rhs"] = report.rhs;
            entry["gap"] = report.gap;
            entry["se_lhs"] = report.se_lhs;
            entry["se_rhs"] = report.se_rhs;
            entry["se_gap"] = report.se_gap;
            doc["reports"].push_back(entry);
            std::cout << to_string(convention) << ": lhs = " << format_double(report.lhs)
                      << "  rhs = " << format_double(report.rhs)
                      << "  gap = " << format_double(report.gap)
                      << "  3*SE = " << format_double(3.0 * report.se_gap) << '\n';
        }
        fs::create_directories(config.run.out);
        write_json_file((fs::path(config.run.out) / "dynkin.json").string(), doc);
        return kExitOk;
    });
}

}  // namespace riskstop
