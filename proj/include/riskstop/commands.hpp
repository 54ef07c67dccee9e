#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace riskstop {

// Exit codes shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitOutOfTolerance = 3;

// Command-line overrides layered on top of the config document.
struct CliOptions {
    std::string config_path;
    std::string out_dir;     // empty -> run.out from the config
    std::string policy_dir;  // simulate: where solve artifacts live
    std::string sweep_path;  // sweep specification document
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<unsigned> threads;
    std::optional<std::string> mode;
    std::optional<bool> fixed_point;
    bool zero_policy = false;      // simulate: stop immediately on every path
    bool write_paths_csv = false;  // simulate: emit per-path records
    double dynkin_horizon = 0.0;   // 0 -> 0.05 * E[interarrival]
    std::string convention = "both";
};

int cmd_validate(const CliOptions& options);
int cmd_solve(const CliOptions& options);
int cmd_simulate(const CliOptions& options);
int cmd_compare(const CliOptions& options);
int cmd_sweep(const CliOptions& options);
int cmd_dynkin(const CliOptions& options);

}  // namespace riskstop
