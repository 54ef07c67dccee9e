#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "riskstop/simulator.hpp"
#include "riskstop/value_grid.hpp"

namespace riskstop {

// 17 significant digits: round-trips exactly and keeps regression diffs exact.
std::string format_double(double x);

void write_json_file(const std::string& path, const nlohmann::json& doc);
nlohmann::json read_json_file(const std::string& path);

// values.csv: columns stage,u,t,value,r_star; rows ordered by
// (stage, t-node, u-node). Stage j pairs the j-step value function with the
// waiting-time policy used when j claims of horizon remain (stage 0 stops
// immediately, its r_star column is 0).
void write_values_csv(const std::string& path, const std::vector<ValueGrid>& values,
                      const std::vector<PolicyGrid>& policy_stack);

struct LoadedStages {
    std::vector<ValueGrid> values;
    std::vector<PolicyGrid> policy_stack;
};

LoadedStages read_values_csv(const std::string& path, std::size_t u_nodes, std::size_t t_nodes,
                             std::size_t stages);

// paths.csv: per-path records (path,sigma,tau,z,ruined).
void write_paths_csv(const std::string& path, const std::vector<PathRecord>& records);

}  // namespace riskstop
