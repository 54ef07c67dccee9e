#include "riskstop/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace riskstop {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << doc.dump(2) << '\n';
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return nlohmann::json::parse(in);
}

void write_values_csv(const std::string& path, const std::vector<ValueGrid>& values,
                      const std::vector<PolicyGrid>& policy_stack) {
    if (values.size() != policy_stack.size())
        throw std::invalid_argument("write_values_csv: stage counts differ");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "stage,u,t,value,r_star\n";
    for (std::size_t stage = 0; stage < values.size(); ++stage) {
        const ValueGrid& grid = values[stage];
        const PolicyGrid& policy = policy_stack[stage];
        for (std::size_t j = 0; j < grid.t_count(); ++j) {
            for (std::size_t i = 0; i < grid.u_count(); ++i) {
                out << stage << ',' << format_double(grid.u_axis()[i]) << ','
                    << format_double(grid.t_axis()[j]) << ','
                    << format_double(grid.at(i, j)) << ','
                    << format_double(policy.at(i, j)) << '\n';
            }
        }
    }
}

LoadedStages read_values_csv(const std::string& path, std::size_t u_nodes, std::size_t t_nodes,
                             std::size_t stages) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("stage,u,t,value,r_star", 0) != 0)
        throw std::runtime_error(path + ": unexpected values.csv header");

    std::vector<double> u_vals(u_nodes), t_vals(t_nodes);
    std::vector<std::vector<double>> value_rows(stages), policy_rows(stages);
    for (auto& v : value_rows) v.resize(u_nodes * t_nodes);
    for (auto& v : policy_rows) v.resize(u_nodes * t_nodes);

    for (std::size_t stage = 0; stage < stages; ++stage) {
        for (std::size_t j = 0; j < t_nodes; ++j) {
            for (std::size_t i = 0; i < u_nodes; ++i) {
                if (!std::getline(in, line))
                    throw std::runtime_error(path + ": truncated values.csv");
                std::size_t st;
                double u, t, value, r_star;
                if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf,%lf", &st, &u, &t, &value,
                                &r_star) != 5)
                    throw std::runtime_error(path + ": malformed row '" + line + "'");
                if (st != stage) throw std::runtime_error(path + ": stage order mismatch");
                if (stage == 0) {
                    u_vals[i] = u;
                    t_vals[j] = t;
                }
                value_rows[stage][j * u_nodes + i] = value;
                policy_rows[stage][j * u_nodes + i] = r_star;
            }
        }
    }

    Axis u_axis(u_vals);
    Axis t_axis(t_vals);
    LoadedStages loaded;
    for (std::size_t stage = 0; stage < stages; ++stage) {
        ValueGrid grid(u_axis, t_axis);
        PolicyGrid policy(u_axis, t_axis);
        for (std::size_t j = 0; j < t_nodes; ++j) {
            for (std::size_t i = 0; i < u_nodes; ++i) {
                grid.at(i, j) = value_rows[stage][j * u_nodes + i];
                policy.at(i, j) = policy_rows[stage][j * u_nodes + i];
            }
        }
        loaded.values.push_back(std::move(grid));
        loaded.policy_stack.push_back(std::move(policy));
    }
    return loaded;
}

void write_paths_csv(const std::string& path, const std::vector<PathRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "path,sigma,tau,z,ruined\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const PathRecord& rec = records[i];
        out << i << ',' << rec.sigma << ',' << format_double(rec.tau) << ','
            << format_double(rec.z) << ',' << (rec.ruined ? 1 : 0) << '\n';
    }
}

}  // namespace riskstop
