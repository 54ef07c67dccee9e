#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskstop/distribution.hpp"
#include "riskstop/dp_solver.hpp"
#include "riskstop/model.hpp"
#include "riskstop/utility.hpp"

namespace riskstop {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct RunSettings {
    std::size_t claims = 1;  // K, ignored when fixed_point is set
    bool fixed_point = false;
    std::size_t paths = 100000;
    std::uint64_t seed = 42;
    std::string out = "out";
    unsigned threads = 0;
};

// Full run description as loaded from the config document.
struct RunConfig {
    ModelParams model;
    Distribution interarrival = Distribution::exponential(1.0);
    Distribution claim_size = Distribution::exponential(1.0);
    Utility utility = Utility::saturating_exp(1.0);
    SolverConfig solver;
    RunSettings run;
};

// Parsing throws ConfigError with field context; file loading adds the
// parser's line/column on malformed documents.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const nlohmann::json& doc);

nlohmann::json distribution_to_json(const Distribution& dist);
Distribution distribution_from_json(const nlohmann::json& node, const std::string& where);
nlohmann::json utility_to_json(const Utility& utility);
Utility utility_from_json(const nlohmann::json& node, const std::string& where);

struct ConfigCheck {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;
    bool ok() const { return violations.empty(); }
};

ConfigCheck validate_config(const RunConfig& config);

// Stable 64-bit FNV-1a digest of the canonicalized semantic content (model,
// laws, utility, solver settings minus thread count, and the horizon); hex
// encoded. Key order in the source document does not matter.
std::string config_hash(const RunConfig& config);

}  // namespace riskstop
