#include "riskstop/config.hpp"

#include <cmath>
#include <fstream>

#include "riskstop/errors.hpp"

namespace riskstop {

namespace {

using nlohmann::json;

const json& require_field(const json& node, const std::string& key, const std::string& where) {
    const auto it = node.find(key);
    if (it == node.end()) throw ConfigError("missing field " + where + "." + key);
    return *it;
}

double require_number(const json& node, const std::string& key, const std::string& where) {
    const json& field = require_field(node, key, where);
    if (!field.is_number()) throw ConfigError("field " + where + "." + key + " must be a number");
    return field.get<double>();
}

double optional_number(const json& node, const std::string& key, double fallback) {
    const auto it = node.find(key);
    return it == node.end() ? fallback : it->get<double>();
}

std::size_t optional_size(const json& node, const std::string& key, std::size_t fallback) {
    const auto it = node.find(key);
    return it == node.end() ? fallback : it->get<std::size_t>();
}

}  // namespace

Distribution distribution_from_json(const nlohmann::json& node, const std::string& where) {
    if (!node.is_object()) throw ConfigError("field " + where + " must be an object");
    const json& kind_field = require_field(node, "kind", where);
    const std::string kind = kind_field.get<std::string>();
    try {
        if (kind == "exponential")
            return Distribution::exponential(require_number(node, "rate", where));
        if (kind == "uniform")
            return Distribution::uniform(require_number(node, "lo", where),
                                         require_number(node, "hi", where));
        if (kind == "deterministic")
            return Distribution::deterministic(require_number(node, "point", where));
        if (kind == "gamma")
            return Distribution::gamma(require_number(node, "shape", where),
                                       require_number(node, "scale", where));
    } catch (const std::invalid_argument& err) {
        throw ConfigError(where + ": " + err.what());
    }
    throw ConfigError("field " + where +
                      ".kind must be one of exponential|uniform|deterministic|gamma");
}

nlohmann::json distribution_to_json(const Distribution& dist) {
    switch (dist.kind()) {
        case DistKind::Exponential:
            return {{"kind", "exponential"}, {"rate", dist.param1()}};
        case DistKind::Uniform:
            return {{"kind", "uniform"}, {"lo", dist.param1()}, {"hi", dist.param2()}};
        case DistKind::Deterministic:
            return {{"kind", "deterministic"}, {"point", dist.param1()}};
        case DistKind::Gamma:
            return {{"kind", "gamma"}, {"shape", dist.param1()}, {"scale", dist.param2()}};
    }
    throw std::logic_error("distribution_to_json: unknown kind");
}

Utility utility_from_json(const nlohmann::json& node, const std::string& where) {
    if (!node.is_object()) throw ConfigError("field " + where + " must be an object");
    const std::string kind = require_field(node, "kind", where).get<std::string>();
    try {
        if (kind == "logistic") return Utility::logistic(require_number(node, "scale", where));
        if (kind == "saturating_exp")
            return Utility::saturating_exp(require_number(node, "scale", where));
        if (kind == "rational") return Utility::rational();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(where + ": " + err.what());
    }
    throw ConfigError("field " + where +
                      ".kind must be one of logistic|saturating_exp|rational");
}

nlohmann::json utility_to_json(const Utility& utility) {
    switch (utility.kind()) {
        case UtilityKind::Logistic:
            return {{"kind", "logistic"}, {"scale", utility.scale()}};
        case UtilityKind::SaturatingExp:
            return {{"kind", "saturating_exp"}, {"scale", utility.scale()}};
        case UtilityKind::Rational:
            return {{"kind", "rational"}};
    }
    throw std::logic_error("utility_to_json: unknown kind");
}

RunConfig parse_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
    RunConfig config;

    const json& model = require_field(doc, "model", "config");
    config.model.a = require_number(model, "a", "model");
    config.model.c = require_number(model, "c", "model");
    config.model.alpha = require_number(model, "alpha", "model");
    config.model.alpha1 = optional_number(model, "alpha1", 0.0);
    config.model.beta = optional_number(model, "beta", 0.0);
    config.model.p = require_number(model, "p", "model");
    config.model.t0 = require_number(model, "t0", "model");

    config.interarrival =
        distribution_from_json(require_field(doc, "interarrival", "config"), "interarrival");
    config.claim_size =
        distribution_from_json(require_field(doc, "claim_size", "config"), "claim_size");
    config.utility = utility_from_json(require_field(doc, "utility", "config"), "utility");

    if (const auto it = doc.find("solver"); it != doc.end()) {
        const json& solver = *it;
        config.solver.u_max = optional_number(solver, "u_max", 0.0);
        config.solver.u_cells = optional_size(solver, "u_cells", config.solver.u_cells);
        config.solver.t_cells = optional_size(solver, "t_cells", config.solver.t_cells);
        config.solver.quad_order = optional_size(solver, "quad_order", config.solver.quad_order);
        config.solver.claim_panels =
            optional_size(solver, "claim_panels", config.solver.claim_panels);
        config.solver.s_panel_subdiv =
            optional_size(solver, "s_panel_subdiv", config.solver.s_panel_subdiv);
        config.solver.r_refine_tol =
            optional_number(solver, "r_refine_tol", config.solver.r_refine_tol);
        config.solver.fix_tol = optional_number(solver, "fix_tol", config.solver.fix_tol);
        config.solver.max_iterations =
            optional_size(solver, "max_iterations", config.solver.max_iterations);
        if (const auto mode_it = solver.find("mode"); mode_it != solver.end()) {
            try {
                config.solver.mode = phi_mode_from_string(mode_it->get<std::string>());
            } catch (const std::invalid_argument& err) {
                throw ConfigError(std::string("solver.mode: ") + err.what());
            }
        }
    }

    if (const auto it = doc.find("run"); it != doc.end()) {
        const json& run = *it;
        config.run.claims = optional_size(run, "claims", config.run.claims);
        if (const auto fp = run.find("fixed_point"); fp != run.end())
            config.run.fixed_point = fp->get<bool>();
        config.run.paths = optional_size(run, "paths", config.run.paths);
        if (const auto seed = run.find("seed"); seed != run.end())
            config.run.seed = seed->get<std::uint64_t>();
        if (const auto out = run.find("out"); out != run.end())
            config.run.out = out->get<std::string>();
        if (const auto threads = run.find("threads"); threads != run.end())
            config.run.threads = threads->get<unsigned>();
    }
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& err) {
        throw ConfigError("config parse error in " + path + ": " + err.what());
    }
    return parse_config(doc);
}

ConfigCheck validate_config(const RunConfig& config) {
    ConfigCheck check;
    const ParamCheck model_check = validate(config.model);
    check.violations = model_check.violations;
    check.warnings = model_check.warnings;

    for (const std::string& msg : validate_solver(config.model, config.solver))
        check.violations.push_back(msg);

    if (config.run.fixed_point) {
        const double q = config.interarrival.cdf(config.model.t0);
        if (q >= 1.0 - 1e-12)
            check.violations.push_back(
                "fixed-point mode requires P(interarrival > t0) > 0, but F(t0) = " +
                std::to_string(q) + " (NonContractive)");
    }
    if (config.run.paths < 2) check.violations.push_back("run.paths must be >= 2");

    if (config.claim_size.kind() == DistKind::Gamma && config.claim_size.param1() < 1.0)
        check.warnings.push_back(
            "claim_size gamma shape < 1 has an unbounded density at 0; claim-size "
            "quadrature accuracy degrades");
    if (config.interarrival.kind() == DistKind::Gamma && config.interarrival.param1() < 1.0)
        check.warnings.push_back(
            "interarrival gamma shape < 1 has an unbounded density at 0; interarrival "
            "quadrature accuracy degrades");
    return check;
}

std::string config_hash(const RunConfig& config) {
    json canon;
    canon["model"] = {{"a", config.model.a},     {"c", config.model.c},
                      {"alpha", config.model.alpha}, {"alpha1", config.model.alpha1},
                      {"beta", config.model.beta},   {"p", config.model.p},
                      {"t0", config.model.t0}};
    canon["interarrival"] = distribution_to_json(config.interarrival);
    canon["claim_size"] = distribution_to_json(config.claim_size);
    canon["utility"] = utility_to_json(config.utility);
    canon["solver"] = {
        {"u_max", config.solver.u_max > 0.0 ? config.solver.u_max
                                            : default_u_max(config.model)},
        {"u_cells", config.solver.u_cells},
        {"t_cells", config.solver.t_cells},
        {"quad_order", config.solver.quad_order},
        {"claim_panels", config.solver.claim_panels},
        {"s_panel_subdiv", config.solver.s_panel_subdiv},
        {"r_refine_tol", config.solver.r_refine_tol},
        {"fix_tol", config.solver.fix_tol},
        {"max_iterations", config.solver.max_iterations},
        {"mode", to_string(config.solver.mode)}};
    canon["horizon"] = {{"claims", config.run.claims},
                        {"fixed_point", config.run.fixed_point}};
    const std::string dump = canon.dump();  // keys sorted, no whitespace

    std::uint64_t hash = 1469598103934665603ULL;
    for (const unsigned char byte : dump) {
        hash ^= byte;
        hash *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buf);
}

}  // namespace riskstop
