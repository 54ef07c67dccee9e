#include "riskstop/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace riskstop {

double ModelParams::reachable_capital_bound() const {
    // U_t <= a e^{alpha t} + (c/alpha)(e^{alpha t} - 1) for all t <= t0.
    return a * std::exp(alpha * t0) + (c / alpha) * std::expm1(alpha * t0);
}

ParamCheck validate(const ModelParams& params) {
    ParamCheck check;
    auto require = [&](bool cond, const std::string& msg) {
        if (!cond) check.violations.push_back(msg);
    };
    require(std::isfinite(params.a) && params.a > 0.0, "model.a must be > 0");
    require(std::isfinite(params.c) && params.c > 0.0, "model.c must be > 0");
    require(std::isfinite(params.alpha) && params.alpha > 0.0, "model.alpha must be > 0");
    require(std::isfinite(params.alpha1) && params.alpha1 >= 0.0, "model.alpha1 must be >= 0");
    require(std::isfinite(params.beta) && params.beta >= 0.0, "model.beta must be >= 0");
    require(std::isfinite(params.p) && params.p >= 0.0 && params.p <= 1.0,
            "model.p must lie in [0, 1]");
    require(std::isfinite(params.t0) && params.t0 > 0.0, "model.t0 must be > 0");
    if (check.ok() && params.alpha1 > params.alpha)
        check.warnings.push_back(
            "model.alpha1 > model.alpha: capital can decrease between claims; "
            "ruin is still checked at claim epochs only");
    return check;
}

namespace {

void check_drift_args(double t, double xi, double u) {
    if (!(xi >= 0.0) || !std::isfinite(xi)) throw std::invalid_argument("drift: xi must be >= 0");
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("drift: t must be >= 0");
    if (!std::isfinite(u)) throw std::invalid_argument("drift: u must be finite");
}

}  // namespace

double drift(const ModelParams& params, double t, double xi, double u) {
    check_drift_args(t, xi, u);
    // expm1 keeps the alpha -> 0 regression configs accurate.
    const double growth = std::expm1(params.alpha * xi);
    const double growth1 = std::expm1(params.alpha1 * xi);
    const double savings = params.a + params.c / params.alpha;
    return std::exp(params.alpha * t) * savings * (growth - growth1) +
           (params.c / params.alpha) * growth1 + growth1 * u;
}

double flow_oracle(const ModelParams& params, double t, double xi, double u) {
    check_drift_args(t, xi, u);
    const double c_over_a = params.c / params.alpha;
    // Discounted claim sum recovered from the current capital.
    const double claim_sum =
        (params.a * std::exp(params.alpha * t) + c_over_a * std::expm1(params.alpha * t) - u) *
        std::exp(-params.alpha1 * t);
    const double t2 = t + xi;
    const double u2 = params.a * std::exp(params.alpha * t2) +
                      c_over_a * std::expm1(params.alpha * t2) -
                      std::exp(params.alpha1 * t2) * claim_sum;
    return u2 - u;
}

double apply_claim(const ModelParams& params, double u_pre, double t, double x, bool eps) {
    if (!std::isfinite(u_pre)) throw std::invalid_argument("apply_claim: u_pre must be finite");
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("apply_claim: x must be >= 0");
    if (!(t >= 0.0)) throw std::invalid_argument("apply_claim: t must be >= 0");
    if (!eps) return u_pre;
    return u_pre - x * std::exp(params.beta * t);
}

}  // namespace riskstop
