#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace riskstop {

// Scalar constants of the risk-reserve model. beta1 is derived, never set.
struct ModelParams {
    double a = 1.0;       // initial capital, > 0
    double c = 1.0;       // premium income rate, > 0
    double alpha = 0.05;  // investment rate, > 0
    double alpha1 = 0.0;  // claim-payment rate, >= 0
    double beta = 0.0;    // claim inflation rate, >= 0
    double p = 1.0;       // claim-acceptance probability, in [0, 1]
    double t0 = 1.0;      // utility horizon, > 0

    double beta1() const { return beta - alpha1; }

    // Upper bound on capital reachable by time t0 (claims only lower it).
    double reachable_capital_bound() const;
};

struct ParamCheck {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;
    bool ok() const { return violations.empty(); }
};

// Validates invariants; alpha1 > alpha is reported as a warning only
// (capital may then decrease between claims, see the simulator diagnostic).
ParamCheck validate(const ModelParams& params);

// One claim of the renewal process.
struct ClaimEvent {
    std::uint64_t index = 0;   // n >= 1
    double time = 0.0;         // T_n
    double interarrival = 0.0; // zeta_n > 0
    double size = 0.0;         // X_n >= 0
    bool accepted = false;     // eps_n
};

// Capital increment over [t, t+xi] with no claim in between. Exactly 0 at
// xi = 0.
double drift(const ModelParams& params, double t, double xi, double u);

// Independent recomputation of the same increment: recovers the discounted
// claim sum from u, then re-evaluates the closed-form capital at t+xi.
double flow_oracle(const ModelParams& params, double t, double xi, double u);

// Capital jump at a claim epoch t: u_pre - eps * x * e^{beta t}. The result
// may be <= 0; ruin is decided by the caller.
double apply_claim(const ModelParams& params, double u_pre, double t, double x, bool eps);

// mu_n recursion: absorbing at 0, capital exactly 0 counts as ruin.
inline int ruin_indicator_step(int mu_prev, double u_post) {
    return u_post > 0.0 ? mu_prev : 0;
}

}  // namespace riskstop
