#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "riskstop/distribution.hpp"
#include "riskstop/model.hpp"
#include "riskstop/utility.hpp"
#include "riskstop/value_grid.hpp"

namespace riskstop {

// Treatment of the refused-claim term of the one-step integrand.
// Consistent drops the claim-size cdf factor so that a refused claim leaves
// the state untouched, matching the ruin recursion and the simulator.
// AsPrinted keeps the factor (a refused claim then "survives" only with the
// probability that the claim would not have ruined the company had it been
// accepted). Consistent is the default; AsPrinted is kept for comparison
// studies.
enum class PhiMode { Consistent, AsPrinted };

PhiMode phi_mode_from_string(const std::string& name);
std::string to_string(PhiMode mode);

// Model inputs of the stopping problem.
struct DpProblem {
    ModelParams params;
    Distribution interarrival;  // law of the zeta_i
    Distribution claim_size;    // law of the X_i
    Utility utility;
};

struct SolverConfig {
    // Top of the capital grid; 0 means the derived default
    // (a + c/alpha) * exp(max(alpha, alpha1) * t0). Must cover all capital
    // reachable without ruin by time t0.
    double u_max = 0.0;
    std::size_t u_cells = 200;  // M
    std::size_t t_cells = 200;  // L

    std::size_t quad_order = 4;      // Gauss-Legendre points per panel
    std::size_t claim_panels = 2;    // panels for the generic claim-size quadrature
    std::size_t s_panel_subdiv = 1;  // extra interarrival panel refinement (oracle runs)

    double r_refine_tol = 1e-8;  // golden-section bracket width for the r search
    PhiMode mode = PhiMode::Consistent;

    double fix_tol = 1e-6;           // fixed-point sup-norm tolerance
    std::size_t max_iterations = 0;  // 0 -> geometric bound + margin

    unsigned threads = 0;  // 0 -> hardware concurrency
};

double default_u_max(const ModelParams& params);

std::vector<std::string> validate_solver(const ModelParams& params, const SolverConfig& config);

// Capital axis: dense up to the reachable-capital bound (with the initial
// capital placed on a node), coarse up to u_max. Time axis: uniform.
Axis make_u_axis(const ModelParams& params, const SolverConfig& config);
Axis make_t_axis(const ModelParams& params, const SolverConfig& config);

// gamma_0(u, t) = g1(u) on the whole grid (t <= t0 by construction).
ValueGrid make_gamma0(const DpProblem& problem, const SolverConfig& config);

// One-step integrand phi_delta(r, u, t): value of waiting r from state
// (u, t) when the continuation value after the next claim is delta.
double phi_delta(double r, double u, double t, const ValueGrid& delta,
                 const ModelParams& params, const Distribution& interarrival,
                 const Distribution& claim_size, const Utility& utility, PhiMode mode,
                 const SolverConfig& config);

struct PhiResult {
    ValueGrid value;    // (Phi delta) on the nodes
    PolicyGrid policy;  // maximizing waiting time per node
};

// (Phi delta)(u_i, t_j) = max over r in [0, t0 - t_j] of phi_delta, by a
// coarse scan at t0/(4 t_cells) spacing plus golden-section refinement.
// Ties break toward the smallest r.
PhiResult apply_phi(const ValueGrid& delta, const DpProblem& problem,
                    const SolverConfig& config);

struct BackwardInductionResult {
    std::vector<ValueGrid> values;     // gamma_0 .. gamma_K
    std::vector<PolicyGrid> policies;  // argmax grids for gamma_1 .. gamma_K
};

BackwardInductionResult backward_induction(std::size_t claims, const DpProblem& problem,
                                           const SolverConfig& config);

struct FixedPointResult {
    ValueGrid value;
    PolicyGrid policy;
    std::size_t iterations;  // Phi applications performed
    double residual;         // last successive sup-norm difference
    std::vector<double> residual_history;
};

// Iterates Phi to its fixed point. Requires F(t0) < 1 (throws
// NonContractiveError otherwise); throws MaxIterationsError when the
// iteration budget is exhausted.
FixedPointResult fixed_point(const DpProblem& problem, const SolverConfig& config);

}  // namespace riskstop
