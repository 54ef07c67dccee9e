#pragma once

#include <cstdint>
#include <vector>

#include "riskstop/distribution.hpp"
#include "riskstop/model.hpp"
#include "riskstop/rng.hpp"
#include "riskstop/utility.hpp"
#include "riskstop/value_grid.hpp"

namespace riskstop {

struct SeedRecord {
    std::uint64_t base_seed = 0;
    std::uint64_t path_index = 0;
};

// One sampled path of the renewal risk process, recorded at claim epochs.
// Sampling stops at max_claims or at the first ruin. Per claim the stream
// is consumed in the fixed order: interarrival, size, acceptance mark.
struct Trajectory {
    double initial_capital = 0.0;
    std::vector<ClaimEvent> events;
    std::vector<double> capital_at_claims;  // U_{T_n} just after claim n, aligned with events
    std::vector<int> mu;                    // ruin indicators, aligned with events
    SeedRecord seed;
    bool interclaim_dip = false;  // capital hit 0 strictly between claim epochs

    // State accessors with the implicit n = 0 entry (T_0 = 0, U_{T_0} = a, mu_0 = 1).
    double time_of(std::size_t n) const { return n == 0 ? 0.0 : events[n - 1].time; }
    double capital_after(std::size_t n) const {
        return n == 0 ? initial_capital : capital_at_claims[n - 1];
    }
    int mu_at(std::size_t n) const { return n == 0 ? 1 : mu[n - 1]; }
};

Trajectory sample_trajectory(const ModelParams& params, const Distribution& interarrival,
                             const Distribution& claim_size, SeedRecord seed,
                             std::size_t max_claims);

Trajectory sample_trajectory(const ModelParams& params, const Distribution& interarrival,
                             const Distribution& claim_size, PathRng& rng,
                             std::size_t max_claims);

struct StoppingOutcome {
    std::size_t sigma = 0;      // claim index at which the rule stopped
    double tau = 0.0;           // stopping time
    double z = 0.0;             // realized return Z(tau)
    bool ruined_before = false; // ruin forced Z = 0
};

// Builds the stage-indexed policy stack for a K-claim run: entry j is the
// policy used when j claims of horizon remain. Entry 0 (the forced stop at
// the K-th claim) is the zero policy; entry j >= 1 is the argmax grid
// produced together with the j-step value function.
std::vector<PolicyGrid> make_policy_stack(const std::vector<PolicyGrid>& extracted,
                                          const Axis& u_axis, const Axis& t_axis);

// Executes the stopping rule along a sampled trajectory: at claim epoch i
// look up r from the policy with K-i claims remaining and stop at T_i + r
// if the next claim arrives later; the K-th claim forces a stop.
StoppingOutcome execute_policy(const Trajectory& traj, const std::vector<PolicyGrid>& policies,
                               std::size_t claims, const ModelParams& params,
                               const Utility& utility);

// Same rule with one stationary policy at every stage (fixed-point runs);
// stops at the latest when the current time passes the horizon.
StoppingOutcome execute_policy_stationary(const Trajectory& traj, const PolicyGrid& policy,
                                          const ModelParams& params, const Utility& utility);

struct McEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t n_paths = 0;
    double confidence_level = 0.997;  // three-sigma reporting convention
};

struct PathRecord {
    double z = 0.0;
    double tau = 0.0;
    std::uint32_t sigma = 0;
    bool ruined = false;
    bool dip = false;
};

struct SimulationSummary {
    McEstimate estimate;
    std::size_t ruined_paths = 0;
    std::size_t interclaim_dip_paths = 0;
    std::vector<PathRecord> paths;  // filled only when keep_paths
};

struct SimulationOptions {
    std::size_t n_paths = 0;
    std::uint64_t base_seed = 0;
    unsigned threads = 0;
    bool keep_paths = false;
    std::size_t stationary_max_claims = 1024;
};

SimulationSummary simulate_policy(const ModelParams& params, const Distribution& interarrival,
                                  const Distribution& claim_size, const Utility& utility,
                                  const std::vector<PolicyGrid>& policies, std::size_t claims,
                                  const SimulationOptions& options);

SimulationSummary simulate_policy_stationary(const ModelParams& params,
                                             const Distribution& interarrival,
                                             const Distribution& claim_size,
                                             const Utility& utility, const PolicyGrid& policy,
                                             const SimulationOptions& options);

// Monte Carlo estimate of E Z(tau*) under the given policy stack. Paths are
// reproducible and independent of the parallelism degree.
McEstimate estimate_value(const ModelParams& params, const Distribution& interarrival,
                          const Distribution& claim_size, const Utility& utility,
                          const std::vector<PolicyGrid>& policies, std::size_t claims,
                          std::size_t n_paths, std::uint64_t base_seed, unsigned threads = 0);

// Deterministic-quadrature evaluation of the optimal value for K in {1, 2},
// independent of the grid solver: the waiting-time maximization is done by
// dense scan at every reached state and the nested claim expectations by
// high-order quadrature.
struct BruteForceConfig {
    std::size_t scan_cells[2] = {2048, 256};
    std::size_t order[2] = {10, 6};
    std::size_t claim_panels[2] = {32, 16};
    double refine_tol = 1e-9;
    unsigned threads = 0;
};

double brute_force_value(const ModelParams& params, const Distribution& interarrival,
                         const Distribution& claim_size, const Utility& utility,
                         std::size_t claims, const BruteForceConfig& config = {});

}  // namespace riskstop
