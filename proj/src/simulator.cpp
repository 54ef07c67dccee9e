#include "riskstop/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "riskstop/errors.hpp"
#include "riskstop/gauss_legendre.hpp"
#include "riskstop/parallel.hpp"

namespace riskstop {

namespace {

// Detects a nonpositive capital excursion strictly between two claim epochs.
// Along the no-jump flow U(v) = A e^{alpha v} - c/alpha - S e^{alpha1 v};
// an interior minimum exists only when alpha1 S / (alpha A) > 0.
bool interclaim_dip(const ModelParams& mp, double t_prev, double u_prev, double zeta) {
    if (mp.alpha1 <= 0.0 || mp.alpha1 == mp.alpha) return false;
    const double big_a = mp.a + mp.c / mp.alpha;
    const double s_sum = (big_a * std::exp(mp.alpha * t_prev) - mp.c / mp.alpha - u_prev) *
                         std::exp(-mp.alpha1 * t_prev);
    if (s_sum <= 0.0) return false;
    const double ratio = mp.alpha1 * s_sum / (mp.alpha * big_a);
    if (!(ratio > 0.0)) return false;
    const double v_crit = std::log(ratio) / (mp.alpha - mp.alpha1);
    if (!(v_crit > t_prev) || !(v_crit < t_prev + zeta)) return false;
    const double u_crit = big_a * std::exp(mp.alpha * v_crit) - mp.c / mp.alpha -
                          s_sum * std::exp(mp.alpha1 * v_crit);
    return u_crit <= 0.0;
}

}  // namespace

Trajectory sample_trajectory(const ModelParams& params, const Distribution& interarrival,
                             const Distribution& claim_size, PathRng& rng,
                             std::size_t max_claims) {
    if (max_claims < 1) throw std::invalid_argument("sample_trajectory: max_claims must be >= 1");
    Trajectory traj;
    traj.initial_capital = params.a;
    traj.events.reserve(max_claims);
    traj.capital_at_claims.reserve(max_claims);
    traj.mu.reserve(max_claims);

    double t_prev = 0.0;
    double u_prev = params.a;
    int mu_prev = 1;
    for (std::size_t n = 1; n <= max_claims; ++n) {
        const double zeta = interarrival.sample(rng);
        const double x = claim_size.sample(rng);
        const bool eps = rng.bernoulli(params.p);
        const double t_n = t_prev + zeta;

        const double pre_claim = u_prev + drift(params, t_prev, zeta, u_prev);
        const double u_n = apply_claim(params, pre_claim, t_n, x, eps);
        const int mu_n = ruin_indicator_step(mu_prev, u_n);
        if (!traj.interclaim_dip && interclaim_dip(params, t_prev, u_prev, zeta))
            traj.interclaim_dip = true;

        traj.events.push_back({n, t_n, zeta, x, eps});
        traj.capital_at_claims.push_back(u_n);
        traj.mu.push_back(mu_n);
        if (mu_n == 0) break;
        t_prev = t_n;
        u_prev = u_n;
        mu_prev = mu_n;
    }
    return traj;
}

Trajectory sample_trajectory(const ModelParams& params, const Distribution& interarrival,
                             const Distribution& claim_size, SeedRecord seed,
                             std::size_t max_claims) {
    PathRng rng(seed.base_seed, seed.path_index);
    Trajectory traj = sample_trajectory(params, interarrival, claim_size, rng, max_claims);
    traj.seed = seed;
    return traj;
}

std::vector<PolicyGrid> make_policy_stack(const std::vector<PolicyGrid>& extracted,
                                          const Axis& u_axis, const Axis& t_axis) {
    std::vector<PolicyGrid> stack;
    stack.reserve(extracted.size() + 1);
    stack.emplace_back(u_axis, t_axis, 0.0);  // forced stop once no claims remain
    for (const PolicyGrid& grid : extracted) stack.push_back(grid);
    return stack;
}

namespace {

StoppingOutcome stop_here(const ModelParams& params, const Utility& utility, std::size_t stage,
                          double t, double u, double r) {
    StoppingOutcome out;
    out.sigma = stage;
    out.tau = t + r;
    const double u_tau = u + drift(params, t, r, u);
    out.z = out.tau <= params.t0 * (1.0 + 1e-12) ? utility.value(u_tau) : 0.0;
    return out;
}

void check_coverage(const PolicyGrid& policy, const ModelParams& params, double u) {
    if (std::abs(policy.t0() - params.t0) > 1e-9 * std::max(1.0, params.t0))
        throw PolicyMismatchError("policy horizon differs from params.t0");
    if (u > policy.u_top() * (1.0 + 1e-9))
        throw PolicyMismatchError("trajectory capital exceeds the policy grid");
}

}  // namespace

StoppingOutcome execute_policy(const Trajectory& traj, const std::vector<PolicyGrid>& policies,
                               std::size_t claims, const ModelParams& params,
                               const Utility& utility) {
    if (policies.size() != claims + 1)
        throw std::invalid_argument("execute_policy: need exactly K+1 policy grids");

    for (std::size_t stage = 0; stage <= claims; ++stage) {
        const double t = traj.time_of(stage);
        const double u = traj.capital_after(stage);
        if (traj.mu_at(stage) == 0) {
            StoppingOutcome out;
            out.sigma = stage;
            out.tau = t;
            out.ruined_before = true;
            return out;
        }
        if (t > params.t0) {
            // past the horizon the return is already 0 wherever we stop
            StoppingOutcome out;
            out.sigma = stage;
            out.tau = t;
            return out;
        }
        const PolicyGrid& policy = policies[claims - stage];
        check_coverage(policy, params, u);
        const double r = policy.eval(u, t);
        if (stage == claims) return stop_here(params, utility, stage, t, u, r);
        if (stage >= traj.events.size())
            throw std::invalid_argument("execute_policy: trajectory too short for K claims");
        if (r < traj.events[stage].interarrival)
            return stop_here(params, utility, stage, t, u, r);
    }
    throw std::logic_error("execute_policy: unreachable");
}

StoppingOutcome execute_policy_stationary(const Trajectory& traj, const PolicyGrid& policy,
                                          const ModelParams& params, const Utility& utility) {
    for (std::size_t stage = 0;; ++stage) {
        const double t = traj.time_of(stage);
        const double u = traj.capital_after(stage);
        if (traj.mu_at(stage) == 0) {
            StoppingOutcome out;
            out.sigma = stage;
            out.tau = t;
            out.ruined_before = true;
            return out;
        }
        if (t > params.t0) {
            StoppingOutcome out;
            out.sigma = stage;
            out.tau = t;
            return out;
        }
        check_coverage(policy, params, u);
        const double r = policy.eval(u, t);
        if (r < (stage < traj.events.size() ? traj.events[stage].interarrival
                                            : std::numeric_limits<double>::infinity()))
            return stop_here(params, utility, stage, t, u, r);
        if (stage >= traj.events.size())
            throw std::invalid_argument(
                "execute_policy_stationary: trajectory exhausted before the rule stopped");
    }
}

namespace {

SimulationSummary run_paths(const ModelParams& params, const Distribution& interarrival,
                            const Distribution& claim_size, const Utility& utility,
                            const std::vector<PolicyGrid>* stack, std::size_t claims,
                            const PolicyGrid* stationary, const SimulationOptions& options) {
    const std::size_t n = options.n_paths;
    if (n < 2) throw std::invalid_argument("simulate: n_paths must be >= 2");

    std::vector<PathRecord> records(n);
    const std::size_t max_claims =
        stationary ? options.stationary_max_claims : std::max<std::size_t>(claims, 1);
    parallel_for(n, options.threads, [&](std::size_t i) {
        Trajectory traj = sample_trajectory(params, interarrival, claim_size,
                                            SeedRecord{options.base_seed, i}, max_claims);
        const StoppingOutcome out =
            stationary ? execute_policy_stationary(traj, *stationary, params, utility)
                       : execute_policy(traj, *stack, claims, params, utility);
        records[i] = PathRecord{out.z, out.tau, static_cast<std::uint32_t>(out.sigma),
                                out.ruined_before, traj.interclaim_dip};
    });

    // Fixed-order reduction: the aggregate does not depend on the thread count.
    double sum = 0.0;
    for (const PathRecord& rec : records) sum += rec.z;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const PathRecord& rec : records) {
        const double d = rec.z - mean;
        ss += d * d;
    }
    SimulationSummary summary;
    summary.estimate.mean = mean;
    summary.estimate.standard_error =
        std::sqrt(ss / (static_cast<double>(n - 1) * static_cast<double>(n)));
    summary.estimate.n_paths = n;
    for (const PathRecord& rec : records) {
        if (rec.ruined) ++summary.ruined_paths;
        if (rec.dip) ++summary.interclaim_dip_paths;
    }
    if (options.keep_paths) summary.paths = std::move(records);
    return summary;
}

}  // namespace

SimulationSummary simulate_policy(const ModelParams& params, const Distribution& interarrival,
                                  const Distribution& claim_size, const Utility& utility,
                                  const std::vector<PolicyGrid>& policies, std::size_t claims,
                                  const SimulationOptions& options) {
    return run_paths(params, interarrival, claim_size, utility, &policies, claims, nullptr,
                     options);
}

SimulationSummary simulate_policy_stationary(const ModelParams& params,
                                             const Distribution& interarrival,
                                             const Distribution& claim_size,
                                             const Utility& utility, const PolicyGrid& policy,
                                             const SimulationOptions& options) {
    return run_paths(params, interarrival, claim_size, utility, nullptr, 0, &policy, options);
}

McEstimate estimate_value(const ModelParams& params, const Distribution& interarrival,
                          const Distribution& claim_size, const Utility& utility,
                          const std::vector<PolicyGrid>& policies, std::size_t claims,
                          std::size_t n_paths, std::uint64_t base_seed, unsigned threads) {
    if (n_paths < 100) throw std::invalid_argument("estimate_value: n_paths must be >= 100");
    SimulationOptions options;
    options.n_paths = n_paths;
    options.base_seed = base_seed;
    options.threads = threads;
    return simulate_policy(params, interarrival, claim_size, utility, policies, claims, options)
        .estimate;
}

namespace {

// Direct nested-quadrature evaluation of the optimal value, without grids.
class BruteForceEngine {
public:
    BruteForceEngine(const ModelParams& params, const Distribution& interarrival,
                     const Distribution& claim_size, const Utility& utility,
                     const BruteForceConfig& config)
        : mp_(params), f_(interarrival), h_(claim_size), g1_(utility), cfg_(config) {}

    double value(double u, double t, std::size_t j, std::size_t depth) const {
        if (u < 0.0) return 0.0;
        if (t > mp_.t0) return 0.0;
        if (j == 0) return g1_.value(u);
        const double rmax = mp_.t0 - t;
        if (rmax <= 0.0) return g1_.value(u);
        if (f_.is_point_mass()) return value_atom_f(u, t, j, depth, rmax);

        const std::size_t lvl = std::min<std::size_t>(depth, 1);
        const std::size_t cells = cfg_.scan_cells[lvl];
        const std::size_t order = cfg_.order[lvl];

        // Claim-term integrand at fixed quadrature nodes; cumulative sums
        // give the integral up to every scan boundary.
        const GaussLegendreRule& rule = gauss_legendre(order);
        const double step = rmax / static_cast<double>(cells);
        std::vector<double> cum(cells + 1, 0.0);
        for (std::size_t m = 0; m < cells; ++m) {
            const double mid = (static_cast<double>(m) + 0.5) * step;
            double cell_sum = 0.0;
            for (std::size_t k = 0; k < order; ++k) {
                const double s = mid + 0.5 * step * rule.nodes[k];
                cell_sum += 0.5 * step * rule.weights[k] * f_.density(s) *
                            claim_term(u, t, s, j, depth);
            }
            cum[m + 1] = cum[m] + cell_sum;
        }

        double best_r = 0.0;
        double best_phi = stop_term(u, t, 0.0);
        std::size_t best_m = 0;
        for (std::size_t m = 1; m <= cells; ++m) {
            const double r = std::min(static_cast<double>(m) * step, rmax);
            const double phi = stop_term(u, t, r) + cum[m];
            if (phi > best_phi) {
                best_phi = phi;
                best_r = r;
                best_m = m;
            }
        }
        if (j == 1) {  // refine; fresh integrand values are cheap at this depth
            const auto phi_at = [&](double r) {
                const std::size_t m =
                    std::min(cells - 1, static_cast<std::size_t>(std::max(0.0, r / step)));
                const double base = static_cast<double>(m) * step;
                const auto fint = [&](double s) {
                    return f_.density(s) * claim_term(u, t, s, j, depth);
                };
                return stop_term(u, t, r) + cum[m] + gl_integrate(fint, base, r, order);
            };
            const double lo = static_cast<double>(best_m > 0 ? best_m - 1 : 0) * step;
            const double hi = std::min(static_cast<double>(best_m + 1) * step, rmax);
            refine(phi_at, lo, hi, best_r, best_phi);
        }
        return best_phi;
    }

private:
    template <typename F>
    void refine(const F& phi_at, double a, double b, double& best_r, double& best_phi) const {
        constexpr double inv_phi = 0.61803398874989484820458683436564;
        double c = b - inv_phi * (b - a);
        double d = a + inv_phi * (b - a);
        double fc = phi_at(c), fd = phi_at(d);
        auto consider = [&](double r, double v) {
            if (v > best_phi || (v == best_phi && r < best_r)) {
                best_phi = v;
                best_r = r;
            }
        };
        consider(c, fc);
        consider(d, fd);
        while (b - a > cfg_.refine_tol) {
            if (fc >= fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = phi_at(c);
                consider(c, fc);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = phi_at(d);
                consider(d, fd);
            }
        }
    }

    double stop_term(double u, double t, double r) const {
        if (r > mp_.t0 - t) return 0.0;
        return f_.survival(r) * g1_.value(u + drift(mp_, t, r, u));
    }

    // p * E[value after an accepted, surviving claim] + (1-p) * value unchanged.
    double claim_term(double u, double t, double s, std::size_t j, std::size_t depth) const {
        const double w = u + drift(mp_, t, s, u);
        const double tp = t + s;
        double out = 0.0;
        if (mp_.p > 0.0 && w > 0.0) out += mp_.p * accepted_claim_integral(w, tp, j, depth);
        if (mp_.p < 1.0) out += (1.0 - mp_.p) * value(w, tp, j - 1, depth + 1);
        return out;
    }

    double accepted_claim_integral(double w, double tp, std::size_t j, std::size_t depth) const {
        const double ebeta = std::exp(mp_.beta * tp);
        const double cap = w / ebeta;  // claims above this ruin the company
        if (h_.is_point_mass()) {
            const double x = h_.atom();
            return x < cap ? value(w - x * ebeta, tp, j - 1, depth + 1) : 0.0;
        }
        const double x_lo = h_.support_lower();
        const double x_hi = std::min(cap, h_.support_upper());
        if (x_hi <= x_lo) return 0.0;
        const std::size_t lvl = std::min<std::size_t>(depth, 1);
        const auto fint = [&](double x) {
            return value(w - x * ebeta, tp, j - 1, depth + 1) * h_.density(x);
        };
        return gl_integrate_panels(fint, x_lo, x_hi, cfg_.claim_panels[lvl], cfg_.order[lvl]);
    }

    double value_atom_f(double u, double t, std::size_t j, std::size_t depth,
                        double rmax) const {
        // The interarrival integral collapses to a step at the atom.
        const double atom = f_.atom();
        const double jump = atom <= rmax ? claim_term(u, t, atom, j, depth) : 0.0;
        const auto phi_at = [&](double r) {
            return stop_term(u, t, r) + (atom <= r ? jump : 0.0);
        };
        const std::size_t lvl = std::min<std::size_t>(depth, 1);
        const std::size_t cells = cfg_.scan_cells[lvl];
        double best_phi = phi_at(0.0);
        double best_r = 0.0;
        std::size_t best_m = 0;
        for (std::size_t m = 1; m <= cells; ++m) {
            const double r = rmax * static_cast<double>(m) / static_cast<double>(cells);
            const double phi = phi_at(r);
            if (phi > best_phi) {
                best_phi = phi;
                best_r = r;
                best_m = m;
            }
        }
        const double step = rmax / static_cast<double>(cells);
        const double lo = static_cast<double>(best_m > 0 ? best_m - 1 : 0) * step;
        const double hi = std::min(static_cast<double>(best_m + 1) * step, rmax);
        refine(phi_at, lo, hi, best_r, best_phi);
        return best_phi;
    }

    const ModelParams& mp_;
    const Distribution& f_;
    const Distribution& h_;
    const Utility& g1_;
    const BruteForceConfig& cfg_;
};

}  // namespace

double brute_force_value(const ModelParams& params, const Distribution& interarrival,
                         const Distribution& claim_size, const Utility& utility,
                         std::size_t claims, const BruteForceConfig& config) {
    if (claims < 1 || claims > 2)
        throw std::invalid_argument("brute_force_value: only K in {1, 2} is supported");
    BruteForceEngine engine(params, interarrival, claim_size, utility, config);
    return engine.value(params.a, 0.0, claims, 0);
}

}  // namespace riskstop
