#include "riskstop/diagnostics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "riskstop/errors.hpp"
#include "riskstop/gauss_legendre.hpp"
#include "riskstop/parallel.hpp"
#include "riskstop/rng.hpp"

namespace riskstop {

GeneratorConvention generator_convention_from_string(const std::string& name) {
    if (name == "consistent") return GeneratorConvention::Consistent;
    if (name == "as_printed") return GeneratorConvention::AsPrinted;
    throw std::invalid_argument("unknown convention '" + name +
                                "' (consistent | as_printed)");
}

std::string to_string(GeneratorConvention convention) {
    return convention == GeneratorConvention::Consistent ? "consistent" : "as_printed";
}

namespace {

double claim_expectation(const Distribution& claim_size, double u, double price_factor,
                         const std::function<double(double)>& g1,
                         const GeneratorQuadrature& quad) {
    // int over claims that leave positive capital of g1(u - x * price_factor)
    const double cap = u / price_factor;
    if (claim_size.is_point_mass()) {
        const double x = claim_size.atom();
        return x < cap ? g1(u - x * price_factor) : 0.0;
    }
    const double x_lo = claim_size.support_lower();
    const double x_hi = std::min(cap, claim_size.support_upper());
    if (x_hi <= x_lo) return 0.0;
    const auto f = [&](double x) { return g1(u - x * price_factor) * claim_size.density(x); };
    return gl_integrate_panels(f, x_lo, x_hi, quad.claim_panels, quad.order);
}

}  // namespace

double generator_apply_fn(const ExtendedState& state, const ModelParams& params,
                          const Distribution& interarrival, const Distribution& claim_size,
                          const std::function<double(double)>& g1,
                          const std::function<double(double)>& g1_prime,
                          GeneratorConvention convention, const GeneratorQuadrature& quad) {
    if (state.v == 0) return 0.0;
    if (!(state.t < params.t0))
        throw std::invalid_argument("generator_apply: requires t < t0");
    if (!(state.y >= 0.0)) throw std::invalid_argument("generator_apply: requires y >= 0");

    const double exp_at = std::exp(params.alpha * state.t);
    const double flow_rate = (params.alpha * params.a + params.c) * exp_at -
                             (params.alpha1 * params.a +
                              params.c * params.alpha1 / params.alpha) * exp_at +
                             (params.alpha1 * params.c / params.alpha +
                              params.alpha1 * state.u);
    double out = flow_rate * g1_prime(state.u);

    const double hazard = interarrival.hazard(state.y);  // throws when survival(y) = 0
    if (hazard != 0.0) {
        const double u = state.u;
        double bracket;
        if (convention == GeneratorConvention::Consistent) {
            // expected post-jump value minus pre-jump value; ruin maps to 0
            const double price = std::exp(params.beta * state.t);
            bracket = params.p * (claim_expectation(claim_size, u, price, g1, quad) - g1(u));
        } else {
            const double exponent = params.alpha1 * state.y +
                                    params.beta * (state.t - state.y);
            const double price = std::exp(exponent);
            const double threshold = u / price;
            const double cdf = claim_size.cdf(threshold);
            bracket = params.p * claim_expectation(claim_size, u, price, g1, quad) -
                      params.p * g1(u) * cdf - g1(u) * (1.0 - cdf);
        }
        out += hazard * bracket;
    }
    return out * static_cast<double>(state.v);
}

double generator_apply(const ExtendedState& state, const ModelParams& params,
                       const Distribution& interarrival, const Distribution& claim_size,
                       const Utility& utility, GeneratorConvention convention,
                       const GeneratorQuadrature& quad) {
    if (!utility.differentiable_everywhere())
        throw std::invalid_argument(
            "generator_apply: utility must be differentiable everywhere (logistic)");
    return generator_apply_fn(
        state, params, interarrival, claim_size,
        [&](double u) { return utility.value(u); },
        [&](double u) { return utility.derivative(u); }, convention, quad);
}

DynkinReport dynkin_check(const ExtendedState& state0, double horizon, std::size_t n_paths,
                          std::uint64_t base_seed, const ModelParams& params,
                          const Distribution& interarrival, const Distribution& claim_size,
                          const Utility& utility, GeneratorConvention convention,
                          const GeneratorQuadrature& quad, unsigned threads,
                          std::size_t segment_order) {
    if (!(horizon >= 0.0)) throw std::invalid_argument("dynkin_check: horizon must be >= 0");
    if (state0.t + horizon > params.t0 * (1.0 + 1e-12))
        throw std::invalid_argument("dynkin_check: state0.t + horizon must stay below t0");
    if (n_paths < 1) throw std::invalid_argument("dynkin_check: n_paths must be >= 1");
    if (!utility.differentiable_everywhere())
        throw std::invalid_argument("dynkin_check: utility must be differentiable (logistic)");

    DynkinReport report;
    report.horizon = horizon;
    report.n_paths = n_paths;
    report.convention = convention;
    if (horizon == 0.0) return report;

    const double g0 = state0.v != 0 && state0.t <= params.t0 ? utility.value(state0.u) : 0.0;
    const GaussLegendreRule& rule = gauss_legendre(segment_order);

    std::vector<double> lhs(n_paths), rhs(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t i) {
        PathRng rng(base_seed, i);
        double t = state0.t;
        double u = state0.u;
        double y = state0.y;
        int v = state0.v;
        double remaining = horizon;
        double integral = 0.0;

        while (remaining > 0.0 && v != 0) {
            const double to_claim = interarrival.sample_residual(y, rng);
            const double seg = std::min(to_claim, remaining);
            if (seg > 0.0) {
                double sum = 0.0;
                for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
                    const double ds = 0.5 * seg * (1.0 + rule.nodes[k]);
                    const ExtendedState at{t + ds, u + drift(params, t, ds, u), y + ds, v};
                    sum += rule.weights[k] *
                           generator_apply(at, params, interarrival, claim_size, utility,
                                           convention, quad);
                }
                integral += 0.5 * seg * sum;
            }
            if (to_claim <= remaining) {
                const double pre = u + drift(params, t, to_claim, u);
                t += to_claim;
                remaining -= to_claim;
                const double x = claim_size.sample(rng);
                const bool eps = rng.bernoulli(params.p);
                u = apply_claim(params, pre, t, x, eps);
                v = ruin_indicator_step(v, u);
                y = 0.0;
            } else {
                u += drift(params, t, remaining, u);
                t += remaining;
                y += remaining;
                remaining = 0.0;
            }
        }
        const double g_h = v != 0 ? utility.value(u) : 0.0;
        lhs[i] = g_h - g0;
        rhs[i] = integral;
    });

    double mean_lhs = 0.0, mean_rhs = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        mean_lhs += lhs[i];
        mean_rhs += rhs[i];
    }
    mean_lhs /= static_cast<double>(n_paths);
    mean_rhs /= static_cast<double>(n_paths);
    double ss_lhs = 0.0, ss_rhs = 0.0, ss_gap = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        const double dl = lhs[i] - mean_lhs;
        const double dr = rhs[i] - mean_rhs;
        const double dg = (lhs[i] - rhs[i]) - (mean_lhs - mean_rhs);
        ss_lhs += dl * dl;
        ss_rhs += dr * dr;
        ss_gap += dg * dg;
    }
    const double denom = n_paths > 1 ? static_cast<double>(n_paths - 1) *
                                           static_cast<double>(n_paths)
                                     : 1.0;
    report.lhs = mean_lhs;
    report.rhs = mean_rhs;
    report.gap = mean_lhs - mean_rhs;
    report.se_lhs = std::sqrt(ss_lhs / denom);
    report.se_rhs = std::sqrt(ss_rhs / denom);
    report.se_gap = std::sqrt(ss_gap / denom);
    return report;
}

}  // namespace riskstop
