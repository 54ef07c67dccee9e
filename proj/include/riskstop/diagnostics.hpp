#pragma once

#include <cstdint>
#include <functional>

#include "riskstop/distribution.hpp"
#include "riskstop/model.hpp"
#include "riskstop/utility.hpp"

namespace riskstop {

// Extended Markov state: time, capital, backward recurrence time since the
// last claim, and the survival flag.
struct ExtendedState {
    double t = 0.0;
    double u = 0.0;
    double y = 0.0;
    int v = 1;
};

// Jump-term convention for the generator. Consistent prices a claim hitting
// at time t at x e^{beta t} and lets a refused claim leave the state alone
// (expected post-jump value minus pre-jump value, ruin sends the return to
// 0). AsPrinted reproduces the published display, which prices the claim at
// the last renewal epoch, x e^{alpha1 y + beta (t-y)}, and charges the
// refused-claim branch with the ruin probability of the hypothetical
// accepted claim. The Dynkin check adjudicates between them empirically.
enum class GeneratorConvention { Consistent, AsPrinted };

GeneratorConvention generator_convention_from_string(const std::string& name);
std::string to_string(GeneratorConvention convention);

struct GeneratorQuadrature {
    std::size_t claim_panels = 4;
    std::size_t order = 8;
};

// (A g~)(t, u, y, v). Requires t < t0, a differentiable utility (Logistic),
// and an interarrival law with a density; throws HazardUndefinedError when
// survival(y) = 0.
double generator_apply(const ExtendedState& state, const ModelParams& params,
                       const Distribution& interarrival, const Distribution& claim_size,
                       const Utility& utility, GeneratorConvention convention,
                       const GeneratorQuadrature& quad = {});

// Same evaluation for an arbitrary (value, derivative) pair; used for
// linearity checks of the generator.
double generator_apply_fn(const ExtendedState& state, const ModelParams& params,
                          const Distribution& interarrival, const Distribution& claim_size,
                          const std::function<double(double)>& g1,
                          const std::function<double(double)>& g1_prime,
                          GeneratorConvention convention, const GeneratorQuadrature& quad = {});

struct DynkinReport {
    double lhs = 0.0;  // E[g~(eta_h)] - g~(eta_0)
    double rhs = 0.0;  // E int_0^h (A g~)(eta_s) ds
    double gap = 0.0;  // lhs - rhs
    double se_lhs = 0.0;
    double se_rhs = 0.0;
    double se_gap = 0.0;  // paired standard error of the per-path difference
    double horizon = 0.0;
    std::size_t n_paths = 0;
    GeneratorConvention convention = GeneratorConvention::Consistent;
};

// Monte Carlo verification of Dynkin's formula on [0, horizon] from state0.
// Both sides are computed on the same paths; the integral is evaluated by
// per-segment Gauss-Legendre quadrature between claim epochs.
DynkinReport dynkin_check(const ExtendedState& state0, double horizon, std::size_t n_paths,
                          std::uint64_t base_seed, const ModelParams& params,
                          const Distribution& interarrival, const Distribution& claim_size,
                          const Utility& utility, GeneratorConvention convention,
                          const GeneratorQuadrature& quad = {}, unsigned threads = 0,
                          std::size_t segment_order = 8);

}  // namespace riskstop
