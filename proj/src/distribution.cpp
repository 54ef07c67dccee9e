#include "riskstop/distribution.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

#include "riskstop/errors.hpp"

namespace riskstop {

Distribution Distribution::exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw std::invalid_argument("exponential: rate must be positive");
    return Distribution(DistKind::Exponential, rate, 0.0);
}

Distribution Distribution::uniform(double lo, double hi) {
    if (!(lo >= 0.0) || !(hi > lo) || !std::isfinite(hi))
        throw std::invalid_argument("uniform: need 0 <= lo < hi");
    return Distribution(DistKind::Uniform, lo, hi);
}

Distribution Distribution::deterministic(double point) {
    if (!(point > 0.0) || !std::isfinite(point))
        throw std::invalid_argument("deterministic: point must be positive");
    return Distribution(DistKind::Deterministic, point, 0.0);
}

Distribution Distribution::gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale))
        throw std::invalid_argument("gamma: shape and scale must be positive");
    return Distribution(DistKind::Gamma, shape, scale);
}

double Distribution::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    switch (kind_) {
        case DistKind::Exponential:
            return -std::expm1(-p1_ * x);
        case DistKind::Uniform:
            if (x <= p1_) return 0.0;
            if (x >= p2_) return 1.0;
            return (x - p1_) / (p2_ - p1_);
        case DistKind::Deterministic:
            return x >= p1_ ? 1.0 : 0.0;
        case DistKind::Gamma:
            return boost::math::gamma_p(p1_, x / p2_);
    }
    return 0.0;
}

double Distribution::density(double x) const {
    if (x < 0.0) return 0.0;
    switch (kind_) {
        case DistKind::Exponential:
            return p1_ * std::exp(-p1_ * x);
        case DistKind::Uniform:
            return (x >= p1_ && x <= p2_) ? 1.0 / (p2_ - p1_) : 0.0;
        case DistKind::Deterministic:
            return 0.0;
        case DistKind::Gamma: {
            if (x == 0.0) return p1_ > 1.0 ? 0.0 : (p1_ == 1.0 ? 1.0 / p2_ : 0.0);
            const double log_pdf = (p1_ - 1.0) * std::log(x) - x / p2_ -
                                   std::lgamma(p1_) - p1_ * std::log(p2_);
            return std::exp(log_pdf);
        }
    }
    return 0.0;
}

double Distribution::atom() const {
    if (kind_ != DistKind::Deterministic)
        throw std::logic_error("atom(): not a point mass");
    return p1_;
}

double Distribution::mean() const {
    switch (kind_) {
        case DistKind::Exponential: return 1.0 / p1_;
        case DistKind::Uniform: return 0.5 * (p1_ + p2_);
        case DistKind::Deterministic: return p1_;
        case DistKind::Gamma: return p1_ * p2_;
    }
    return 0.0;
}

double Distribution::quantile(double q) const {
    if (!(q >= 0.0) || !(q < 1.0))
        throw std::invalid_argument("quantile: q must lie in [0, 1)");
    switch (kind_) {
        case DistKind::Exponential: return -std::log1p(-q) / p1_;
        case DistKind::Uniform: return p1_ + q * (p2_ - p1_);
        case DistKind::Deterministic: return q > 0.0 ? p1_ : 0.0;
        case DistKind::Gamma: return boost::math::gamma_p_inv(p1_, q) * p2_;
    }
    return 0.0;
}

double Distribution::support_lower() const {
    return kind_ == DistKind::Uniform || kind_ == DistKind::Deterministic ? p1_ : 0.0;
}

double Distribution::support_upper() const {
    switch (kind_) {
        case DistKind::Uniform: return p2_;
        case DistKind::Deterministic: return p1_;
        default: return std::numeric_limits<double>::infinity();
    }
}

double Distribution::sample(PathRng& rng) const {
    switch (kind_) {
        case DistKind::Exponential: return rng.exponential(p1_);
        case DistKind::Uniform: return rng.uniform(p1_, p2_);
        case DistKind::Deterministic: return p1_;
        case DistKind::Gamma: return rng.gamma(p1_, p2_);
    }
    return 0.0;
}

double Distribution::sample_residual(double elapsed, PathRng& rng) const {
    if (elapsed <= 0.0) return sample(rng);
    if (kind_ == DistKind::Exponential) return rng.exponential(p1_);  // memoryless
    const double tail = survival(elapsed);
    if (!(tail > 0.0))
        throw HazardUndefinedError("sample_residual: survival(elapsed) = 0");
    if (kind_ == DistKind::Deterministic) return p1_ - elapsed;
    const double u = rng.uniform_open01();
    const double q = 1.0 - u * tail;
    const double x = quantile(q < 1.0 ? q : std::nextafter(1.0, 0.0));
    return x > elapsed ? x - elapsed : 0.0;
}

double Distribution::hazard(double x) const {
    const double surv = survival(x);
    if (!(surv > 0.0))
        throw HazardUndefinedError("hazard: survival(x) = 0 at x = " + std::to_string(x));
    return density(x) / surv;
}

std::string Distribution::describe() const {
    switch (kind_) {
        case DistKind::Exponential: return "exponential(rate=" + std::to_string(p1_) + ")";
        case DistKind::Uniform:
            return "uniform(lo=" + std::to_string(p1_) + ", hi=" + std::to_string(p2_) + ")";
        case DistKind::Deterministic: return "deterministic(point=" + std::to_string(p1_) + ")";
        case DistKind::Gamma:
            return "gamma(shape=" + std::to_string(p1_) + ", scale=" + std::to_string(p2_) + ")";
    }
    return "?";
}

}  // namespace riskstop
