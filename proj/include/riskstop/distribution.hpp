#pragma once

#include <limits>
#include <string>

#include "riskstop/rng.hpp"

namespace riskstop {

enum class DistKind { Exponential, Uniform, Deterministic, Gamma };

// Parametric law for interarrival times and claim sizes. All supported
// kinds satisfy cdf(0) = 0. survival(x) is defined as 1 - cdf(x) so the
// complement identity holds exactly.
class Distribution {
public:
    static Distribution exponential(double rate);
    static Distribution uniform(double lo, double hi);
    static Distribution deterministic(double point);
    static Distribution gamma(double shape, double scale);

    DistKind kind() const { return kind_; }

    double cdf(double x) const;
    double survival(double x) const { return 1.0 - cdf(x); }

    // Lebesgue density; 0 outside the support. Deterministic laws have no
    // density: density() returns 0 everywhere (the point mass is handled by
    // callers through is_point_mass()/atom()).
    double density(double x) const;
    bool has_density() const { return kind_ != DistKind::Deterministic; }

    bool is_point_mass() const { return kind_ == DistKind::Deterministic; }
    double atom() const;

    double mean() const;
    double quantile(double q) const;

    // Support endpoints [lower, upper]; upper may be +infinity.
    double support_lower() const;
    double support_upper() const;

    double sample(PathRng& rng) const;

    // Draw the remaining time to the next event given that `elapsed` time
    // has already passed without one (law of X - elapsed | X > elapsed).
    double sample_residual(double elapsed, PathRng& rng) const;

    // Failure rate density(x)/survival(x); throws HazardUndefinedError when
    // survival(x) = 0.
    double hazard(double x) const;

    double param1() const { return p1_; }
    double param2() const { return p2_; }
    std::string describe() const;

private:
    Distribution(DistKind kind, double p1, double p2) : kind_(kind), p1_(p1), p2_(p2) {}

    DistKind kind_;
    double p1_;  // rate | lo | point | shape
    double p2_;  // unused | hi | unused | scale
};

}  // namespace riskstop
