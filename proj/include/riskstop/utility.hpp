#pragma once

#include <string>

namespace riskstop {

enum class UtilityKind { Logistic, SaturatingExp, Rational };

// Bounded, continuous, nondecreasing utility g1 on the real line, with
// g(u, t) = g1(u) * 1{t >= 0}. All kinds take values in [0, 1].
class Utility {
public:
    static Utility logistic(double scale);        // 1 / (1 + exp(-scale*u))
    static Utility saturating_exp(double scale);  // 1 - exp(-scale*u) on u >= 0, else 0
    static Utility rational();                    // u / (1 + u) on u >= 0, else 0

    UtilityKind kind() const { return kind_; }
    double scale() const { return scale_; }

    double value(double u) const;

    // g1'; SaturatingExp and Rational use the right derivative at u = 0.
    double derivative(double u) const;

    // True for kinds differentiable on all of R (Logistic only).
    bool differentiable_everywhere() const { return kind_ == UtilityKind::Logistic; }

    double sup() const { return 1.0; }

    // g(u, t) = g1(u) * 1{t >= 0}
    double g(double u, double t) const { return t >= 0.0 ? value(u) : 0.0; }

    std::string describe() const;

private:
    Utility(UtilityKind kind, double scale) : kind_(kind), scale_(scale) {}

    UtilityKind kind_;
    double scale_;
};

}  // namespace riskstop
