#include "riskstop/utility.hpp"

#include <cmath>
#include <stdexcept>

namespace riskstop {

Utility Utility::logistic(double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("logistic: scale must be positive");
    return Utility(UtilityKind::Logistic, scale);
}

Utility Utility::saturating_exp(double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("saturating_exp: scale must be positive");
    return Utility(UtilityKind::SaturatingExp, scale);
}

Utility Utility::rational() { return Utility(UtilityKind::Rational, 1.0); }

double Utility::value(double u) const {
    switch (kind_) {
        case UtilityKind::Logistic:
            return 1.0 / (1.0 + std::exp(-scale_ * u));
        case UtilityKind::SaturatingExp:
            return u >= 0.0 ? -std::expm1(-scale_ * u) : 0.0;
        case UtilityKind::Rational:
            return u >= 0.0 ? u / (1.0 + u) : 0.0;
    }
    return 0.0;
}

double Utility::derivative(double u) const {
    switch (kind_) {
        case UtilityKind::Logistic: {
            const double v = value(u);
            return scale_ * v * (1.0 - v);
        }
        case UtilityKind::SaturatingExp:
            return u >= 0.0 ? scale_ * std::exp(-scale_ * u) : 0.0;
        case UtilityKind::Rational: {
            if (u < 0.0) return 0.0;
            const double d = 1.0 + u;
            return 1.0 / (d * d);
        }
    }
    return 0.0;
}

std::string Utility::describe() const {
    switch (kind_) {
        case UtilityKind::Logistic: return "logistic(scale=" + std::to_string(scale_) + ")";
        case UtilityKind::SaturatingExp:
            return "saturating_exp(scale=" + std::to_string(scale_) + ")";
        case UtilityKind::Rational: return "rational";
    }
    return "?";
}

}  // namespace riskstop
