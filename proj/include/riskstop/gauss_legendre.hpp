#pragma once

#include <cstddef>
#include <vector>

namespace riskstop {

// Gauss-Legendre rule on [-1, 1]; nodes ascending.
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Cached rule of the given order (Newton iteration on Legendre polynomials).
const GaussLegendreRule& gauss_legendre(std::size_t order);

// Integrate f over [a, b] with a single panel of the given order.
template <typename F>
double gl_integrate(const F& f, double a, double b, std::size_t order) {
    if (!(b > a)) return 0.0;
    const GaussLegendreRule& rule = gauss_legendre(order);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

// Composite rule: n_panels equal panels over [a, b].
template <typename F>
double gl_integrate_panels(const F& f, double a, double b, std::size_t n_panels,
                           std::size_t order) {
    if (!(b > a)) return 0.0;
    double sum = 0.0;
    const double width = (b - a) / static_cast<double>(n_panels);
    for (std::size_t p = 0; p < n_panels; ++p)
        sum += gl_integrate(f, a + width * static_cast<double>(p),
                            a + width * static_cast<double>(p + 1), order);
    return sum;
}

}  // namespace riskstop
