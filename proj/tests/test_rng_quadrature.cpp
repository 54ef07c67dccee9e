#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "riskstop/gauss_legendre.hpp"
#include "riskstop/rng.hpp"

using namespace riskstop;

TEST_CASE("gauss-legendre integrates polynomials of degree 2n-1 exactly") {
    for (std::size_t order : {1u, 2u, 4u, 8u, 16u, 32u}) {
        const std::size_t degree = 2 * order - 1;
        // int_0^1 x^d dx = 1/(d+1)
        const auto f = [&](double x) { return std::pow(x, static_cast<double>(degree)); };
        const double got = gl_integrate(f, 0.0, 1.0, order);
        CHECK(got == doctest::Approx(1.0 / static_cast<double>(degree + 1)).epsilon(1e-13));
    }
}

TEST_CASE("gauss-legendre weights sum to the interval length") {
    const GaussLegendreRule& rule = gauss_legendre(12);
    double sum = 0.0;
    for (double w : rule.weights) sum += w;
    CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));
    for (std::size_t i = 1; i < rule.nodes.size(); ++i) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
}

TEST_CASE("composite panels match a known transcendental integral") {
    const auto f = [](double x) { return std::exp(-x) * std::cos(3.0 * x); };
    // antiderivative: e^{-x} (3 sin 3x - cos 3x) / 10
    const auto anti = [](double x) {
        return std::exp(-x) * (3.0 * std::sin(3.0 * x) - std::cos(3.0 * x)) / 10.0;
    };
    const double exact = anti(2.0) - anti(0.0);
    CHECK(gl_integrate_panels(f, 0.0, 2.0, 8, 8) == doctest::Approx(exact).epsilon(1e-13));
}

TEST_CASE("path streams are reproducible and distinct") {
    PathRng a(42, 7), b(42, 7), c(42, 8);
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t va = a.next_u64();
        CHECK(va == b.next_u64());
    }
    std::set<std::uint64_t> seen;
    PathRng a2(42, 7);
    for (int i = 0; i < 100; ++i) seen.insert(a2.next_u64());
    int collisions = 0;
    for (int i = 0; i < 100; ++i)
        if (seen.count(c.next_u64())) ++collisions;
    CHECK(collisions == 0);
}

TEST_CASE("uniform transforms stay inside their ranges") {
    PathRng rng(1, 0);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = rng.uniform_open01();
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        CHECK(rng.exponential(2.0) > 0.0);
    }
}

TEST_CASE("sample moments of the transforms agree with the laws") {
    PathRng rng(2024, 3);
    const int n = 200000;
    double se = 0.0, sn = 0.0, sg = 0.0;
    for (int i = 0; i < n; ++i) {
        se += rng.exponential(2.0);
        sn += rng.normal();
        sg += rng.gamma(3.0, 0.5);
    }
    CHECK(se / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(sn / n) < 0.01);
    CHECK(sg / n == doctest::Approx(1.5).epsilon(0.01));
}
