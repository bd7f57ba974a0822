#include <cmath>

#include "blobflow/quadrature.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace blob;
using namespace blob::quad;

TEST_CASE("gauss_legendre two-node rule has the Legendre roots") {
    const auto rule = gauss_legendre(2, -1.0, 1.0);
    const double r = 1.0 / std::sqrt(3.0);
    CHECK(rule.nodes(0, 0) == doctest::Approx(-r).epsilon(1e-14));
    CHECK(rule.nodes(1, 0) == doctest::Approx(r).epsilon(1e-14));
    CHECK(rule.weights(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rule.weights(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("polynomial exactness up to degree 2n-1") {
    const auto r2 = gauss_legendre(2, -1.0, 1.0);
    CHECK(integrate1(r2, [](double x) { return x * x; }) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    const auto r3 = gauss_legendre(3, 0.0, 1.0);
    CHECK(integrate1(r3, [](double x) { return std::pow(x, 5); }) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
}

TEST_CASE("weights sum to the domain measure") {
    for (int n : {1, 2, 7, 33, 64}) {
        const auto r = gauss_legendre(n, -2.5, 4.0);
        CHECK(r.weights.sum() == doctest::Approx(r.volume).epsilon(1e-12));
    }
    const auto gx = gauss_legendre(5, 0.0, 2.0), gy = gauss_legendre(4, -1.0, 1.0);
    const auto box = tensor_box(gx, gy);
    CHECK(box.weights.sum() == doctest::Approx(4.0).epsilon(1e-12));
    const auto disk = ball_rule(8, 16, {0.5, -0.25}, 1.5);
    CHECK(disk.weights.sum() == doctest::Approx(M_PI * 1.5 * 1.5).epsilon(1e-12));
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(gauss_legendre(0, 0.0, 1.0), invalid_parameter);
    CHECK_THROWS_AS(gauss_legendre(4, 1.0, 1.0), invalid_parameter);
    CHECK_THROWS_AS(ball_rule(0, 8, {0, 0}, 1.0), invalid_parameter);
}

TEST_CASE("non-finite integrand reports the node") {
    const auto r = gauss_legendre(4, 0.0, 1.0);
    CHECK_THROWS_AS(integrate1(r, [](double x) { return 1.0 / (x - x); }), evaluation_error);
}

TEST_CASE("refinement convergence on a smooth integrand") {
    auto f = [](double x) { return std::exp(-x * x) * std::cos(3.0 * x); };
    const double ref = oracle::adaptive_simpson(f, -3.0, 3.0, 1e-14);
    double prev = 1e9;
    for (int n : {4, 8, 16, 32}) {
        const double err = std::abs(integrate1(gauss_legendre(n, -3.0, 3.0), f) - ref);
        CHECK(err <= prev + 1e-15);
        prev = err;
    }
    CHECK(prev < 1e-12);
}

TEST_CASE("tensor rule integrates separable products exactly") {
    const auto gx = gauss_legendre(4, -1.0, 1.0), gy = gauss_legendre(4, -1.0, 1.0);
    const auto box = tensor_box(gx, gy);
    double val = 0.0;
    for (Eigen::Index i = 0; i < box.size(); ++i) {
        const double x = box.nodes(i, 0), y = box.nodes(i, 1);
        val += box.weights(i) * x * x * std::pow(y, 4);
    }
    CHECK(val == doctest::Approx((2.0 / 3.0) * (2.0 / 5.0)).epsilon(1e-13));
}

TEST_CASE("composite line covers the interval and matches an oracle") {
    LineGridSpec spec;
    spec.lo = -4.0;
    spec.hi = 7.0;
    spec.core_lo = -1.0;
    spec.core_hi = 2.0;
    spec.panel_width = 0.25;
    spec.nodes_per_panel = 10;
    spec.grade = 1.3;
    const auto rule = composite_line(spec);
    CHECK(rule.weights.sum() == doctest::Approx(11.0).epsilon(1e-12));
    CHECK(rule.weights.minCoeff() > 0.0);
    for (Eigen::Index i = 1; i < rule.size(); ++i) CHECK(rule.nodes(i, 0) > rule.nodes(i - 1, 0));

    auto f = [](double x) { return std::exp(-0.5 * x * x); };
    const double ref = oracle::adaptive_simpson(f, -4.0, 7.0, 1e-13);
    CHECK(integrate1(rule, f) == doctest::Approx(ref).epsilon(1e-10));
}

TEST_CASE("composite line is mirror symmetric for a symmetric core") {
    LineGridSpec spec;
    spec.lo = -5.0;
    spec.hi = 5.0;
    spec.core_lo = -2.0;
    spec.core_hi = 2.0;
    spec.panel_width = 0.3;
    spec.nodes_per_panel = 6;
    const auto rule = composite_line(spec);
    const Eigen::Index m = rule.size();
    for (Eigen::Index i = 0; i < m; ++i) {
        CHECK(rule.nodes(i, 0) == doctest::Approx(-rule.nodes(m - 1 - i, 0)).epsilon(1e-13));
        CHECK(rule.weights(i) == doctest::Approx(rule.weights(m - 1 - i)).epsilon(1e-13));
    }
}
