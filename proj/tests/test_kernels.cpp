#include <cmath>
#include <random>

#include "blobflow/kernels.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace blob;

namespace {

double lgamma_ratio_barenblatt_c(double alpha) {
    // 1 / int (1+x^2)^(-alpha) dx = Gamma(alpha) / (sqrt(pi) Gamma(alpha - 1/2))
    return std::exp(std::lgamma(alpha) - std::lgamma(alpha - 0.5)) / std::sqrt(M_PI);
}

}  // namespace

TEST_CASE("normalization constants match symbolic values") {
    CHECK(normalization_constant(KernelFamily::poly_bump(1, 4)) ==
          doctest::Approx(315.0 / 256.0).epsilon(1e-12));
    CHECK(normalization_constant(KernelFamily::poly_bump(1, 2)) ==
          doctest::Approx(15.0 / 16.0).epsilon(1e-12));
    CHECK(normalization_constant(KernelFamily::poly_bump(2, 4)) ==
          doctest::Approx(5.0 / M_PI).epsilon(1e-12));

    CHECK(normalization_constant(KernelFamily::barenblatt(1, 2.5)) ==
          doctest::Approx(lgamma_ratio_barenblatt_c(2.5)).epsilon(1e-11));
    CHECK(normalization_constant(KernelFamily::barenblatt(1, 2.5)) == doctest::Approx(0.75).epsilon(1e-11));
    CHECK(normalization_constant(KernelFamily::barenblatt(2, 2.5)) ==
          doctest::Approx(1.5 / M_PI).epsilon(1e-11));

    // Z(exp, p=2, d=1) = e^(-1) sqrt(pi); closed forms likewise in d=2.
    CHECK(1.0 / normalization_constant(KernelFamily::exp_bracket(1, 2)) ==
          doctest::Approx(std::exp(-1.0) * std::sqrt(M_PI)).epsilon(1e-12));
    CHECK(1.0 / normalization_constant(KernelFamily::exp_bracket(2, 2)) ==
          doctest::Approx(M_PI * std::exp(-1.0)).epsilon(1e-12));
    CHECK(1.0 / normalization_constant(KernelFamily::exp_bracket(2, 1)) ==
          doctest::Approx(4.0 * M_PI * std::exp(-1.0)).epsilon(1e-12));

    // p=1, d=1 has no elementary closed form; compare to an adaptive oracle.
    const double z_oracle =
        2.0 * oracle::adaptive_simpson([](double x) { return std::exp(-std::sqrt(1.0 + x * x)); },
                                       0.0, 60.0, 1e-14);
    CHECK(1.0 / normalization_constant(KernelFamily::exp_bracket(1, 1)) ==
          doctest::Approx(z_oracle).epsilon(1e-11));
}

TEST_CASE("invalid family parameters rejected") {
    CHECK_THROWS_AS(KernelFamily::poly_bump(1, 1), invalid_parameter);
    CHECK_THROWS_AS(KernelFamily::exp_bracket(1, 3), invalid_parameter);
    CHECK_THROWS_AS(KernelFamily::barenblatt(1, 0.5), invalid_parameter);
    CHECK_THROWS_AS(KernelFamily::barenblatt(3, 2.5), invalid_parameter);
    CHECK_THROWS_AS(MollifierKernel(KernelFamily::poly_bump(1, 4), 0.0), invalid_parameter);
}

TEST_CASE("eval: peak values, support, symmetry") {
    const MollifierKernel pb(KernelFamily::poly_bump(1, 4), 1.0);
    Vec zero = Vec::Zero(1);
    CHECK(pb.eval(zero) == doctest::Approx(315.0 / 256.0).epsilon(1e-12));

    const MollifierKernel pb_half(KernelFamily::poly_bump(1, 4), 0.5);
    Vec x(1);
    x << 0.6;
    CHECK(pb_half.eval(x) == 0.0);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    for (const auto& fam : {KernelFamily::poly_bump(1, 4), KernelFamily::exp_bracket(1, 1),
                            KernelFamily::exp_bracket(1, 2), KernelFamily::barenblatt(1, 2.5)}) {
        const MollifierKernel ker(fam, 0.7);
        for (int i = 0; i < 1000; ++i) {
            Vec p(1);
            p << unif(rng);
            CHECK(ker.eval(p) == doctest::Approx(ker.eval(-p)).epsilon(1e-14));
            CHECK(ker.grad(p)(0) == doctest::Approx(-ker.grad(-p)(0)).epsilon(1e-12));
        }
    }
    // d = 2 symmetry spot check
    const MollifierKernel ker2(KernelFamily::exp_bracket(2, 1), 0.5);
    for (int i = 0; i < 100; ++i) {
        Vec p(2);
        p << unif(rng), unif(rng);
        CHECK(ker2.eval(p) == doctest::Approx(ker2.eval(-p)).epsilon(1e-14));
        CHECK((ker2.grad(p) + ker2.grad(-p)).norm() < 1e-12 * (1.0 + ker2.grad(p).norm()));
    }
}

TEST_CASE("gradient: closed form and finite differences") {
    const MollifierKernel pb(KernelFamily::poly_bump(1, 4), 1.0);
    CHECK(pb.grad1(0.0) == 0.0);
    CHECK(pb.grad1(0.5) == doctest::Approx(-(315.0 / 256.0) * 1.6875).epsilon(1e-12));

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unif(-0.9, 0.9);
    for (const auto& fam : {KernelFamily::poly_bump(1, 4), KernelFamily::exp_bracket(1, 1),
                            KernelFamily::exp_bracket(1, 2), KernelFamily::barenblatt(1, 2.5)}) {
        for (double eps : {1.0, 0.5}) {
            const MollifierKernel ker(fam, eps);
            for (int i = 0; i < 50; ++i) {
                const double x = unif(rng) * eps;
                const double fd = oracle::central_diff(
                    [&](double t) {
                        Vec p(1);
                        p << t;
                        return ker.eval(p);
                    },
                    x);
                CHECK(std::abs(ker.grad1(x) - fd) < 1e-6 * (1.0 + std::abs(ker.grad1(x))));
            }
        }
    }
}

TEST_CASE("exp_bracket(1) gradient is dominated by the kernel value") {
    // |grad V_1| = (|x|/<x>) V_1 <= V_1; the ratio scan pins C = 1.
    const MollifierKernel n1(KernelFamily::exp_bracket(1, 1), 1.0);
    double max_ratio = 0.0;
    for (double x = -50.0; x <= 50.0; x += 0.01) {
        const double v = n1.eval_r2(x * x);
        if (v > 0.0) max_ratio = std::max(max_ratio, std::abs(n1.grad1(x)) / v);
    }
    CHECK(max_ratio <= 1.0 + 1e-12);
}

TEST_CASE("moments: normalization, symbolic value, eps-scaling") {
    const MollifierKernel pb(KernelFamily::poly_bump(1, 4), 1.0);
    CHECK(pb.moment(0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pb.moment(2.0) == doctest::Approx(1.0 / 11.0).epsilon(1e-11));

    for (const auto& fam : {KernelFamily::poly_bump(1, 4), KernelFamily::exp_bracket(1, 1),
                            KernelFamily::exp_bracket(2, 2), KernelFamily::barenblatt(1, 2.5)}) {
        const MollifierKernel k1(fam, 1.0), k_half(fam, 0.5);
        CHECK(k1.moment(0.0) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(k_half.moment(2.0) - 0.25 * k1.moment(2.0)) <= 1e-10 * k1.moment(2.0));
    }

    // q = 2 alpha - d diverges.
    const MollifierKernel bb(KernelFamily::barenblatt(1, 2.5), 1.0);
    CHECK_THROWS_AS(bb.moment(4.0), invalid_parameter);
    CHECK_THROWS_AS(bb.moment(-1.0), invalid_parameter);
}

TEST_CASE("entropy of V_1 against an adaptive oracle") {
    // d = 1 profiles, integrated naively over the (effective) support.
    const double c_pb = 315.0 / 256.0;
    const double ent_pb = oracle::adaptive_simpson(
        [&](double x) {
            const double t = 1.0 - x * x;
            if (t <= 1e-300) return 0.0;
            const double v = c_pb * std::pow(t, 4);
            return v * std::log(v);
        },
        -1.0, 1.0, 1e-13);
    CHECK(MollifierKernel(KernelFamily::poly_bump(1, 4), 1.0).entropy_v1() ==
          doctest::Approx(ent_pb).epsilon(1e-9));

    const double z1 = 2.0 * oracle::adaptive_simpson(
                                [](double x) { return std::exp(-std::sqrt(1.0 + x * x)); }, 0.0, 60.0, 1e-14);
    const double ent_n1 = oracle::adaptive_simpson(
        [&](double x) {
            const double v = std::exp(-std::sqrt(1.0 + x * x)) / z1;
            return v * std::log(v);
        },
        -60.0, 60.0, 1e-13);
    CHECK(MollifierKernel(KernelFamily::exp_bracket(1, 1), 1.0).entropy_v1() ==
          doctest::Approx(ent_n1).epsilon(1e-9));

    const double c_bb = 0.75;
    const double ent_bb = oracle::adaptive_simpson(
        [&](double x) {
            const double v = c_bb * std::pow(1.0 + x * x, -2.5);
            return v * std::log(v);
        },
        -3000.0, 3000.0, 1e-13, 60);
    CHECK(MollifierKernel(KernelFamily::barenblatt(1, 2.5), 1.0).entropy_v1() ==
          doctest::Approx(ent_bb).epsilon(1e-8));
}

TEST_CASE("truncation radius: compact support, monotonicity, certified tail") {
    const MollifierKernel pb(KernelFamily::poly_bump(1, 4), 0.37);
    CHECK(pb.truncation_radius(1.0, 1e-10) == 0.37);

    const MollifierKernel n1(KernelFamily::exp_bracket(1, 1), 1.0);
    const double r10 = n1.truncation_radius(1.0, 1e-10);
    const double r6 = n1.truncation_radius(1.0, 1e-6);
    CHECK(std::isfinite(r10));
    CHECK(r6 <= r10);

    // Oracle: the exact tail integral at the returned radius is under tol and
    // the radius is not wildly conservative.
    auto exact_tail = [&](double R) {
        return 2.0 * oracle::adaptive_simpson(
                         [&](double r) {
                             const double b = std::sqrt(1.0 + r * r);
                             return std::abs(n1.grad1(r)) * b;
                         },
                         R, R + 120.0, 1e-16, 50);
    };
    CHECK(exact_tail(r10) <= 1e-10);
    CHECK(exact_tail(0.5 * r10) > 1e-10);

    const MollifierKernel bb(KernelFamily::barenblatt(1, 2.5), 1.0);
    const double rb = bb.truncation_radius(0.0, 1e-6);
    // Closed-form tail: int_{|z|>R} |grad V_eps| dz = 2 c (1 + (R/eps)^2)^(-alpha) / eps.
    auto bb_tail = [&](double R) { return 2.0 * 0.75 * std::pow(1.0 + R * R, -2.5); };
    CHECK(bb_tail(rb) <= 1e-6);
    CHECK(bb_tail(0.8 * rb) > 1e-6);

    // Divergent weighted integral: w >= 2 alpha + 1 - d.
    CHECK_THROWS_AS(bb.truncation_radius(5.0, 1e-6), invalid_parameter);
}

TEST_CASE("sup norms") {
    CHECK(MollifierKernel(KernelFamily::poly_bump(1, 4), 0.5).sup_norm() ==
          doctest::Approx(2.0 * 315.0 / 256.0).epsilon(1e-12));
    const MollifierKernel n2(KernelFamily::exp_bracket(1, 2), 1.0);
    CHECK(n2.sup_norm() == doctest::Approx(std::exp(-1.0) / (std::exp(-1.0) * std::sqrt(M_PI))).epsilon(1e-12));
}
