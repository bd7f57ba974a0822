#include <cmath>

#include "blobflow/dynamics.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace blob;
using namespace blob::dynamics;

namespace {

MollifierKernel n1(double eps, int d = 1) {
    return MollifierKernel(KernelFamily::exp_bracket(d, 1), eps);
}

ProblemSpec heat_global_spec(double eps) {
    ProblemSpec s{HeatEquation{0.0}, n1(eps), std::nullopt, {}, false, {}, 1.0};
    return s;
}

ProblemSpec heat_sigma_spec(double eps, double sigma) {
    ProblemSpec s{HeatEquation{sigma}, MollifierKernel(KernelFamily::poly_bump(1, 4), eps),
                  n1(1.0), {}, false, {}, 1.0};
    return s;
}

ProblemSpec fast_spec(double eps, double m = 0.8) {
    ProblemSpec s{FastDiffusion{m},
                  MollifierKernel(KernelFamily::barenblatt(1, KernelFamily::barenblatt_alpha_for(m)), eps),
                  std::nullopt,
                  {},
                  false,
                  {},
                  1.0};
    s.quad.n = 48;
    return s;
}

ParticleState state_of(std::initializer_list<double> xs) {
    ParticleState st;
    st.positions.resize(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::Index i = 0;
    for (double x : xs) st.positions(i++, 0) = x;
    return st;
}

}  // namespace

TEST_CASE("spec validation rejects inconsistent problems") {
    ProblemSpec bad{HeatEquation{0.0}, MollifierKernel(KernelFamily::poly_bump(1, 4), 0.3),
                    std::nullopt, {}, false, {}, 1.0};
    CHECK_THROWS_AS(bad.validate(), invalid_parameter);

    ProblemSpec no_lift{HeatEquation{0.2}, MollifierKernel(KernelFamily::poly_bump(1, 4), 0.3),
                        std::nullopt, {}, false, {}, 1.0};
    CHECK_THROWS_AS(no_lift.validate(), invalid_parameter);

    ProblemSpec bad_m = fast_spec(0.3);
    bad_m.equation = FastDiffusion{1.2};
    CHECK_THROWS_AS(bad_m.validate(), invalid_parameter);

    // m = 0.5 in d = 1 fails the default-alpha restriction m^2 + 2m - 2 > 0.
    ProblemSpec low_m{FastDiffusion{0.5},
                      MollifierKernel(KernelFamily::barenblatt(1, KernelFamily::barenblatt_alpha_for(0.5)), 0.3),
                      std::nullopt,
                      {},
                      false,
                      {},
                      1.0};
    CHECK_THROWS_AS(low_m.validate(), invalid_parameter);
}

TEST_CASE("single centered particle is stationary") {
    for (const auto& spec : {heat_global_spec(0.4), fast_spec(0.4)}) {
        const auto v = velocity(state_of({0.0}), spec);
        CHECK(std::abs(v(0, 0)) < 1e-10);
    }
    const auto vs = velocity(state_of({0.0}), heat_sigma_spec(0.5, 0.3));
    CHECK(std::abs(vs(0, 0)) < 1e-10);
}

TEST_CASE("mirror configurations have antisymmetric velocities") {
    for (const auto& spec : {heat_global_spec(0.5), heat_sigma_spec(0.5, 0.2), fast_spec(0.5)}) {
        const auto v = velocity(state_of({-0.5, 0.5}), spec);
        CHECK(v(0, 0) == doctest::Approx(-v(1, 0)).epsilon(1e-10));
    }
}

TEST_CASE("two heat particles spread and respect the velocity bound") {
    const auto spec = heat_global_spec(0.5);
    const auto st = state_of({-0.5, 0.5});
    const auto v = velocity(st, spec);
    CHECK(v(1, 0) > 0.0);

    // Brute-force oracle for the right particle's integral.
    const auto& ker = spec.kernel;
    auto u = [&](double y) {
        return 0.5 * (ker.eval_r2((y + 0.5) * (y + 0.5)) + ker.eval_r2((y - 0.5) * (y - 0.5)));
    };
    const double ref = -oracle::adaptive_simpson(
        [&](double y) { return ker.grad1(0.5 - y) * std::log(u(y)); }, -40.0, 40.0, 1e-13, 40);
    CHECK(v(1, 0) == doctest::Approx(ref).epsilon(1e-8));

    // |v| <= C / eps across eps with a stable constant.
    double c_prev = 0.0;
    for (double eps : {0.4, 0.2, 0.1}) {
        const auto sp = heat_global_spec(eps);
        const double speed = velocity(st, sp).cwiseAbs().maxCoeff();
        const double c = speed * eps;
        CHECK(c < 10.0);
        if (c_prev > 0.0) CHECK(c < 3.0 * c_prev + 1.0);
        c_prev = c;
    }
}

TEST_CASE("fast-diffusion velocity matches a brute-force oracle") {
    const double m = 0.8;
    const auto spec = fast_spec(0.5, m);
    const auto st = state_of({-0.5, 0.5});
    const auto v = velocity(st, spec);
    CHECK(v(1, 0) > 0.0);

    const auto& ker = spec.kernel;
    auto u = [&](double y) {
        return 0.5 * (ker.eval_r2((y + 0.5) * (y + 0.5)) + ker.eval_r2((y - 0.5) * (y - 0.5)));
    };
    double ref = 0.0;
    for (auto [a, b] : {std::pair{-3000.0, -10.0}, {-10.0, 10.0}, {10.0, 3000.0}})
        ref += oracle::adaptive_simpson(
            [&](double y) { return ker.grad1(0.5 - y) * std::pow(u(y), m - 1.0); }, a, b, 1e-13, 44);
    ref *= m / (1.0 - m);
    CHECK(v(1, 0) == doctest::Approx(ref).epsilon(1e-6));
}

TEST_CASE("permutation equivariance and zero-velocity fixed point of step") {
    const auto spec = heat_global_spec(0.4);
    const auto a = step(state_of({-0.7, 0.2, 0.9}), spec, 0.01, Method::rk4);
    const auto b = step(state_of({0.9, -0.7, 0.2}), spec, 0.01, Method::rk4);
    CHECK(a.positions(0, 0) == doctest::Approx(b.positions(1, 0)).epsilon(1e-13));
    CHECK(a.positions(2, 0) == doctest::Approx(b.positions(2, 0) == b.positions(2, 0)
                                                   ? b.positions(0, 0)
                                                   : b.positions(0, 0))
                                   .epsilon(1e-13));

    const auto fixed = step(state_of({0.0}), spec, 0.01, Method::rk4);
    CHECK(std::abs(fixed.positions(0, 0)) < 1e-12);
    CHECK(fixed.time == doctest::Approx(0.01));
}

TEST_CASE("Richardson orders of euler and rk4") {
    const auto spec = heat_global_spec(0.5);
    const auto init = state_of({-0.4, 0.6});

    auto run = [&](Method method, double dt, int steps) {
        ParticleState st = init;
        for (int s = 0; s < steps; ++s) st = step(st, spec, dt, method);
        return st.positions;
    };
    // Reference: tiny-step rk4.
    const Mat ref = run(Method::rk4, 0.0025, 64);

    const double e_eu1 = (run(Method::euler, 0.04, 4) - ref).norm();
    const double e_eu2 = (run(Method::euler, 0.02, 8) - ref).norm();
    const double order_euler = std::log2(e_eu1 / e_eu2);
    CHECK(order_euler > 0.7);
    CHECK(order_euler < 1.3);

    const double e_rk1 = (run(Method::rk4, 0.08, 2) - ref).norm();
    const double e_rk2 = (run(Method::rk4, 0.04, 4) - ref).norm();
    const double order_rk = std::log2(e_rk1 / e_rk2);
    CHECK(order_rk > 3.2);
    CHECK(order_rk < 4.8);
}

TEST_CASE("center of mass is conserved without external potential") {
    const auto spec = heat_global_spec(0.4);
    ParticleState st;
    st.positions.resize(8, 1);
    st.positions << -1.1, -0.6, -0.2, 0.05, 0.3, 0.55, 0.8, 1.4;
    const double com0 = st.positions.mean();
    SimulateOptions opt;
    opt.T = 0.2;
    opt.dt = 0.016;
    opt.snapshot_every = 4;
    opt.with_energy = false;
    const auto traj = simulate(spec, st, opt);
    const double com1 = traj.snapshots.back().positions.mean();
    CHECK(std::abs(com1 - com0) < 1e-8);

    const auto specf = fast_spec(0.4);
    SimulateOptions optf = opt;
    const auto trajf = simulate(specf, st, optf);
    CHECK(std::abs(trajf.snapshots.back().positions.mean() - com0) < 1e-8);
}

TEST_CASE("dissipation identity: dH/dt = -((1-sigma)/N) sum |w_i|^2") {
    const auto spec = heat_sigma_spec(0.4, 0.1);
    ParticleState st = state_of({-0.6, -0.1, 0.2, 0.7});
    const auto eopt = energy::EnergyQuadOptions::from(spec.quad);
    auto entropy_of = [&](const ParticleState& s) {
        return energy::entropy_regularized(
            energy::MixtureDensity(s.positions, spec.kernel, spec.sigma(), spec.lift), eopt);
    };
    const Mat w = velocity(st, spec);
    const double dissipation = -(1.0 - spec.sigma()) / st.n() * w.rowwise().squaredNorm().sum();
    const double dt = 1e-4;
    const auto next = step(st, spec, dt, Method::rk4);
    const double dh = (entropy_of(next) - entropy_of(st)) / dt;
    CHECK(dh == doctest::Approx(dissipation).epsilon(5e-3));
}

TEST_CASE("energy is non-increasing along heat and fast runs") {
    SimulateOptions opt;
    opt.T = 0.1;
    opt.dt = 0.01;
    opt.snapshot_every = 2;

    const auto heat = simulate(heat_sigma_spec(0.4, 0.1), state_of({-0.6, -0.1, 0.2, 0.7}), opt);
    for (size_t i = 1; i < heat.report.size(); ++i)
        CHECK(heat.report[i].h_eps_sigma <= heat.report[i - 1].h_eps_sigma + 1e-6);

    SimulateOptions optf = opt;
    optf.dt = 0.0;  // use dt_max
    const auto fast = simulate(fast_spec(0.4), state_of({-0.6, -0.1, 0.2, 0.7}), optf);
    for (size_t i = 1; i < fast.report.size(); ++i)
        CHECK(fast.report[i].um_eps <= fast.report[i - 1].um_eps + 1e-6);
}

TEST_CASE("translation equivariance and mirror preservation") {
    const auto spec = heat_global_spec(0.4);
    ParticleState st = state_of({-0.8, -0.3, 0.3, 0.8});
    SimulateOptions opt;
    opt.T = 0.08;
    opt.dt = 0.008;
    opt.snapshot_every = 10;
    opt.with_energy = false;
    const auto base = simulate(spec, st, opt);

    ParticleState shifted = st;
    shifted.positions.array() += 2.0;
    const auto moved = simulate(spec, shifted, opt);
    CHECK((moved.snapshots.back().positions.array() - 2.0 -
           base.snapshots.back().positions.array())
              .abs()
              .maxCoeff() < 1e-9);

    // Mirror symmetry per step
    const auto one = step(st, spec, 0.008, Method::rk4);
    for (int i = 0; i < 2; ++i)
        CHECK(one.positions(i, 0) == doctest::Approx(-one.positions(3 - i, 0)).epsilon(1e-9));
}

TEST_CASE("lifted-heat velocity grows at most linearly in <x>") {
    // |w(x)| <= C^1 <x> with C^1 ~ (|log s| + d |log e| + 1)/e up to a
    // bounded factor; assert the measured ratio within a 2x margin.
    for (double eps : {0.4, 0.2}) {
        const auto spec = heat_sigma_spec(eps, 0.1);
        const double c1 =
            (std::abs(std::log(0.1)) + std::abs(std::log(eps)) + 1.0) / eps;
        ParticleState st;
        st.positions.resize(6, 1);
        st.positions << -2.5, -0.9, -0.1, 0.4, 1.2, 3.0;
        const auto v = velocity(st, spec);
        for (int i = 0; i < st.n(); ++i) {
            const double ratio = std::abs(v(i, 0)) / bracket(st.positions(i, 0));
            CHECK(ratio <= 2.0 * c1);
        }
    }
}

TEST_CASE("external quadratic potential pulls toward the origin") {
    ProblemSpec spec = heat_global_spec(0.4);
    spec.potential.kind = ExternalPotential::Kind::quadratic;
    const auto v_conf = velocity(state_of({2.0}), spec);
    ProblemSpec plain = heat_global_spec(0.4);
    const auto v_plain = velocity(state_of({2.0}), plain);
    CHECK(v_conf(0, 0) == doctest::Approx(v_plain(0, 0) - 2.0).epsilon(1e-10));
}

TEST_CASE("d = 2 sanity: stationarity, mirror antisymmetry, center of mass") {
    ProblemSpec spec{HeatEquation{0.0}, n1(0.5, 2), std::nullopt, {}, false, {}, 1.0};
    spec.quad.n = 16;
    ParticleState st;
    st.positions.resize(2, 2);
    st.positions << -0.4, 0.0, 0.4, 0.0;
    const auto v = velocity(st, spec);
    CHECK(v(0, 0) == doctest::Approx(-v(1, 0)).epsilon(1e-8));
    CHECK(std::abs(v(0, 1)) < 1e-9);
    CHECK(std::abs(v(1, 1)) < 1e-9);
    CHECK(v(1, 0) > 0.0);

    const auto next = step(st, spec, 0.02, Method::rk4);
    CHECK(std::abs(next.positions.col(0).mean()) < 1e-9);
}

TEST_CASE("scaling schedules invert the stated formulas") {
    {
        const auto [eps, sig] = scaling_schedule(ScheduleKind::heat_global, 0.2, std::exp(32.0));
        CHECK(eps == doctest::Approx(std::pow(32.0, -0.2)).epsilon(1e-12));
        CHECK(eps == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(sig == 0.0);
    }
    {
        const double n = std::exp(std::exp(4.0));
        const auto [eps, sig] = scaling_schedule(ScheduleKind::heat_compact, 0.5, n);
        CHECK(eps == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(sig == doctest::Approx(eps).epsilon(1e-12));
    }
    // monotone in N
    double prev = 1e9;
    for (double n : {1e3, 1e6, 1e12}) {
        const auto [eps, sig] = scaling_schedule(ScheduleKind::fast, 0.3, n);
        CHECK(eps < prev);
        prev = eps;
    }
    CHECK_THROWS_AS(scaling_schedule(ScheduleKind::heat_global, 0.3, 100.0), invalid_parameter);
    CHECK_THROWS_AS(scaling_schedule(ScheduleKind::heat_compact, 1.5, 100.0), invalid_parameter);
    CHECK_THROWS_AS(scaling_schedule(ScheduleKind::fast, 0.7, 100.0), invalid_parameter);
}

TEST_CASE("dt above the stability bound is rejected") {
    const auto spec = heat_global_spec(0.3);
    SimulateOptions opt;
    opt.T = 0.1;
    opt.dt = 1.0;
    CHECK_THROWS_AS(simulate(spec, state_of({0.0, 0.5}), opt), invalid_parameter);
}
