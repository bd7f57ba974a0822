#include "blobflow/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "blobflow/quadrature.hpp"

namespace blob::dynamics {

namespace {

double heat_weight_exponent(const ProblemSpec& spec) {
    // Growth exponent of |log u|: the lift's bracket power, or the kernel's
    // own when the kernel is the globally supported profile.
    if (spec.lift) return spec.lift->family().p;
    if (spec.kernel.family().type == Family::exp_bracket) return spec.kernel.family().p;
    return 1.0;
}

double fast_weight_exponent(const ProblemSpec& spec) {
    const double m = spec.m_exponent();
    const double alpha = spec.kernel.family().type == Family::barenblatt
                             ? spec.kernel.family().alpha
                             : KernelFamily::barenblatt_alpha_for(m);
    return 2.0 * alpha * (1.0 - m);
}

/// Shared composite grid along one axis: uniform eps-wide panels across the
/// particle hull plus the truncation radius, graded panels beyond for
/// heavy-tailed kernels.
quad::QuadratureRule velocity_axis_grid(double lo, double hi, const ProblemSpec& spec,
                                        double trunc_radius) {
    const double eps = spec.kernel.epsilon();
    quad::LineGridSpec g;
    const bool heavy = spec.kernel.family().type == Family::barenblatt;
    const double core_pad = heavy ? std::min(8.0 * eps, trunc_radius) : trunc_radius;
    g.core_lo = lo - core_pad;
    g.core_hi = hi + core_pad;
    g.lo = lo - trunc_radius;
    g.hi = hi + trunc_radius;
    g.panel_width = eps;
    g.nodes_per_panel = std::max(4, spec.quad.n / 2);
    g.grade = spec.quad.grade;
    return quad::composite_line(g);
}

struct Windows {
    bool enabled = false;
    double radius = 0.0;
};

/// Kernel part of the mixture at the grid nodes (d = 1), windowed sums for
/// kernels with certified-negligible tails. The window always includes the
/// nearest particle so logarithms stay finite.
Vec kernel_part_on_grid_1d(const Vec& nodes, const std::vector<double>& xs,
                           const MollifierKernel& ker, const Windows& win, int threads) {
    const Eigen::Index m = nodes.size();
    const double inv_n = 1.0 / static_cast<double>(xs.size());
    Vec u(m);
    parallel_for(m, threads, [&](Eigen::Index k) {
        const double y = nodes(k);
        size_t lo = 0, hi = xs.size();
        if (win.enabled) {
            lo = std::lower_bound(xs.begin(), xs.end(), y - win.radius) - xs.begin();
            hi = std::upper_bound(xs.begin(), xs.end(), y + win.radius) - xs.begin();
            if (lo >= hi) {  // keep the nearest particle
                if (lo == 0) {
                    lo = 0;
                    hi = 1;
                } else if (lo >= xs.size()) {
                    lo = xs.size() - 1;
                    hi = xs.size();
                } else if (y - xs[lo - 1] <= xs[lo] - y) {
                    --lo;
                    hi = lo + 1;
                } else {
                    hi = lo + 1;
                }
            }
        }
        double s = 0.0;
        for (size_t j = lo; j < hi; ++j) {
            const double z = y - xs[j];
            s += ker.eval_r2(z * z);
        }
        u(k) = s * inv_n;
    });
    return u;
}

Mat velocity_generic(const ParticleState& state, const ProblemSpec& spec, bool heat, int threads) {
    spec.validate();
    state.check_finite();
    const int d = state.dim();
    const int n = state.n();
    if (d != spec.kernel.dim()) throw invalid_parameter("velocity: dimension mismatch");
    const auto& ker = spec.kernel;
    const double eps = ker.epsilon();
    const double sig = spec.sigma();
    const double m = spec.m_exponent();
    const double w_exp = heat ? heat_weight_exponent(spec) : fast_weight_exponent(spec);
    const double r_t = ker.truncation_radius(w_exp, spec.quad.tail_tol);

    auto transform = [&](double u_v, double lift_val) {
        if (heat) {
            const double tot = (1.0 - sig) * u_v + sig * lift_val;
            if (!(tot > 0.0)) throw evaluation_error("velocity: vanishing mixture under the log");
            return std::log(tot);
        }
        return std::pow(u_v, m - 1.0);
    };
    // Velocity = -coef * int grad V_eps(x_i - y) transform(y) dy. The fast
    // branch takes the descent direction of the energy (u^(m-1) grows away
    // from the bulk, so mass spreads outward).
    const double coef = heat ? (spec.sigma_prefactor ? 1.0 - sig : 1.0) : -m / (1.0 - m);

    Mat vel(n, d);
    if (d == 1) {
        std::vector<double> xs(state.positions.data(), state.positions.data() + n);
        std::sort(xs.begin(), xs.end());
        const auto grid = velocity_axis_grid(xs.front(), xs.back(), spec, r_t);
        const Vec nodes = grid.nodes.col(0);

        Windows win;
        win.enabled = ker.family().type != Family::barenblatt;
        win.radius = ker.compact() ? eps : r_t;

        const Vec u = kernel_part_on_grid_1d(nodes, xs, ker, win, threads);
        Vec wt(nodes.size());
        for (Eigen::Index k = 0; k < nodes.size(); ++k) {
            const double lift_val = sig > 0.0 ? spec.lift->eval_r2(nodes(k) * nodes(k)) : 0.0;
            wt(k) = grid.weights(k) * transform(u(k), lift_val);
        }

        parallel_for(n, threads, [&](Eigen::Index i) {
            const double xi = state.positions(i, 0);
            Eigen::Index klo = 0, khi = nodes.size();
            if (win.enabled) {
                klo = std::lower_bound(nodes.data(), nodes.data() + nodes.size(), xi - win.radius) -
                      nodes.data();
                khi = std::upper_bound(nodes.data(), nodes.data() + nodes.size(), xi + win.radius) -
                      nodes.data();
            }
            double s = 0.0;
            for (Eigen::Index k = klo; k < khi; ++k) {
                const double z = xi - nodes(k);
                s += ker.grad_factor_r2(z * z) * z * wt(k);
            }
            vel(i, 0) = -coef * s;
        });
    } else {
        Vec lo = state.positions.colwise().minCoeff().transpose();
        Vec hi = state.positions.colwise().maxCoeff().transpose();
        const auto gx = velocity_axis_grid(lo(0), hi(0), spec, r_t);
        const auto gy = velocity_axis_grid(lo(1), hi(1), spec, r_t);
        const Eigen::Index mx = gx.size(), my = gy.size();

        Mat twt(mx, my);
        parallel_for(mx, threads, [&](Eigen::Index a) {
            Vec y(2);
            for (Eigen::Index b = 0; b < my; ++b) {
                y(0) = gx.nodes(a, 0);
                y(1) = gy.nodes(b, 0);
                double s = 0.0;
                for (int j = 0; j < n; ++j)
                    s += ker.eval_r2((y - state.positions.row(j).transpose()).squaredNorm());
                const double u_v = s / n;
                const double lift_val = sig > 0.0 ? spec.lift->eval(y) : 0.0;
                twt(a, b) = gx.weights(a) * gy.weights(b) * transform(u_v, lift_val);
            }
        });
        parallel_for(n, threads, [&](Eigen::Index i) {
            const double xi0 = state.positions(i, 0), xi1 = state.positions(i, 1);
            double sx = 0.0, sy = 0.0;
            for (Eigen::Index a = 0; a < mx; ++a) {
                const double z0 = xi0 - gx.nodes(a, 0);
                for (Eigen::Index b = 0; b < my; ++b) {
                    const double z1 = xi1 - gy.nodes(b, 0);
                    const double f = ker.grad_factor_r2(z0 * z0 + z1 * z1) * twt(a, b);
                    sx += f * z0;
                    sy += f * z1;
                }
            }
            vel(i, 0) = -coef * sx;
            vel(i, 1) = -coef * sy;
        });
    }

    if (heat && spec.potential.active()) {
        for (int i = 0; i < n; ++i)
            vel.row(i) -= spec.potential.grad(state.positions.row(i).transpose()).transpose();
    }
    if (!vel.allFinite()) throw evaluation_error("velocity: non-finite result");
    return vel;
}

}  // namespace

Mat velocity_heat(const ParticleState& state, const ProblemSpec& spec, int threads) {
    if (!spec.is_heat()) throw invalid_parameter("velocity_heat: heat problem required");
    return velocity_generic(state, spec, true, threads);
}

Mat velocity_fast(const ParticleState& state, const ProblemSpec& spec, int threads) {
    if (spec.is_heat()) throw invalid_parameter("velocity_fast: fast-diffusion problem required");
    return velocity_generic(state, spec, false, threads);
}

Mat velocity(const ParticleState& state, const ProblemSpec& spec, int threads) {
    return velocity_generic(state, spec, spec.is_heat(), threads);
}

ParticleState step(const ParticleState& state, const ProblemSpec& spec, double dt, Method method,
                   int threads) {
    if (!(dt > 0.0)) throw invalid_parameter("step: need dt > 0");
    ParticleState out = state;
    if (method == Method::euler) {
        out.positions += dt * velocity(state, spec, threads);
    } else {
        const Mat k1 = velocity(state, spec, threads);
        ParticleState s2 = state;
        s2.positions += 0.5 * dt * k1;
        const Mat k2 = velocity(s2, spec, threads);
        ParticleState s3 = state;
        s3.positions += 0.5 * dt * k2;
        const Mat k3 = velocity(s3, spec, threads);
        ParticleState s4 = state;
        s4.positions += dt * k3;
        const Mat k4 = velocity(s4, spec, threads);
        out.positions += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out.time = state.time + dt;
    for (int i = 0; i < out.n(); ++i)
        if (!out.positions.row(i).allFinite())
            throw evaluation_error("blow-up: particle " + std::to_string(i) + " at t = " +
                                   std::to_string(out.time));
    return out;
}

double dt_max(const ProblemSpec& spec) {
    const double eps = spec.kernel.epsilon();
    return spec.quad.c_stab * eps * eps;
}

namespace {

double support_growth_rate(const ProblemSpec& spec) {
    // Unit-prefactor constants from the velocity-growth estimates.
    const double eps = spec.kernel.epsilon();
    const int d = spec.kernel.dim();
    if (!spec.is_heat()) return 1.0 / (eps * eps);
    const double sig = spec.sigma();
    if (sig > 0.0) return (std::abs(std::log(sig)) + d * std::abs(std::log(eps)) + 1.0) / eps;
    return 0.0;  // bounded velocity; handled additively
}

energy::MixtureDensity mixture_of(const ParticleState& state, const ProblemSpec& spec) {
    return energy::MixtureDensity(state.positions, spec.kernel, spec.sigma(), spec.lift);
}

SnapshotRow report_row(const ParticleState& state, const ProblemSpec& spec,
                       const SimulateOptions& opt) {
    SnapshotRow row;
    row.t = state.time;
    row.m2 = energy::second_moment(state.positions);
    row.support_radius = energy::support_radius(state.positions);
    const Mat v = velocity(state, spec, opt.threads);
    row.max_speed = v.rowwise().norm().maxCoeff();
    if (opt.with_energy) {
        const auto eopt = energy::EnergyQuadOptions::from(spec.quad);
        const auto mix = mixture_of(state, spec);
        if (spec.is_heat()) {
            double e = energy::entropy_regularized(mix, eopt);
            if (spec.potential.active()) {
                double pot = 0.0;
                for (int i = 0; i < state.n(); ++i)
                    pot += spec.potential.value(state.positions.row(i).transpose());
                e += pot / state.n();
            }
            row.h_eps_sigma = e;
            row.h1 = energy::h1_seminorm(mix, eopt);
        } else {
            row.um_eps = energy::fast_energy(mix, spec.m_exponent(), eopt);
        }
    }
    return row;
}

}  // namespace

Trajectory simulate(const ProblemSpec& spec, const ParticleState& init, const SimulateOptions& opt) {
    spec.validate();
    if (!(opt.T > 0.0)) throw invalid_parameter("simulate: need T > 0");
    double dt = opt.dt > 0.0 ? opt.dt : dt_max(spec);
    if (dt > dt_max(spec) * (1.0 + 1e-12))
        throw invalid_parameter("simulate: dt exceeds the stability bound c_stab * eps^2");
    const int n_steps = std::max(1, static_cast<int>(std::llround(opt.T / dt)));
    dt = opt.T / n_steps;

    Trajectory traj;
    const double r0 = energy::support_radius(init.positions);
    const double growth = support_growth_rate(spec);
    const double eps = spec.kernel.epsilon();
    bool support_warned = false;

    ParticleState state = init;
    traj.snapshots.push_back(state);
    traj.report.push_back(report_row(state, spec, opt));

    for (int s = 1; s <= n_steps; ++s) {
        state = step(state, spec, dt, opt.method, opt.threads);
        const bool snap = (s % std::max(1, opt.snapshot_every) == 0) || s == n_steps;
        const double r = energy::support_radius(state.positions);
        const double t = state.time - init.time;
        const bool additive = spec.is_heat() && spec.sigma() == 0.0;
        const double measured = additive ? r : bracket(r);
        const double bound =
            additive ? r0 + t / eps : bracket(r0) * std::exp(growth * t);
        if (!support_warned && measured > bound * (1.0 + 1e-9) + 1e-9) {
            traj.warnings.push_back("support bound exceeded at t = " + std::to_string(state.time) +
                                    ": " + std::to_string(measured) + " > " +
                                    std::to_string(bound));
            support_warned = true;
        }
        if (snap) {
            traj.snapshots.push_back(state);
            traj.report.push_back(report_row(state, spec, opt));
        }
    }
    return traj;
}

std::pair<double, double> scaling_schedule(ScheduleKind kind, double gamma, double n_particles) {
    if (!(n_particles > 1.0)) throw invalid_parameter("scaling_schedule: need N > 1");
    switch (kind) {
        case ScheduleKind::heat_compact: {
            if (!(gamma > 0.0 && gamma < 1.0))
                throw invalid_parameter("heat_compact schedule: gamma in (0,1)");
            const double ll = std::log(std::log(n_particles));
            if (!(ll > 0.0)) throw invalid_parameter("heat_compact schedule: need log log N > 0");
            const double eps = std::pow(ll, -gamma);
            return {eps, eps};
        }
        case ScheduleKind::heat_global: {
            if (!(gamma > 0.0 && gamma < 0.25))
                throw invalid_parameter("heat_global schedule: gamma in (0,1/4)");
            return {std::pow(std::log(n_particles), -gamma), 0.0};
        }
        case ScheduleKind::fast: {
            if (!(gamma > 0.0 && gamma < 0.5))
                throw invalid_parameter("fast schedule: gamma in (0,1/2)");
            const double ll = std::log(std::log(n_particles));
            if (!(ll > 0.0)) throw invalid_parameter("fast schedule: need log log N > 0");
            return {std::pow(ll, -gamma), 0.0};
        }
    }
    throw invalid_parameter("scaling_schedule: unknown kind");
}

}  // namespace blob::dynamics
