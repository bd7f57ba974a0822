#include "blobflow/reference.hpp"

#include <algorithm>
#include <cmath>

#include "blobflow/quadrature.hpp"

namespace blob::ref {

double heat_exact_1d(double s0, double t, double x) {
    const double var = s0 * s0 + 2.0 * t;
    return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * M_PI * var);
}

double heat_exact(double s0, double t, const Eigen::Ref<const Vec>& x) {
    if (!(s0 > 0.0) || t < 0.0) throw invalid_parameter("heat_exact: need s0 > 0, t >= 0");
    double v = 1.0;
    for (Eigen::Index a = 0; a < x.size(); ++a) v *= heat_exact_1d(s0, t, x(a));
    return v;
}

double ou_exact(double mu0, double s0, double t, double x) {
    if (!(s0 > 0.0) || t < 0.0) throw invalid_parameter("ou_exact: need s0 > 0, t >= 0");
    const double mean = mu0 * std::exp(-t);
    const double var = 1.0 + (s0 * s0 - 1.0) * std::exp(-2.0 * t);
    const double z = x - mean;
    return std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * M_PI * var);
}

namespace {

void check_fast_params(double m, int d) {
    if (d < 1 || d > 2) throw invalid_parameter("barenblatt_fast: d must be 1 or 2");
    if (!(m > double(d) / (d + 2) && m < 1.0))
        throw invalid_parameter("barenblatt_fast: need m in (d/(d+2), 1)");
}

double profile_integral(double q, int d) {
    // int (1 + |z|^2)^(-q) dz over R^d
    return d == 1 ? std::sqrt(M_PI) * std::exp(std::lgamma(q - 0.5) - std::lgamma(q))
                  : M_PI / (q - 1.0);
}

}  // namespace

double barenblatt_mass_const(double m, int d) {
    check_fast_params(m, d);
    const double alpha_b = d / (d * (m - 1.0) + 2.0);
    const double k = (1.0 - m) * alpha_b / (2.0 * d * m);
    const double q = 1.0 / (1.0 - m);
    // mass = C^(d/2 - q) k^(-d/2) I_d(q) = 1
    const double i_d = profile_integral(q, d);
    return std::pow(i_d * std::pow(k, -0.5 * d), 1.0 / (q - 0.5 * d));
}

double barenblatt_fast(double m, int d, double t, double mass_const,
                       const Eigen::Ref<const Vec>& x) {
    check_fast_params(m, d);
    if (!(t > 0.0)) throw invalid_parameter("barenblatt_fast: need t > 0");
    const double alpha_b = d / (d * (m - 1.0) + 2.0);
    const double k = (1.0 - m) * alpha_b / (2.0 * d * m);
    const double y2 = x.squaredNorm() * std::pow(t, -2.0 * alpha_b / d);
    return std::pow(t, -alpha_b) * std::pow(mass_const + k * y2, -1.0 / (1.0 - m));
}

double barenblatt_fast_1d(double m, double t, double mass_const, double x) {
    Vec v(1);
    v << x;
    return barenblatt_fast(m, 1, t, mass_const, v);
}

GridDensity1D GridDensity1D::from_function(const std::function<double(double)>& f, double lo,
                                           double hi, int n) {
    if (!(lo < hi) || n < 2) throw invalid_parameter("grid density: need lo < hi and n >= 2");
    GridDensity1D g;
    g.h = (hi - lo) / n;
    g.x.resize(n);
    g.values.resize(n);
    for (int i = 0; i < n; ++i) {
        g.x(i) = lo + (i + 0.5) * g.h;
        g.values(i) = f(g.x(i));
        if (g.values(i) < 0.0) throw invalid_parameter("grid density: negative value");
    }
    g.normalize();
    return g;
}

void GridDensity1D::normalize() {
    const double total = h * values.sum();
    if (!(total > 0.0)) throw invalid_parameter("grid density: zero total mass");
    values /= total;
}

double GridDensity1D::cdf(double y) const {
    if (y <= lo()) return 0.0;
    if (y >= hi()) return 1.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double a = x(i) - 0.5 * h, b = x(i) + 0.5 * h;
        if (y >= b) {
            acc += values(i) * h;
        } else {
            acc += values(i) * (y - a);
            break;
        }
    }
    return acc;
}

double GridDensity1D::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw invalid_parameter("quantile: need p in (0,1)");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double cell = values(i) * h;
        if (acc + cell >= p) {
            if (cell <= 0.0) continue;
            return x(i) - 0.5 * h + (p - acc) / values(i);
        }
        acc += cell;
    }
    return hi();
}

ParticleState quantize(const GridDensity1D& density, int n) {
    if (n < 1) throw invalid_parameter("quantize: need N >= 1");
    if (std::abs(density.mass() - 1.0) > 1e-8)
        throw invalid_parameter("quantize: density not normalized");
    ParticleState st;
    st.positions.resize(n, 1);
    // Single cumulative sweep across cells and quantile targets.
    Eigen::Index cell = 0;
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        const double target = (j + 0.5) / n;
        while (cell < density.values.size() && acc + density.values(cell) * density.h < target) {
            acc += density.values(cell) * density.h;
            ++cell;
        }
        if (cell >= density.values.size()) {
            st.positions(j, 0) = density.hi();
        } else {
            const double a = density.x(cell) - 0.5 * density.h;
            st.positions(j, 0) =
                density.values(cell) > 0.0 ? a + (target - acc) / density.values(cell) : a;
        }
    }
    return st;
}

Vec isotonic_projection(const Eigen::Ref<const Vec>& v) {
    const Eigen::Index n = v.size();
    std::vector<double> mean(n);
    std::vector<Eigen::Index> count(n);
    Eigen::Index blocks = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        mean[blocks] = v(i);
        count[blocks] = 1;
        ++blocks;
        while (blocks > 1 && mean[blocks - 2] > mean[blocks - 1]) {
            const double total = mean[blocks - 2] * count[blocks - 2] + mean[blocks - 1] * count[blocks - 1];
            count[blocks - 2] += count[blocks - 1];
            mean[blocks - 2] = total / count[blocks - 2];
            --blocks;
        }
    }
    Vec out(n);
    Eigen::Index pos = 0;
    for (Eigen::Index b = 0; b < blocks; ++b)
        for (Eigen::Index r = 0; r < count[b]; ++r) out(pos++) = mean[b];
    return out;
}

JkoEnergy JkoEnergy::entropy_with_lift(MollifierKernel ker, double sig, MollifierKernel lift) {
    JkoEnergy e;
    e.kind = JkoEnergyKind::entropy_sigma;
    e.kernel = std::move(ker);
    e.lift = std::move(lift);
    e.sigma = sig;
    return e;
}

JkoEnergy JkoEnergy::entropy_global(MollifierKernel ker) {
    JkoEnergy e;
    e.kind = JkoEnergyKind::entropy;
    e.kernel = std::move(ker);
    return e;
}

JkoEnergy JkoEnergy::fast_diffusion(MollifierKernel ker, double m) {
    JkoEnergy e;
    e.kind = JkoEnergyKind::fast;
    e.kernel = std::move(ker);
    e.m = m;
    return e;
}

JkoEnergy JkoEnergy::none() {
    JkoEnergy e;
    e.kind = JkoEnergyKind::zero;
    return e;
}

namespace {

/// Energy and gradient evaluation on a grid frozen for the duration of one
/// JKO step; rebuilding on escape keeps the objective smooth along the inner
/// optimization path.
struct FrozenEnergy {
    const JkoEnergy& def;
    quad::QuadratureRule grid;
    double lo = 0.0, hi = 0.0;  // coverage of the frozen grid (atom range)
    double analytic_offset = 0.0;

    explicit FrozenEnergy(const JkoEnergy& d) : def(d) {}

    void build(const Vec& q, const Vec& anchor) {
        if (def.kind == JkoEnergyKind::zero) return;
        const auto& ker = *def.kernel;
        const double eps = ker.epsilon();
        const double span_lo = std::min(q(0), anchor(0));
        const double span_hi = std::max(q(q.size() - 1), anchor(anchor.size() - 1));
        const double margin = std::max(4.0 * eps, 0.25 * (span_hi - span_lo) + 2.0 * eps);
        lo = span_lo - margin;
        hi = span_hi + margin;
        double pad;
        analytic_offset = 0.0;
        if (ker.compact()) {
            pad = eps;
            if (def.kind == JkoEnergyKind::entropy_sigma)
                analytic_offset =
                    def.sigma * (std::log(def.sigma) + def.lift->entropy_v1());
        } else {
            // Conservative exponential/heavy-tail pad for the frozen window.
            pad = ker.truncation_radius(2.0, def.quad.tail_tol) + 4.0 * eps;
            if (def.kind == JkoEnergyKind::fast) {
                // u^m tails are heavy; widen until the dropped bound is small.
                const double mm = def.m;
                double r = pad;
                while (std::pow(ker.eval_r2(r * r), mm) * r / (1.0 - mm) > def.quad.tail_tol &&
                       r < 1e7)
                    r *= 1.5;
                pad = r;
            }
            if (def.kind == JkoEnergyKind::entropy_sigma)
                analytic_offset =
                    def.sigma * (std::log(def.sigma) + def.lift->entropy_v1());
        }
        quad::LineGridSpec g;
        g.lo = lo - pad;
        g.hi = hi + pad;
        g.core_lo = lo - std::min(pad, 8.0 * eps);
        g.core_hi = hi + std::min(pad, 8.0 * eps);
        g.panel_width = eps / def.quad.panels_per_eps;
        g.nodes_per_panel = def.quad.nodes_per_panel;
        g.grade = def.quad.grade;
        grid = quad::composite_line(g);
    }

    bool covers(const Vec& q) const {
        return def.kind == JkoEnergyKind::zero || (q(0) >= lo && q(q.size() - 1) <= hi);
    }

    /// Mixture at the grid nodes.
    Vec mixture(const Vec& q) const {
        const auto& ker = *def.kernel;
        const double inv_m = 1.0 / static_cast<double>(q.size());
        Vec u(grid.size());
        for (Eigen::Index k = 0; k < grid.size(); ++k) {
            const double y = grid.nodes(k, 0);
            double s = 0.0;
            for (Eigen::Index j = 0; j < q.size(); ++j) {
                const double z = y - q(j);
                s += ker.eval_r2(z * z);
            }
            u(k) = s * inv_m;
        }
        return u;
    }

    double value(const Vec& q) const {
        switch (def.kind) {
            case JkoEnergyKind::zero:
                return 0.0;
            case JkoEnergyKind::entropy: {
                const Vec u = mixture(q);
                double e = 0.0;
                for (Eigen::Index k = 0; k < grid.size(); ++k)
                    if (u(k) > 0.0) e += grid.weights(k) * u(k) * std::log(u(k));
                return e;
            }
            case JkoEnergyKind::entropy_sigma: {
                const Vec u = mixture(q);
                double e = 0.0;
                for (Eigen::Index k = 0; k < grid.size(); ++k) {
                    const double y = grid.nodes(k, 0);
                    const double nl = def.lift->eval_r2(y * y);
                    const double tot = (1.0 - def.sigma) * u(k) + def.sigma * nl;
                    const double ref = def.sigma * nl;
                    e += grid.weights(k) *
                         ((tot > 0.0 ? tot * std::log(tot) : 0.0) - ref * std::log(ref));
                }
                return e + analytic_offset;
            }
            case JkoEnergyKind::fast: {
                const Vec u = mixture(q);
                double e = 0.0;
                for (Eigen::Index k = 0; k < grid.size(); ++k)
                    e += grid.weights(k) * std::pow(u(k), def.m);
                return -e / (1.0 - def.m);
            }
        }
        return 0.0;
    }

    Vec gradient(const Vec& q) const {
        const Eigen::Index mq = q.size();
        Vec g = Vec::Zero(mq);
        if (def.kind == JkoEnergyKind::zero) return g;
        const auto& ker = *def.kernel;
        const Vec u = mixture(q);
        Vec fprime(grid.size());
        for (Eigen::Index k = 0; k < grid.size(); ++k) {
            switch (def.kind) {
                case JkoEnergyKind::entropy:
                    fprime(k) = u(k) > 0.0 ? std::log(u(k)) + 1.0 : 0.0;
                    break;
                case JkoEnergyKind::entropy_sigma: {
                    const double y = grid.nodes(k, 0);
                    const double tot =
                        (1.0 - def.sigma) * u(k) + def.sigma * def.lift->eval_r2(y * y);
                    fprime(k) = (1.0 - def.sigma) * (std::log(tot) + 1.0);
                    break;
                }
                case JkoEnergyKind::fast:
                    fprime(k) = -def.m / (1.0 - def.m) * std::pow(u(k), def.m - 1.0);
                    break;
                default:
                    fprime(k) = 0.0;
            }
        }
        const double inv_m = 1.0 / static_cast<double>(mq);
        for (Eigen::Index j = 0; j < mq; ++j) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < grid.size(); ++k) {
                const double z = q(j) - grid.nodes(k, 0);
                s += grid.weights(k) * fprime(k) * ker.grad_factor_r2(z * z) * z;
            }
            g(j) = inv_m * s;
        }
        return g;
    }
};

}  // namespace

double jko_energy_value(const JkoEnergy& energy, const Eigen::Ref<const Vec>& q) {
    FrozenEnergy fe(energy);
    Vec qc = q;
    fe.build(qc, qc);
    return fe.value(qc);
}

JkoStepResult jko_step(const QuantileDiscretization& q0, double tau, const JkoEnergy& energy,
                       const JkoOptions& opt) {
    if (!(tau > 0.0)) throw invalid_parameter("jko_step: need tau > 0");
    if (!q0.nondecreasing()) throw invalid_parameter("jko_step: quantiles must be nondecreasing");
    const Eigen::Index m = q0.values.size();
    const double inv_2tm = 1.0 / (2.0 * tau * m);

    FrozenEnergy fe(energy);
    fe.build(q0.values, q0.values);

    auto objective = [&](const Vec& q) {
        return inv_2tm * (q - q0.values).squaredNorm() + fe.value(q);
    };

    Vec q = q0.values;
    double f_cur = objective(q);
    double step_size = tau * m;
    bool converged = false;
    int it = 0;
    for (; it < opt.max_iters && !converged; ++it) {
        if (!fe.covers(q)) {  // iterate escaped the frozen window
            fe.build(q, q0.values);
            f_cur = objective(q);
        }
        Vec grad = fe.gradient(q) + 2.0 * inv_2tm * (q - q0.values);
        bool accepted = false;
        double s = step_size;
        for (int bt = 0; bt < 60; ++bt) {
            Vec trial = isotonic_projection(q - s * grad);
            if (!fe.covers(trial)) {
                fe.build(trial, q0.values);
                f_cur = objective(q);
            }
            const double f_trial = objective(trial);
            if (f_trial < f_cur) {
                const double decrease = f_cur - f_trial;
                q = trial;
                f_cur = f_trial;
                step_size = std::min(s * 1.3, 2.0 * tau * m);
                accepted = true;
                converged = decrease < opt.tol;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) {
            converged = true;  // stationary to line-search resolution
        }
    }
    if (!converged)
        throw evaluation_error("jko_step: no convergence in " + std::to_string(opt.max_iters) +
                               " iterations; objective gap per iteration still " +
                               std::to_string(step_size) + ", last objective " +
                               std::to_string(f_cur));

    // Certificate on the final grid.
    const double f_start = fe.value(q0.values);
    if (!(f_cur <= f_start + 1e-10 * (1.0 + std::abs(f_start))))
        throw evaluation_error("jko_step: objective failed to decrease; gap = " +
                               std::to_string(f_cur - f_start));

    JkoStepResult res;
    res.q.values = q;
    res.objective = f_cur;
    res.energy = fe.value(q);
    res.w2_increment = std::sqrt((q - q0.values).squaredNorm() / m);
    res.iterations = it;
    return res;
}

std::vector<JkoStepResult> jko_solve(const QuantileDiscretization& q0, double tau, int n_steps,
                                     const JkoEnergy& energy, const JkoOptions& opt) {
    std::vector<JkoStepResult> out;
    QuantileDiscretization cur = q0;
    for (int s = 0; s < n_steps; ++s) {
        out.push_back(jko_step(cur, tau, energy, opt));
        cur = out.back().q;
    }
    return out;
}

}  // namespace blob::ref
