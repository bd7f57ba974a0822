#include "blobflow/energy.hpp"

#include <cmath>

namespace blob::energy {

namespace {

double surface_factor(int d) { return d == 1 ? 2.0 : 2.0 * M_PI; }

enum class Functional { entropy, fast_power, h1 };

double xlogx(double u) { return u > 0.0 ? u * std::log(u) : 0.0; }

/// int N log N of a normalized lift density, by radial panel quadrature.
double lift_log_entropy(const MollifierKernel& lift) { return lift.entropy_v1(); }

/// int |grad sqrt(N)|^2 = int |grad N|^2 / (4 N), radial.
double lift_h1(const MollifierKernel& lift) {
    const int d = lift.dim();
    const double cut = lift.family().p == 1 ? 120.0 : 14.0;
    auto f = [&](double r) {
        const double v = lift.eval_r2(r * r);
        const double g = lift.grad_factor_r2(r * r) * r;
        return std::pow(r, d - 1.0) * g * g / (4.0 * v);
    };
    return surface_factor(d) * quad::panel_integral(f, 0.0, cut, 0.25, 12, 1.15);
}

struct HullInfo {
    Vec lo, hi;       // per-axis particle hull
    Vec center;       // hull box center
    double radius;    // max distance of a particle from the center
    double c_origin;  // |center| (the lift is centered at the origin)
};

HullInfo hull_of(const Mat& pos) {
    HullInfo h;
    h.lo = pos.colwise().minCoeff().transpose();
    h.hi = pos.colwise().maxCoeff().transpose();
    h.center = 0.5 * (h.lo + h.hi);
    h.radius = (pos.rowwise() - h.center.transpose()).rowwise().norm().maxCoeff();
    h.c_origin = h.center.norm();
    return h;
}

/// Pointwise bounds on the kernel part at distance rho from the hull center:
/// every particle sits within h.radius, and the profiles decrease radially.
double ub_kernel(const MixtureDensity& mix, const HullInfo& h, double rho) {
    const double s = std::max(0.0, rho - h.radius);
    return mix.kernel.eval_r2(s * s);
}
double lb_kernel(const MixtureDensity& mix, const HullInfo& h, double rho) {
    const double s = rho + h.radius;
    return mix.kernel.eval_r2(s * s) / mix.n();
}
double lift_lo(const MixtureDensity& mix, const HullInfo& h, double rho) {
    const double s = rho + h.c_origin;
    return mix.lift ? mix.lift->eval_r2(s * s) : 0.0;
}
double lift_hi(const MixtureDensity& mix, const HullInfo& h, double rho) {
    const double s = std::max(0.0, rho - h.c_origin);
    return mix.lift ? mix.lift->eval_r2(s * s) : 0.0;
}

/// Bound on the |dropped integrand| on the sphere of radius rho about the hull
/// center, surface factor included. For sigma > 0 this bounds the *difference*
/// integrand u log u - sigma N log(sigma N).
double dropped_bound(const MixtureDensity& mix, Functional kind, double m, const HullInfo& h,
                     double rho) {
    const int d = mix.dim();
    const double shell = surface_factor(d) * std::pow(rho, d - 1.0);
    const double ubv = ub_kernel(mix, h, rho);
    const double lbv = lb_kernel(mix, h, rho);
    switch (kind) {
        case Functional::entropy: {
            if (mix.sigma == 0.0) {
                const double w = std::max(std::abs(std::log(std::max(lbv, 1e-300))),
                                          std::abs(std::log(std::max(ubv, 1e-300))));
                return shell * ubv * w;
            }
            const double lo_tot = (1.0 - mix.sigma) * lbv + mix.sigma * lift_lo(mix, h, rho);
            const double hi_tot = (1.0 - mix.sigma) * ubv + mix.sigma * lift_hi(mix, h, rho);
            const double w = 2.0 + std::abs(std::log(std::max(lo_tot, 1e-300))) +
                             std::abs(std::log(std::max(hi_tot, 1e-300)));
            return shell * (1.0 - mix.sigma) * ubv * w;
        }
        case Functional::fast_power:
            return shell * std::pow(ubv, m) / (1.0 - m);
        case Functional::h1: {
            const double s = std::max(mix.kernel.epsilon(), rho - h.radius);
            const double gv = std::abs(mix.kernel.grad_factor_r2(s * s)) * s;
            double gn = 0.0, denom = (1.0 - mix.sigma) * lbv;
            if (mix.sigma > 0.0 && mix.lift) {
                const double sl = std::max(0.0, rho - h.c_origin);
                gn = mix.sigma * std::abs(mix.lift->grad_factor_r2(sl * sl)) * (rho + h.c_origin);
                denom = std::max(denom, mix.sigma * lift_lo(mix, h, rho));
            }
            const double num = (1.0 - mix.sigma) * gv + gn;
            return shell * num * num / (4.0 * std::max(denom, 1e-300));
        }
    }
    return 0.0;
}

/// Certified bound on the far-field integral beyond radius R from the hull
/// center: panel quadrature of dropped_bound up to a cut plus a remainder
/// whose decay is verified at run time.
double tail_bound(const MixtureDensity& mix, Functional kind, double m, const HullInfo& h,
                  double R) {
    const double eps = mix.kernel.epsilon();
    auto f = [&](double rho) { return dropped_bound(mix, kind, m, h, rho); };
    if (mix.kernel.family().type == Family::barenblatt) {
        const double r_cut = std::max({4.0 * R, 4.0 * (h.radius + h.c_origin + 1.0), 8.0 * eps});
        const double body = quad::panel_integral(f, R, r_cut, std::max(eps, R / 64.0), 12, 1.25);
        // Local decay exponent; for power-log tails it only grows outward, so
        // the power-law extrapolation overestimates the remainder.
        const double ratio = f(1.3 * r_cut) / std::max(f(r_cut), 1e-300);
        const double s_loc = -std::log(std::max(ratio, 1e-300)) / std::log(1.3);
        if (!(s_loc > 1.1)) throw evaluation_error("energy tail: integrand decays too slowly");
        const double rem = 2.0 * f(r_cut) * r_cut / (s_loc - 1.0);
        return body + rem;
    }
    // Exponential-type kernels (and lift): e-folding length is O(eps) for the
    // kernel part; verify the decay before trusting the remainder.
    const double r_cut = R + eps * 150.0 + 0.05 * R + 2.0;
    const double body = quad::panel_integral(f, R, r_cut, eps, 12, 1.2);
    const double decay = f(r_cut) / std::max(f(r_cut - 4.0 * eps), 1e-300);
    if (!(decay < 0.6)) throw evaluation_error("energy tail: integrand decays too slowly");
    const double rem = f(r_cut) * 16.0 * eps;
    return body + rem;
}

/// Smallest pad (distance beyond the hull ball) whose dropped far field is
/// certified below tol.
double tail_pad(const MixtureDensity& mix, Functional kind, double m, const HullInfo& h,
                double tol) {
    const double eps = mix.kernel.epsilon();
    double R = h.radius + 2.0 * eps + h.c_origin + 1.0;
    while (tail_bound(mix, kind, m, h, R) >= tol) {
        R = h.radius + (R - h.radius) * 1.6;
        if (R > 1e8) throw evaluation_error("energy tail: cannot reach tolerance");
    }
    double lo = h.radius + 1e-6, hi = R;
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tail_bound(mix, kind, m, h, mid) < tol ? hi : lo) = mid;
    }
    return hi - h.radius;
}

quad::QuadratureRule axis_grid(double lo, double hi, double pad_core, double pad_tail,
                               double panel, int nodes, double grade) {
    quad::LineGridSpec spec;
    spec.core_lo = lo - pad_core;
    spec.core_hi = hi + pad_core;
    spec.lo = lo - pad_tail;
    spec.hi = hi + pad_tail;
    spec.panel_width = panel;
    spec.nodes_per_panel = nodes;
    spec.grade = grade;
    return quad::composite_line(spec);
}

/// Node integrand for the grid part of each functional (the analytic lift
/// parts are added by the caller).
double node_value(const MixtureDensity& mix, Functional kind, double m,
                  const Eigen::Ref<const Vec>& y) {
    const double sig = mix.sigma;
    switch (kind) {
        case Functional::entropy: {
            const double uv = mix.kernel_part(y);
            if (sig == 0.0) return xlogx(uv);
            const double nl = mix.lift->eval(y);
            return xlogx((1.0 - sig) * uv + sig * nl) - xlogx(sig * nl);
        }
        case Functional::fast_power: {
            const double uv = mix.kernel_part(y);
            return -std::pow(uv, m) / (1.0 - m);
        }
        case Functional::h1: {
            Vec g = (1.0 - sig) * mix.kernel_part_grad(y);
            double total = (1.0 - sig) * mix.kernel_part(y);
            if (sig > 0.0) {
                g += sig * mix.lift->grad(y);
                total += sig * mix.lift->eval(y);
            }
            if (total <= 0.0) return 0.0;
            double base = g.squaredNorm() / (4.0 * total);
            if (sig > 0.0) {
                const double nl = mix.lift->eval(y);
                const Vec gn = mix.lift->grad(y);
                base -= sig * gn.squaredNorm() / (4.0 * nl);
            }
            return base;
        }
    }
    return 0.0;
}

double integrate_functional(const MixtureDensity& mix, Functional kind, double m,
                            const EnergyQuadOptions& opt) {
    const int d = mix.dim();
    const auto& ker = mix.kernel;
    const double eps = ker.epsilon();
    const HullInfo h = hull_of(mix.positions);
    const double panel = eps / opt.panels_per_eps;

    // Per-axis pads so the grid box contains the certified ball.
    Vec pad_tail = Vec::Constant(d, eps), pad_core = Vec::Constant(d, eps);
    if (!ker.compact()) {
        const double r_ball = h.radius + tail_pad(mix, kind, m, h, opt.tail_tol);
        for (int a = 0; a < d; ++a) {
            const double half_width = 0.5 * (h.hi(a) - h.lo(a));
            pad_tail(a) = std::max(r_ball - half_width, 2.0 * eps);
            pad_core(a) = ker.family().type == Family::barenblatt ? std::min(pad_tail(a), 8.0 * eps)
                                                                  : pad_tail(a);
        }
    }

    // Single centered bump with no lift: the integrand is radial about the
    // particle; a 1-D graded rule gives near machine accuracy at any eps.
    if (mix.n() == 1 && mix.sigma == 0.0) {
        auto f = [&](double r) {
            const double v = ker.eval_r2(r * r);
            double val = 0.0;
            if (kind == Functional::entropy) {
                val = xlogx(v);
            } else if (kind == Functional::fast_power) {
                val = -std::pow(v, m) / (1.0 - m);
            } else {
                const double g = ker.grad_factor_r2(r * r) * r;
                val = v > 0.0 ? g * g / (4.0 * v) : 0.0;
            }
            return std::pow(r, d - 1.0) * val;
        };
        const double r_end = ker.compact() ? eps : pad_tail(0) + 0.5 * (h.hi - h.lo).maxCoeff();
        return surface_factor(d) *
               quad::panel_integral(f, 0.0, r_end, panel, opt.nodes_per_panel, opt.grade);
    }

    double total = 0.0;
    if (d == 1) {
        const auto grid = axis_grid(h.lo(0), h.hi(0), pad_core(0), pad_tail(0), panel,
                                    opt.nodes_per_panel, opt.grade);
        Vec y(1);
        for (Eigen::Index i = 0; i < grid.size(); ++i) {
            y(0) = grid.nodes(i, 0);
            total += grid.weights(i) * node_value(mix, kind, m, y);
        }
    } else {
        const auto gx = axis_grid(h.lo(0), h.hi(0), pad_core(0), pad_tail(0), panel,
                                  opt.nodes_per_panel, opt.grade);
        const auto gy = axis_grid(h.lo(1), h.hi(1), pad_core(1), pad_tail(1), panel,
                                  opt.nodes_per_panel, opt.grade);
        Vec y(2);
        for (Eigen::Index i = 0; i < gx.size(); ++i) {
            double row = 0.0;
            y(0) = gx.nodes(i, 0);
            for (Eigen::Index j = 0; j < gy.size(); ++j) {
                y(1) = gy.nodes(j, 0);
                row += gy.weights(j) * node_value(mix, kind, m, y);
            }
            total += gx.weights(i) * row;
        }
    }
    if (!std::isfinite(total)) throw evaluation_error("energy quadrature produced a non-finite value");
    return total;
}

}  // namespace

MixtureDensity::MixtureDensity(Mat pos, MollifierKernel ker, double sig,
                               std::optional<MollifierKernel> lift_density)
    : positions(std::move(pos)), kernel(std::move(ker)), sigma(sig), lift(std::move(lift_density)) {
    if (positions.rows() < 1) throw invalid_parameter("mixture: need at least one particle");
    if (positions.cols() != kernel.dim()) throw invalid_parameter("mixture: dimension mismatch");
    if (!(sigma >= 0.0 && sigma < 1.0)) throw invalid_parameter("mixture: need sigma in [0,1)");
    if (sigma > 0.0) {
        if (!lift) throw invalid_parameter("mixture: sigma > 0 requires a lift density");
        if (lift->family().type != Family::exp_bracket || lift->dim() != kernel.dim())
            throw invalid_parameter("mixture: lift must be an exp-bracket density of matching dimension");
    }
}

double MixtureDensity::kernel_part(const Eigen::Ref<const Vec>& y) const {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < positions.rows(); ++j)
        sum += kernel.eval_r2((y - positions.row(j).transpose()).squaredNorm());
    return sum / static_cast<double>(positions.rows());
}

Vec MixtureDensity::kernel_part_grad(const Eigen::Ref<const Vec>& y) const {
    Vec g = Vec::Zero(dim());
    for (Eigen::Index j = 0; j < positions.rows(); ++j) {
        const Vec z = y - positions.row(j).transpose();
        g += kernel.grad_factor_r2(z.squaredNorm()) * z;
    }
    return g / static_cast<double>(positions.rows());
}

double mixture_eval(const MixtureDensity& mix, const Eigen::Ref<const Vec>& y) {
    double v = (1.0 - mix.sigma) * mix.kernel_part(y);
    if (mix.sigma > 0.0) v += mix.sigma * mix.lift->eval(y);
    return v;
}

double entropy_regularized(const MixtureDensity& mix, const EnergyQuadOptions& opt) {
    double val = integrate_functional(mix, Functional::entropy, 1.0, opt);
    if (mix.sigma > 0.0) val += mix.sigma * (std::log(mix.sigma) + lift_log_entropy(*mix.lift));
    return val;
}

double fast_energy(const MixtureDensity& mix, double m, const EnergyQuadOptions& opt) {
    const int d = mix.dim();
    if (!(m > double(d) / (d + 2) && m < 1.0))
        throw invalid_parameter("fast_energy: need m in (d/(d+2), 1)");
    if (mix.sigma != 0.0) throw invalid_parameter("fast_energy: sigma = 0 required");
    if (mix.kernel.compact()) throw invalid_parameter("fast_energy: globally supported kernel required");
    if (mix.kernel.family().type == Family::barenblatt &&
        !(mix.kernel.family().alpha > 0.5 * d + 1.0 / m))
        throw invalid_parameter("fast_energy: need alpha > d/2 + 1/m");
    return integrate_functional(mix, Functional::fast_power, m, opt);
}

double h1_seminorm(const MixtureDensity& mix, const EnergyQuadOptions& opt) {
    double val = integrate_functional(mix, Functional::h1, 1.0, opt);
    if (mix.sigma > 0.0) val += mix.sigma * lift_h1(*mix.lift);
    return val;
}

double lambda_constant(const ProblemSpec& spec, double R0, double R1) {
    if (!(R0 > 0.0 && R1 > 0.0)) throw invalid_parameter("lambda_constant: need R0, R1 > 0");
    const double eps = spec.kernel.epsilon();
    const int d = spec.kernel.dim();
    const double size = 1.0 + R0 + R1;
    if (spec.is_heat()) {
        const double sig = spec.sigma();
        if (sig > 0.0) {
            const double c_es = std::abs(std::log(sig)) + d * std::abs(std::log(eps)) +
                                std::log(spec.kernel.sup_norm_v1());
            return -c_es * (1.0 - sig) * size / (eps * eps);
        }
        return -spec.c_lambda * size / (eps * eps * eps);
    }
    return -spec.c_lambda * size / (eps * eps * eps);
}

double second_moment(const Eigen::Ref<const Mat>& positions) {
    return positions.rowwise().squaredNorm().mean();
}

double support_radius(const Eigen::Ref<const Mat>& positions) {
    return std::sqrt(positions.rowwise().squaredNorm().maxCoeff());
}

}  // namespace blob::energy
