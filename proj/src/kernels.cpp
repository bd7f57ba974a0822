#include "blobflow/kernels.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>

#include "blobflow/quadrature.hpp"

namespace blob {

namespace {

double surface_factor(int d) { return d == 1 ? 2.0 : 2.0 * M_PI; }

// Radial panel quadrature of f(r) r^(d-1) over [0, r_end]: uniform panels on
// the unit core, geometrically graded beyond.
double radial_integral(const std::function<double(double)>& f, int d, double r_end,
                       double core = 1.0, double panel = 0.125, int nodes = 14) {
    quad::LineGridSpec spec;
    spec.lo = 0.0;
    spec.hi = r_end;
    spec.core_lo = 0.0;
    spec.core_hi = std::min(core, r_end);
    spec.panel_width = panel;
    spec.nodes_per_panel = nodes;
    spec.grade = 1.25;
    const quad::QuadratureRule rule = quad::composite_line(spec);
    return surface_factor(d) *
           quad::integrate1(rule, [&](double r) { return f(r) * (d == 1 ? 1.0 : r); });
}

// Panels halving toward the endpoint b; resolves integrable endpoint
// singularities such as (1-r^2)^k log(1-r^2).
double dyadic_integral_toward(const std::function<double(double)>& f, double a, double b,
                              int levels = 48, int nodes = 12) {
    const quad::QuadratureRule unit = quad::gauss_legendre(nodes, -1.0, 1.0);
    double sum = 0.0;
    double left = a;
    for (int j = 0; j < levels; ++j) {
        const double right = b - (b - a) * std::pow(0.5, j + 1);
        const double mid = 0.5 * (left + right), half_len = 0.5 * (right - left);
        if (half_len <= 0.0) break;
        for (Eigen::Index i = 0; i < unit.size(); ++i)
            sum += half_len * unit.weights(i) * f(mid + half_len * unit.nodes(i, 0));
        left = right;
    }
    return sum;
}

// Cut radius for exp(-<r>^p) profiles past which remaining integrals with
// polynomial weights of degree <= a are below 1e-30.
double exp_cut_radius(int p, double a) {
    return p == 1 ? std::max(90.0, 4.0 * (a + 1.0)) : std::max(12.0, 2.0 * std::sqrt(a + 1.0));
}

void check_family(const KernelFamily& f) {
    if (f.dim < 1 || f.dim > 2) throw invalid_parameter("kernel: dim must be 1 or 2");
    if (f.type == Family::poly_bump && f.k < 2) throw invalid_parameter("poly_bump: need k >= 2");
    if (f.type == Family::exp_bracket && f.p != 1 && f.p != 2)
        throw invalid_parameter("exp_bracket: p must be 1 or 2");
    if (f.type == Family::barenblatt && !(2.0 * f.alpha > f.dim))
        throw invalid_parameter("barenblatt: non-integrable profile, need 2 alpha > d");
}

double unnormalized_mass(const KernelFamily& f) {
    check_family(f);
    switch (f.type) {
        case Family::poly_bump:
            return radial_integral([&](double r) { return std::pow(1.0 - r * r, f.k); }, f.dim, 1.0);
        case Family::exp_bracket: {
            const double cut = exp_cut_radius(f.p, f.dim - 1);
            return radial_integral([&](double r) { return std::exp(-std::pow(bracket(r), f.p)); },
                                   f.dim, cut);
        }
        case Family::barenblatt: {
            // Tail of r^(d-1) <r>^(-2a) beyond the cut is below cut^(d-2a)/(2a-d);
            // the cut is sized so this sits under 1e-15 of the mass.
            const double decay = 2.0 * f.alpha - f.dim;
            const double cut = std::max(100.0, std::pow(decay * 1e16, 1.0 / decay));
            return radial_integral([&](double r) { return std::pow(1.0 + r * r, -f.alpha); },
                                   f.dim, cut);
        }
    }
    throw invalid_parameter("unknown kernel family");
}

}  // namespace

KernelFamily KernelFamily::poly_bump(int dim, int k) {
    if (dim < 1 || dim > 2) throw invalid_parameter("kernel: dim must be 1 or 2");
    if (k < 2) throw invalid_parameter("poly_bump: need k >= 2 for C^2 regularity");
    KernelFamily f;
    f.type = Family::poly_bump;
    f.dim = dim;
    f.k = k;
    return f;
}

KernelFamily KernelFamily::exp_bracket(int dim, int p) {
    if (dim < 1 || dim > 2) throw invalid_parameter("kernel: dim must be 1 or 2");
    if (p != 1 && p != 2) throw invalid_parameter("exp_bracket: p must be 1 or 2");
    KernelFamily f;
    f.type = Family::exp_bracket;
    f.dim = dim;
    f.p = p;
    return f;
}

KernelFamily KernelFamily::barenblatt(int dim, double alpha) {
    if (dim < 1 || dim > 2) throw invalid_parameter("kernel: dim must be 1 or 2");
    if (!(2.0 * alpha > dim)) throw invalid_parameter("barenblatt: non-integrable profile, need 2 alpha > d");
    KernelFamily f;
    f.type = Family::barenblatt;
    f.dim = dim;
    f.alpha = alpha;
    return f;
}

double normalization_constant(const KernelFamily& family) {
    return 1.0 / unnormalized_mass(family);
}

MollifierKernel::MollifierKernel(const KernelFamily& family, double epsilon)
    : family_(family), eps_(epsilon), norm_(normalization_constant(family)) {
    if (!(epsilon > 0.0)) throw invalid_parameter("kernel: need epsilon > 0");
}

double MollifierKernel::sup_norm_v1() const {
    switch (family_.type) {
        case Family::poly_bump:
            return norm_;
        case Family::exp_bracket:
            return norm_ * std::exp(-1.0);
        case Family::barenblatt:
            return norm_;
    }
    return norm_;
}

double MollifierKernel::sup_norm() const {
    return std::pow(eps_, -family_.dim) * sup_norm_v1();
}

double MollifierKernel::eval_r2(double r2) const {
    const double s = r2 / (eps_ * eps_);
    const double scale = std::pow(eps_, -family_.dim);
    switch (family_.type) {
        case Family::poly_bump:
            return s >= 1.0 ? 0.0 : scale * norm_ * std::pow(1.0 - s, family_.k);
        case Family::exp_bracket:
            return scale * norm_ * std::exp(-std::pow(std::sqrt(1.0 + s), family_.p));
        case Family::barenblatt:
            return scale * norm_ * std::pow(1.0 + s, -family_.alpha);
    }
    return 0.0;
}

double MollifierKernel::grad_factor_r2(double r2) const {
    const double inv_e2 = 1.0 / (eps_ * eps_);
    const double s = r2 * inv_e2;
    const double scale = std::pow(eps_, -family_.dim);
    switch (family_.type) {
        case Family::poly_bump:
            return s >= 1.0 ? 0.0
                            : -2.0 * family_.k * norm_ * scale * inv_e2 * std::pow(1.0 - s, family_.k - 1);
        case Family::exp_bracket: {
            const double t = std::sqrt(1.0 + s);
            const double val = scale * norm_ * std::exp(-std::pow(t, family_.p));
            return family_.p == 1 ? -val * inv_e2 / t : -2.0 * val * inv_e2;
        }
        case Family::barenblatt:
            return -2.0 * family_.alpha * scale * norm_ * inv_e2 * std::pow(1.0 + s, -family_.alpha - 1.0);
    }
    return 0.0;
}

double MollifierKernel::moment_v1(double q) const {
    if (q < 0.0) throw invalid_parameter("moment: need q >= 0");
    const int d = family_.dim;
    switch (family_.type) {
        case Family::poly_bump:
            return norm_ * radial_integral(
                               [&](double r) { return std::pow(r, q) * std::pow(1.0 - r * r, family_.k); },
                               d, 1.0, 1.0, 0.0625, 16);
        case Family::exp_bracket: {
            const double cut = exp_cut_radius(family_.p, q + d - 1.0);
            return norm_ * radial_integral(
                               [&](double r) {
                                   return std::pow(r, q) * std::exp(-std::pow(bracket(r), family_.p));
                               },
                               d, cut);
        }
        case Family::barenblatt: {
            const double decay = 2.0 * family_.alpha - d - q;
            if (!(decay > 0.0)) throw invalid_parameter("moment: divergent, need q < 2 alpha - d");
            const double cut = std::max(100.0, std::pow(decay * 1e15, 1.0 / decay));
            return norm_ * radial_integral(
                               [&](double r) { return std::pow(r, q) * std::pow(1.0 + r * r, -family_.alpha); },
                               d, cut);
        }
    }
    return 0.0;
}

double MollifierKernel::moment(double q) const { return std::pow(eps_, q) * moment_v1(q); }

double MollifierKernel::entropy_v1() const {
    const int d = family_.dim;
    const double c = norm_;
    switch (family_.type) {
        case Family::poly_bump: {
            // c (1-r^2)^k [log c + k log(1-r^2)]; log-singular at r = 1.
            auto f = [&](double r) {
                const double t = 1.0 - r * r;
                const double v = c * std::pow(t, family_.k);
                return (d == 1 ? 1.0 : r) * v * (std::log(c) + family_.k * std::log(t));
            };
            return surface_factor(d) * dyadic_integral_toward(f, 0.0, 1.0);
        }
        case Family::exp_bracket: {
            const double cut = exp_cut_radius(family_.p, d);
            return radial_integral(
                [&](double r) {
                    const double e = std::pow(bracket(r), family_.p);
                    return c * std::exp(-e) * (std::log(c) - e);
                },
                d, cut);
        }
        case Family::barenblatt: {
            const double a = family_.alpha;
            const double decay = 2.0 * a - d;
            const double cut = std::max(100.0, std::pow(decay * 1e14, 1.0 / decay));
            return radial_integral(
                [&](double r) {
                    const double lb = std::log1p(r * r);
                    return c * std::exp(-a * lb) * (std::log(c) - a * lb);
                },
                d, cut);
        }
    }
    return 0.0;
}

namespace {

// Certified upper bound of int_{|z|>R} |grad V_eps(z)| <z>^w dz: radial
// quadrature on [R, R_cut] of the pointwise gradient bound plus an analytic
// remainder beyond R_cut.
double grad_tail_bound(const KernelFamily& fam, double norm, double eps, double w, double R) {
    const int d = fam.dim;
    const double scale = std::pow(eps, -d - 1.0);
    const double sphere = surface_factor(d);
    if (fam.type == Family::exp_bracket) {
        auto bound = [&](double r) {
            const double bu = bracket(r / eps);
            return sphere * std::pow(r, d - 1.0) * scale * norm * fam.p *
                   std::pow(bu, fam.p - 1.0) * std::exp(-std::pow(bu, fam.p)) *
                   std::pow(bracket(r), w);
        };
        const double r_cut = R + eps * (fam.p == 1 ? 90.0 + 8.0 * (w + d) : 14.0 + 2.0 * std::sqrt(w + d));
        const double body = quad::panel_integral(bound, R, r_cut, eps);
        // Beyond r_cut the bound decays at least like exp(-(r - r_cut)/(2 eps)).
        const double rem = bound(r_cut) * 4.0 * eps;
        return body + rem;
    }
    if (fam.type == Family::barenblatt) {
        // |grad V_1(u)| <= 2 alpha c <u>^(-2 alpha - 1).
        const double a = fam.alpha;
        const double expo = d - 1.0 + w - (2.0 * a + 1.0);  // integrand power of r for r >= 1
        if (!(expo < -1.0)) throw invalid_parameter("truncation_radius: divergent weighted integral");
        auto bound = [&](double r) {
            const double u = r / eps;
            return sphere * std::pow(r, d - 1.0) * scale * 2.0 * a * norm *
                   std::pow(bracket(u), -2.0 * a - 1.0) * std::pow(bracket(r), w);
        };
        const double r_cut = std::max({R * 4.0, 4.0, 4.0 * eps});
        const double body = quad::panel_integral(bound, R, r_cut, std::max(eps, R / 64.0 + 1e-12));
        // <u> >= u = r/eps and <r> <= sqrt(2) r for r >= 1.
        const double coef = sphere * scale * 2.0 * a * norm * std::pow(eps, 2.0 * a + 1.0) *
                            std::pow(2.0, 0.5 * w);
        const double rem = coef * std::pow(r_cut, expo + 1.0) / (-expo - 1.0);
        return body + rem;
    }
    return 0.0;
}

}  // namespace

double MollifierKernel::truncation_radius(double weight_exponent, double tol) const {
    if (!(tol > 0.0)) throw invalid_parameter("truncation_radius: need tol > 0");
    if (compact()) return eps_;
    if (family_.type == Family::barenblatt &&
        !(weight_exponent < 2.0 * family_.alpha + 1.0 - family_.dim))
        throw invalid_parameter("truncation_radius: divergent weighted integral");

    // Kernels are immutable, so the bisection result can be memoized across
    // the per-step velocity evaluations that share one kernel.
    using Key = std::array<double, 8>;
    static std::mutex memo_mutex;
    static std::map<Key, double> memo;
    const Key key{double(static_cast<int>(family_.type)), double(family_.dim), double(family_.k),
                  double(family_.p), family_.alpha, eps_, weight_exponent, tol};
    {
        std::lock_guard<std::mutex> lock(memo_mutex);
        if (const auto it = memo.find(key); it != memo.end()) return it->second;
    }

    auto tail = [&](double R) { return grad_tail_bound(family_, norm_, eps_, weight_exponent, R); };

    double lo = 1e-3 * eps_, hi = eps_;
    while (tail(hi) >= tol) {
        hi *= 2.0;
        if (hi > 1e9) throw evaluation_error("truncation_radius: tail does not reach tolerance");
    }
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tail(mid) < tol ? hi : lo) = mid;
    }
    {
        std::lock_guard<std::mutex> lock(memo_mutex);
        memo.emplace(key, hi);
    }
    return hi;
}

}  // namespace blob
