#include "blobflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace blob::metrics {

namespace {

std::vector<double> sorted_copy(const Eigen::Ref<const Vec>& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

double w2_1d(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b) {
    if (a.size() != b.size() || a.size() == 0)
        throw invalid_parameter("w2_1d: need equal positive sizes");
    const auto sa = sorted_copy(a), sb = sorted_copy(b);
    double s = 0.0;
    for (size_t j = 0; j < sa.size(); ++j) {
        const double d = sa[j] - sb[j];
        s += d * d;
    }
    return std::sqrt(s / sa.size());
}

double w1_1d(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b) {
    if (a.size() != b.size() || a.size() == 0)
        throw invalid_parameter("w1_1d: need equal positive sizes");
    const auto sa = sorted_copy(a), sb = sorted_copy(b);
    double s = 0.0;
    for (size_t j = 0; j < sa.size(); ++j) s += std::abs(sa[j] - sb[j]);
    return s / sa.size();
}

double w1_density_1d(const ParticleState& state, const ref::GridDensity1D& density) {
    if (state.dim() != 1) throw invalid_parameter("w1_density_1d: d = 1 only");
    const auto xs = sorted_copy(state.positions.col(0));
    const double lo = std::min(density.lo(), xs.front());
    const double hi = std::max(density.hi(), xs.back());
    const int n = 4096;
    const double h = (hi - lo) / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double y = lo + (i + 0.5) * h;
        const double f_particles =
            (std::upper_bound(xs.begin(), xs.end(), y) - xs.begin()) / double(xs.size());
        acc += std::abs(f_particles - density.cdf(y)) * h;
    }
    return acc;
}

ParticleDensityError w2_particles_vs_density_1d(const ParticleState& state,
                                                const ref::GridDensity1D& density) {
    if (state.dim() != 1) throw invalid_parameter("w2_particles_vs_density_1d: d = 1 only");
    const int n = state.n();
    const ParticleState qn = ref::quantize(density, n);
    const ParticleState q2n = ref::quantize(density, 2 * n);
    ParticleDensityError out;
    out.error = w2_1d(state.positions.col(0), qn.positions.col(0));
    double s = 0.0;
    for (int k = 0; k < 2 * n; ++k) {
        const double d = qn.positions(k / 2, 0) - q2n.positions(k, 0);
        s += d * d;
    }
    out.floor = std::sqrt(s / (2 * n));
    return out;
}

CommutatorResult commutator_norm(const ParticleState& state, const MollifierKernel& kernel,
                                 const std::function<double(double)>& grad_phi, double d2phi_sup,
                                 const CommutatorOptions& opt) {
    if (state.dim() != 1) throw invalid_parameter("commutator_norm: d = 1 only");
    const int n = state.n();
    const double eps = kernel.epsilon();
    const double hull_lo = state.positions.col(0).minCoeff();
    const double hull_hi = state.positions.col(0).maxCoeff();
    double lo = hull_lo - opt.pad_eps_multiple * eps;
    double hi = hull_hi + opt.pad_eps_multiple * eps;
    if (opt.lo < opt.hi) {
        if (opt.lo > hull_lo - eps || opt.hi < hull_hi + eps)
            throw invalid_parameter("commutator_norm: grid does not cover the effective support");
        lo = opt.lo;
        hi = opt.hi;
    }
    const double h = (hi - lo) / opt.nodes;
    double acc = 0.0;
    for (int i = 0; i < opt.nodes; ++i) {
        const double y = lo + (i + 0.5) * h;
        double conv = 0.0, conv_phi = 0.0;
        for (int j = 0; j < n; ++j) {
            const double xj = state.positions(j, 0);
            const double v = kernel.eval_r2((y - xj) * (y - xj));
            conv += v;
            conv_phi += v * grad_phi(xj);
        }
        conv /= n;
        conv_phi /= n;
        if (conv > 0.0) {
            const double c = conv_phi - grad_phi(y) * conv;
            acc += h * c * c / conv;
        }
    }
    CommutatorResult res;
    res.norm = std::sqrt(acc);
    res.ratio_to_eps = res.norm / (eps * d2phi_sup);
    return res;
}

namespace {

double bracket_pow(double r2, double p) { return std::pow(std::sqrt(1.0 + r2), p); }

/// Random mollified ensemble: N points in [-2, 2]^d with the given kernel.
Mat random_ensemble(std::mt19937_64& rng, int dim, int n) {
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    Mat pos(n, dim);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < dim; ++a) pos(i, a) = unif(rng);
    return pos;
}

double mixture_at(const Mat& pos, const MollifierKernel& ker, const Vec& x) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < pos.rows(); ++j)
        s += ker.eval_r2((x - pos.row(j).transpose()).squaredNorm());
    return s / pos.rows();
}

/// Smallest radius holding at least half the atoms.
double half_mass_radius(const Mat& pos) {
    std::vector<double> r(pos.rows());
    for (Eigen::Index i = 0; i < pos.rows(); ++i) r[i] = pos.row(i).norm();
    std::sort(r.begin(), r.end());
    return r[(r.size()) / 2];
}

}  // namespace

GrowthCheckResult growth_bound_check(GrowthLemma kind, const GrowthParams& params, int samples) {
    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> unif01(0.0, 1.0);
    GrowthCheckResult res;
    res.max_ratio = 0.0;

    switch (kind) {
        case GrowthLemma::peetre: {
            std::uniform_real_distribution<double> coord(-5.0, 5.0);
            for (int s = 0; s < samples; ++s) {
                Vec x(params.dim), y(params.dim);
                for (int a = 0; a < params.dim; ++a) {
                    x(a) = coord(rng);
                    y(a) = coord(rng);
                }
                const double p = coord(rng);
                const double lhs = std::pow(bracket(x) / bracket(y), p);
                const double rhs =
                    std::pow(2.0, 0.5 * std::abs(p)) * std::pow(bracket(Vec(x - y)), std::abs(p));
                res.max_ratio = std::max(res.max_ratio, lhs / rhs);
            }
            res.constant_used = 1.0;
            res.pass = res.max_ratio <= 1.0 + 1e-9;
            return res;
        }
        case GrowthLemma::log_gauss: {
            // |log((1-s) rho + s exp(-<x>^p))| <= C <x>^p with the proof's
            // explicit C = max(|log((1-s)||rho||_inf + s)|, 1 + |log s|).
            const double sig = params.sigma;
            const MollifierKernel ker(KernelFamily::exp_bracket(params.dim, 1), 0.35);
            const double c1 = std::log((1.0 - sig) * ker.sup_norm() + sig);
            const double c = std::max(std::abs(c1), 1.0 + std::abs(std::log(sig)));
            std::uniform_real_distribution<double> coord(-20.0, 20.0);
            Mat pos = random_ensemble(rng, params.dim, 8);
            for (int s = 0; s < samples; ++s) {
                if (s % 128 == 0) pos = random_ensemble(rng, params.dim, 4 + int(unif01(rng) * 12));
                Vec x(params.dim);
                for (int a = 0; a < params.dim; ++a) x(a) = coord(rng);
                const double rho = mixture_at(pos, ker, x);
                const double lift = std::exp(-bracket_pow(x.squaredNorm(), params.p));
                const double lhs = std::abs(std::log((1.0 - sig) * rho + sig * lift));
                const double rhs = c * bracket_pow(x.squaredNorm(), params.p);
                res.max_ratio = std::max(res.max_ratio, lhs / rhs);
            }
            res.constant_used = c;
            res.pass = res.max_ratio <= 1.0 + 1e-9;
            return res;
        }
        case GrowthLemma::log_global:
        case GrowthLemma::fast_power: {
            const bool fast = kind == GrowthLemma::fast_power;
            const KernelFamily fam = fast ? KernelFamily::barenblatt(params.dim, params.alpha)
                                          : KernelFamily::exp_bracket(params.dim, params.p);
            const MollifierKernel ker(fam, params.eps);
            const double expo = fast ? 2.0 * params.alpha * (1.0 - params.m) : double(params.p);
            std::uniform_real_distribution<double> coord(-25.0, 25.0);
            Mat pos = random_ensemble(rng, params.dim, 8);
            double r_half = half_mass_radius(pos);
            for (int s = 0; s < samples; ++s) {
                if (s % 128 == 0) {
                    pos = random_ensemble(rng, params.dim, 4 + int(unif01(rng) * 12));
                    r_half = half_mass_radius(pos);
                }
                Vec x(params.dim);
                for (int a = 0; a < params.dim; ++a) x(a) = coord(rng);
                const double u = mixture_at(pos, ker, x);
                const double lhs = fast ? std::pow(u, params.m - 1.0) : std::abs(std::log(u));
                const double rhs = std::pow(bracket(x) / params.eps, expo) * (1.0 + r_half);
                res.max_ratio = std::max(res.max_ratio, lhs / rhs);
            }
            res.constant_used = params.bound_constant;
            res.pass = params.bound_constant <= 0.0 ||
                       res.max_ratio <= params.bound_constant * (1.0 + 1e-9);
            return res;
        }
    }
    throw invalid_parameter("growth_bound_check: unknown lemma");
}

RateFit rate_fit(const ErrorSeries& series) {
    const size_t n = series.parameter.size();
    if (n < 3 || series.error.size() != n)
        throw invalid_parameter("rate_fit: need >= 3 matched points");
    for (size_t i = 0; i < n; ++i) {
        if (!(series.parameter[i] > 0.0) || !(series.error[i] > 0.0))
            throw invalid_parameter("rate_fit: parameters and errors must be positive");
        if (i > 0 && series.parameter[i] == series.parameter[i - 1])
            throw invalid_parameter("rate_fit: parameters must be distinct");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double x = std::log(series.parameter[i]);
        const double y = std::log(series.error[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    RateFit fit;
    const double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    const double corr_den = std::sqrt(denom * (n * syy - sy * sy));
    fit.r2 = corr_den > 0.0 ? std::pow((n * sxy - sx * sy) / corr_den, 2) : 1.0;
    return fit;
}

}  // namespace blob::metrics
