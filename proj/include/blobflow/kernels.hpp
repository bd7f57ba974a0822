#pragma once

#include <limits>

#include "blobflow/common.hpp"

namespace blob {

enum class Family { poly_bump, exp_bracket, barenblatt };

/// One member of the kernel family zoo: a compactly supported polynomial bump
/// c (1-|x|^2)^k, an exponential-bracket profile exp(-<x>^p)/Z, or the
/// heavy-tailed profile c <x>^(-2 alpha).
struct KernelFamily {
    Family type = Family::poly_bump;
    int dim = 1;
    int k = 4;           // poly_bump exponent, >= 2
    int p = 1;           // exp_bracket exponent, 1 or 2
    double alpha = 2.5;  // barenblatt decay, 2*alpha > dim

    static KernelFamily poly_bump(int dim, int k = 4);
    static KernelFamily exp_bracket(int dim, int p);
    static KernelFamily barenblatt(int dim, double alpha);

    /// Default decay exponent for a fast-diffusion target m: 1 / (2(1-m)).
    static double barenblatt_alpha_for(double m) { return 1.0 / (2.0 * (1.0 - m)); }
};

/// Normalization constant c with integral of c * (unnormalized profile) = 1
/// over R^d, computed by panel quadrature with a certified tail bound.
double normalization_constant(const KernelFamily& family);

/// Mollifier V_eps(x) = eps^(-d) V_1(x / eps). Immutable after construction;
/// all member calls are pure and thread-safe.
class MollifierKernel {
public:
    MollifierKernel(const KernelFamily& family, double epsilon);

    const KernelFamily& family() const { return family_; }
    int dim() const { return family_.dim; }
    double epsilon() const { return eps_; }
    double norm_const() const { return norm_; }
    bool compact() const { return family_.type == Family::poly_bump; }

    /// eps for compact kernels, +inf otherwise.
    double support_radius() const {
        return compact() ? eps_ : std::numeric_limits<double>::infinity();
    }

    /// ||V_eps||_inf = V_eps(0); every family is radially decreasing.
    double sup_norm() const;
    double sup_norm_v1() const;

    // Radial fast path; r2 = |x|^2.
    double eval_r2(double r2) const;
    /// g with grad V_eps(x) = g(|x|^2) * x.
    double grad_factor_r2(double r2) const;

    double eval(const Eigen::Ref<const Vec>& x) const { return eval_r2(x.squaredNorm()); }
    Vec grad(const Eigen::Ref<const Vec>& x) const { return grad_factor_r2(x.squaredNorm()) * x; }
    double grad1(double x) const { return grad_factor_r2(x * x) * x; }

    /// q-th absolute moment of V_eps: eps^q * m_q(V_1). m_q(V_1) is evaluated
    /// by radial quadrature with a certified tail, so the eps-scaling identity
    /// holds exactly in floating point.
    double moment(double q) const;
    double moment_v1(double q) const;

    /// Integral of V_1 log V_1; the eps-rescaled kernel then satisfies
    /// int V_eps log V_eps = entropy_v1() - d log eps.
    double entropy_v1() const;

    /// Smallest R (bisected against a certified bound) with
    /// int_{|z|>R} |grad V_eps(z)| <z>^w dz < tol. Returns eps exactly for
    /// compact kernels.
    double truncation_radius(double weight_exponent, double tol) const;

private:
    KernelFamily family_;
    double eps_;
    double norm_;
};

}  // namespace blob
