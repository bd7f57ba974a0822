#pragma once

#include <optional>
#include <vector>

#include "blobflow/energy.hpp"
#include "blobflow/state.hpp"

namespace blob::ref {

/// Heat kernel solution: centered product Gaussian with per-axis variance
/// s0^2 + 2t.
double heat_exact(double s0, double t, const Eigen::Ref<const Vec>& x);
double heat_exact_1d(double s0, double t, double x);

/// Ornstein-Uhlenbeck density for the quadratic confinement |x|^2/2 (d = 1):
/// mean mu0 e^(-t), variance 1 + (s0^2 - 1) e^(-2t).
double ou_exact(double mu0, double s0, double t, double x);

/// Mass constant C making the self-similar fast-diffusion profile a unit-mass
/// density; closed form through Gamma functions.
double barenblatt_mass_const(double m, int d);

/// rho(t, x) = t^(-a) (C + k |x t^(-a/d)|^2)^(-1/(1-m)),
/// a = d/(d(m-1)+2), k = (1-m) a / (2 d m).
double barenblatt_fast(double m, int d, double t, double mass_const,
                       const Eigen::Ref<const Vec>& x);
double barenblatt_fast_1d(double m, double t, double mass_const, double x);

/// Probability density sampled on a uniform 1-D grid of cell centers;
/// piecewise constant on cells, h * sum(values) = 1 after normalize().
struct GridDensity1D {
    Vec x;       // cell centers, uniform spacing
    Vec values;  // nonnegative
    double h = 0.0;

    static GridDensity1D from_function(const std::function<double(double)>& f, double lo,
                                       double hi, int n);
    void normalize();
    double mass() const { return h * values.sum(); }
    double lo() const { return x(0) - 0.5 * h; }
    double hi() const { return x(x.size() - 1) + 0.5 * h; }

    /// Inverse CDF of the piecewise-constant density.
    double quantile(double p) const;
    /// CDF at a point.
    double cdf(double y) const;
};

/// Equal-mass quantization: N particles at the (j - 1/2)/N quantiles.
ParticleState quantize(const GridDensity1D& density, int n);

/// 1-D probability measure as M equal-mass atoms at nondecreasing positions.
struct QuantileDiscretization {
    Vec values;

    int size() const { return static_cast<int>(values.size()); }
    bool nondecreasing() const {
        for (Eigen::Index j = 1; j < values.size(); ++j)
            if (values(j) < values(j - 1)) return false;
        return true;
    }
};

/// Euclidean projection onto the nondecreasing cone (pool adjacent violators,
/// uniform weights).
Vec isotonic_projection(const Eigen::Ref<const Vec>& v);

enum class JkoEnergyKind { entropy_sigma, entropy, fast, zero };

/// Energy handle evaluated on M-atom empirical measures. `zero` exists for
/// the pure proximal identity.
struct JkoEnergy {
    JkoEnergyKind kind = JkoEnergyKind::entropy_sigma;
    std::optional<MollifierKernel> kernel;
    std::optional<MollifierKernel> lift;
    double sigma = 0.0;
    double m = 0.8;
    energy::EnergyQuadOptions quad;

    static JkoEnergy entropy_with_lift(MollifierKernel ker, double sig, MollifierKernel lift);
    static JkoEnergy entropy_global(MollifierKernel ker);
    static JkoEnergy fast_diffusion(MollifierKernel ker, double m);
    static JkoEnergy none();
};

struct JkoOptions {
    double tol = 1e-10;  // stop when the objective decreases by less
    int max_iters = 5000;
};

struct JkoStepResult {
    QuantileDiscretization q;
    double energy = 0.0;     // E[q'] on the step's frozen grid
    double objective = 0.0;  // d_W^2/(2 tau) + E[q']
    double w2_increment = 0.0;
    int iterations = 0;
};

/// Energy of an M-atom empirical measure under the handle, on a fresh grid.
double jko_energy_value(const JkoEnergy& energy, const Eigen::Ref<const Vec>& q);

/// One minimizing-movement step: damped projected gradient descent on
/// |q' - q|^2/(2 tau M) + E[q'] over the nondecreasing cone. Certifies
/// objective(q') <= objective(q) = E[q].
JkoStepResult jko_step(const QuantileDiscretization& q, double tau, const JkoEnergy& energy,
                       const JkoOptions& opt = {});

std::vector<JkoStepResult> jko_solve(const QuantileDiscretization& q0, double tau, int n_steps,
                                     const JkoEnergy& energy, const JkoOptions& opt = {});

}  // namespace blob::ref
