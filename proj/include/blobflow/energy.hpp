#pragma once

#include <optional>

#include "blobflow/quadrature.hpp"
#include "blobflow/state.hpp"

namespace blob::energy {

/// Mollified particle ensemble with an optional globally supported lift:
/// u(y) = (1-sigma) (1/N) sum_j V_eps(y -x_j) + sigma N(y).
struct MixtureDensity {
    Mat positions;  // N x d
    MollifierKernel kernel;
    double sigma = 0.0;
    std::optional<MollifierKernel> lift;

    MixtureDensity(Mat pos, MollifierKernel ker, double sig = 0.0,
                   std::optional<MollifierKernel> lift_density = std::nullopt);

    int n() const { return static_cast<int>(positions.rows()); }
    int dim() const { return static_cast<int>(positions.cols()); }

    /// Mollified empirical part (1/N) sum_j V_eps(y - x_j).
    double kernel_part(const Eigen::Ref<const Vec>& y) const;
    Vec kernel_part_grad(const Eigen::Ref<const Vec>& y) const;
};

double mixture_eval(const MixtureDensity& mix, const Eigen::Ref<const Vec>& y);

struct EnergyQuadOptions {
    int nodes_per_panel = 10;
    double panels_per_eps = 4.0;
    double tail_tol = 1e-10;
    double grade = 1.25;

    static EnergyQuadOptions from(const QuadOptions& q) {
        EnergyQuadOptions o;
        o.nodes_per_panel = q.entropy_nodes;
        o.panels_per_eps = q.entropy_panels_per_eps;
        o.tail_tol = q.tail_tol;
        o.grade = q.grade;
        return o;
    }
};

/// Regularised entropy: integral of u log u. For sigma > 0 the lift part is
/// split off exactly (sigma log sigma + sigma * int N log N computed radially)
/// so only the kernel-supported difference is integrated on the panel grid.
double entropy_regularized(const MixtureDensity& mix, const EnergyQuadOptions& opt = {});

/// -1/(1-m) * integral of u^m, sigma = 0 with a heavy-tailed or global kernel.
double fast_energy(const MixtureDensity& mix, double m, const EnergyQuadOptions& opt = {});

/// int |grad sqrt((1-sigma) u_V + sigma N)|^2, the dissipation-side seminorm.
double h1_seminorm(const MixtureDensity& mix, const EnergyQuadOptions& opt = {});

/// Geodesic-convexity modulus with its stated eps-scaling; all unquantified
/// prefactors are fixed to spec.c_lambda (order-of-magnitude diagnostic only).
double lambda_constant(const ProblemSpec& spec, double R0, double R1);

double second_moment(const Eigen::Ref<const Mat>& positions);
double support_radius(const Eigen::Ref<const Mat>& positions);

struct EnergyReport {
    double value = 0.0;
    enum class Kind { H, H_eps, H_eps_sigma, Um, Um_eps } kind = Kind::H_eps_sigma;
    double second_moment = 0.0;
};

}  // namespace blob::energy
