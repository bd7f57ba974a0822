#pragma once

#include <optional>
#include <variant>

#include "blobflow/common.hpp"
#include "blobflow/kernels.hpp"

namespace blob {

/// N particles in d dimensions with uniform weights 1/N.
struct ParticleState {
    Mat positions;  // N x d
    double time = 0.0;

    int n() const { return static_cast<int>(positions.rows()); }
    int dim() const { return static_cast<int>(positions.cols()); }

    void check_finite() const {
        if (!positions.allFinite()) throw evaluation_error("particle state has non-finite positions");
    }
};

/// Smooth confining potential; only gradients enter the dynamics.
struct ExternalPotential {
    enum class Kind { none, quadratic, double_well, poly };
    Kind kind = Kind::none;
    double scale = 1.0;
    Vec coeffs;  // poly: V(x) = sum_k coeffs[k] x^k, d = 1 only

    bool active() const { return kind != Kind::none; }

    double value(const Eigen::Ref<const Vec>& x) const {
        switch (kind) {
            case Kind::none:
                return 0.0;
            case Kind::quadratic:
                return 0.5 * scale * x.squaredNorm();
            case Kind::double_well: {
                const double r2 = x.squaredNorm();
                return 0.25 * scale * (r2 - 1.0) * (r2 - 1.0);
            }
            case Kind::poly: {
                double v = 0.0, p = 1.0;
                for (Eigen::Index k = 0; k < coeffs.size(); ++k, p *= x(0)) v += coeffs(k) * p;
                return scale * v;
            }
        }
        return 0.0;
    }

    Vec grad(const Eigen::Ref<const Vec>& x) const {
        switch (kind) {
            case Kind::none:
                return Vec::Zero(x.size());
            case Kind::quadratic:
                return scale * x;
            case Kind::double_well:
                return scale * (x.squaredNorm() - 1.0) * x;
            case Kind::poly: {
                double g = 0.0, p = 1.0;
                for (Eigen::Index k = 1; k < coeffs.size(); ++k, p *= x(0)) g += k * coeffs(k) * p;
                Vec out(1);
                out << scale * g;
                return out;
            }
        }
        return Vec::Zero(x.size());
    }
};

struct HeatEquation {
    double sigma = 0.0;
};

struct FastDiffusion {
    double m = 0.8;
};

/// Knobs for the deterministic panel quadratures.
struct QuadOptions {
    int n = 32;                      // velocity nodes per kernel length scale
    double tail_tol = 1e-10;         // truncation certification tolerance
    int entropy_nodes = 10;          // nodes per energy panel
    double entropy_panels_per_eps = 4.0;
    double grade = 1.25;             // geometric growth of far-field panels
    double c_stab = 0.1;             // dt_max = c_stab * eps^2
};

/// Full problem description: equation, kernel, optional sigma-lift and
/// external potential, quadrature knobs.
struct ProblemSpec {
    std::variant<HeatEquation, FastDiffusion> equation;
    MollifierKernel kernel;
    std::optional<MollifierKernel> lift;  // exp_bracket at eps = 1, heat with sigma > 0
    ExternalPotential potential;
    bool sigma_prefactor = false;  // apply the (1-sigma) factor to the heat velocity
    QuadOptions quad;
    double c_lambda = 1.0;  // unquantified prefactor of the global/fast moduli

    bool is_heat() const { return std::holds_alternative<HeatEquation>(equation); }
    double sigma() const { return is_heat() ? std::get<HeatEquation>(equation).sigma : 0.0; }
    double m_exponent() const { return is_heat() ? 1.0 : std::get<FastDiffusion>(equation).m; }

    void validate() const {
        const int d = kernel.dim();
        if (is_heat()) {
            const double s = sigma();
            if (!(s >= 0.0 && s < 1.0)) throw invalid_parameter("heat: need sigma in [0,1)");
            if (s == 0.0 && kernel.family().type != Family::exp_bracket)
                throw invalid_parameter(
                    "heat: sigma = 0 requires an exp-bracket (globally supported) kernel");
            if (s > 0.0) {
                if (!kernel.compact())
                    throw invalid_parameter("heat: the sigma lift pairs with a compact kernel");
                if (!lift) throw invalid_parameter("heat: sigma > 0 requires a lift density");
                if (lift->family().type != Family::exp_bracket || lift->dim() != d)
                    throw invalid_parameter("heat: lift must be an exp-bracket density in the same dimension");
            }
        } else {
            const double m = m_exponent();
            if (!(m > double(d) / (d + 2) && m < 1.0))
                throw invalid_parameter("fast diffusion: need m in (d/(d+2), 1)");
            if (kernel.compact())
                throw invalid_parameter("fast diffusion: kernel must be globally supported");
            if (kernel.family().type == Family::barenblatt) {
                const double alpha = kernel.family().alpha;
                if (!(alpha > 0.5 * d + 1.0 / m))
                    throw invalid_parameter("fast diffusion: need alpha > d/2 + 1/m");
                if (std::abs(alpha - KernelFamily::barenblatt_alpha_for(m)) < 1e-12 &&
                    !(d * m * m + (3.0 - d) * m - 2.0 > 0.0))
                    throw invalid_parameter(
                        "fast diffusion: alpha = 1/(2(1-m)) needs d m^2 + (3-d) m - 2 > 0");
            }
            if (potential.active())
                throw invalid_parameter("fast diffusion: external potential not supported");
        }
        if (potential.kind == ExternalPotential::Kind::poly && d != 1)
            throw invalid_parameter("poly potential: d = 1 only");
    }
};

}  // namespace blob
