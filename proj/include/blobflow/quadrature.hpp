#pragma once

#include <functional>

#include "blobflow/common.hpp"

namespace blob::quad {

enum class DomainKind { interval, box, ball };

/// Deterministic quadrature rule: nodes are rows of an M x d matrix, weights
/// sum to the measure of the domain.
struct QuadratureRule {
    Mat nodes;    // M x d
    Vec weights;  // M
    DomainKind domain = DomainKind::interval;
    double volume = 0.0;

    Eigen::Index size() const { return weights.size(); }
    int dim() const { return static_cast<int>(nodes.cols()); }
};

/// n-node Gauss-Legendre rule on [a, b]. Exact for polynomials of degree 2n-1.
QuadratureRule gauss_legendre(int n, double a, double b);

/// Tensor product of two 1-D rules; integrates separable products exactly to
/// the 1-D degree.
QuadratureRule tensor_box(const QuadratureRule& gx, const QuadratureRule& gy);

/// Polar rule on the disk of given center/radius: Gauss-Legendre radially,
/// uniform (trigonometrically exact) in angle.
QuadratureRule ball_rule(int n_r, int n_theta, const Eigen::Vector2d& center, double radius);

/// Composite panel layout for a 1-D line grid. Panels have uniform width
/// inside [core_lo, core_hi] (laid out symmetrically about the core center)
/// and widths growing geometrically by `grade` out to [lo, hi].
struct LineGridSpec {
    double lo = 0.0, hi = 0.0;
    double core_lo = 0.0, core_hi = 0.0;
    double panel_width = 0.1;
    int nodes_per_panel = 8;
    double grade = 1.3;
};

QuadratureRule composite_line(const LineGridSpec& spec);

double integrate(const QuadratureRule& rule, const std::function<double(const Eigen::Ref<const Vec>&)>& f);

/// 1-D fast path; f takes the coordinate directly.
double integrate1(const QuadratureRule& rule, const std::function<double(double)>& f);

/// Convenience: integral of f over [a, b] on panels of the given width,
/// graded geometrically away from a.
double panel_integral(const std::function<double(double)>& f, double a, double b, double panel,
                      int nodes = 12, double grade = 1.2);

}  // namespace blob::quad
