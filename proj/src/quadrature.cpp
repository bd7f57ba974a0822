#include "blobflow/quadrature.hpp"

#include <cmath>

namespace blob::quad {

namespace {

// Legendre P_n and P_n' on [-1,1] via the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

}  // namespace

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw invalid_parameter("gauss_legendre: need n >= 1");
    if (!(a < b)) throw invalid_parameter("gauss_legendre: need a < b");

    Vec x(n), w(n);
    if (n == 1) {
        x(0) = 0.0;
        w(0) = 2.0;
    } else {
        const int half = (n + 1) / 2;
        for (int i = 0; i < half; ++i) {
            // Tricomi initial guess, then Newton on P_n.
            double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                const auto [p, dp] = legendre(n, t);
                const double dt = p / dp;
                t -= dt;
                if (std::abs(dt) < 1e-15) break;
            }
            const auto [p, dp] = legendre(n, t);
            (void)p;
            x(i) = -t;
            x(n - 1 - i) = t;
            w(i) = w(n - 1 - i) = 2.0 / ((1.0 - t * t) * dp * dp);
        }
        if (n % 2 == 1) x(n / 2) = 0.0;
    }

    QuadratureRule rule;
    rule.nodes.resize(n, 1);
    rule.weights.resize(n);
    const double mid = 0.5 * (a + b), half_len = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        rule.nodes(i, 0) = mid + half_len * x(i);
        rule.weights(i) = half_len * w(i);
    }
    rule.domain = DomainKind::interval;
    rule.volume = b - a;
    return rule;
}

QuadratureRule tensor_box(const QuadratureRule& gx, const QuadratureRule& gy) {
    const Eigen::Index nx = gx.size(), ny = gy.size();
    QuadratureRule rule;
    rule.nodes.resize(nx * ny, 2);
    rule.weights.resize(nx * ny);
    Eigen::Index m = 0;
    for (Eigen::Index i = 0; i < nx; ++i)
        for (Eigen::Index j = 0; j < ny; ++j, ++m) {
            rule.nodes(m, 0) = gx.nodes(i, 0);
            rule.nodes(m, 1) = gy.nodes(j, 0);
            rule.weights(m) = gx.weights(i) * gy.weights(j);
        }
    rule.domain = DomainKind::box;
    rule.volume = gx.volume * gy.volume;
    return rule;
}

QuadratureRule ball_rule(int n_r, int n_theta, const Eigen::Vector2d& center, double radius) {
    if (n_r < 1 || n_theta < 1) throw invalid_parameter("ball_rule: need n_r, n_theta >= 1");
    if (!(radius > 0.0)) throw invalid_parameter("ball_rule: need radius > 0");
    const QuadratureRule gr = gauss_legendre(n_r, 0.0, radius);
    QuadratureRule rule;
    rule.nodes.resize(n_r * n_theta, 2);
    rule.weights.resize(n_r * n_theta);
    const double dtheta = 2.0 * M_PI / n_theta;
    Eigen::Index m = 0;
    for (int i = 0; i < n_r; ++i) {
        const double r = gr.nodes(i, 0);
        const double wr = gr.weights(i) * r * dtheta;
        for (int j = 0; j < n_theta; ++j, ++m) {
            const double th = dtheta * (j + 0.5);
            rule.nodes(m, 0) = center.x() + r * std::cos(th);
            rule.nodes(m, 1) = center.y() + r * std::sin(th);
            rule.weights(m) = wr;
        }
    }
    rule.domain = DomainKind::ball;
    rule.volume = M_PI * radius * radius;
    return rule;
}

QuadratureRule composite_line(const LineGridSpec& spec) {
    if (!(spec.lo <= spec.core_lo && spec.core_lo < spec.core_hi && spec.core_hi <= spec.hi))
        throw invalid_parameter("composite_line: need lo <= core_lo < core_hi <= hi");
    if (!(spec.panel_width > 0.0) || spec.nodes_per_panel < 1 || spec.grade < 1.0)
        throw invalid_parameter("composite_line: bad panel parameters");

    // Panel edges, built symmetrically outward from the core center so that a
    // mirror-symmetric core yields a mirror-symmetric rule.
    const double c = 0.5 * (spec.core_lo + spec.core_hi);
    std::vector<double> right;  // edges > c
    double e = c;
    while (e < spec.core_hi - 1e-14 * std::abs(spec.core_hi - c + 1.0)) {
        e = std::min(e + spec.panel_width, spec.core_hi);
        right.push_back(e);
    }
    double w = spec.panel_width;
    while (e < spec.hi - 1e-14 * (std::abs(spec.hi) + 1.0)) {
        w *= spec.grade;
        e = std::min(e + w, spec.hi);
        right.push_back(e);
    }
    std::vector<double> left;  // edges < c, same construction mirrored
    e = c;
    while (e > spec.core_lo + 1e-14 * std::abs(spec.core_lo - c - 1.0)) {
        e = std::max(e - spec.panel_width, spec.core_lo);
        left.push_back(e);
    }
    w = spec.panel_width;
    while (e > spec.lo + 1e-14 * (std::abs(spec.lo) + 1.0)) {
        w *= spec.grade;
        e = std::max(e - w, spec.lo);
        left.push_back(e);
    }

    std::vector<double> edges;
    edges.reserve(left.size() + right.size() + 1);
    for (auto it = left.rbegin(); it != left.rend(); ++it) edges.push_back(*it);
    edges.push_back(c);
    for (double r : right) edges.push_back(r);

    const int n_panels = static_cast<int>(edges.size()) - 1;
    const int np = spec.nodes_per_panel;
    const QuadratureRule unit = gauss_legendre(np, -1.0, 1.0);

    QuadratureRule rule;
    rule.nodes.resize(static_cast<Eigen::Index>(n_panels) * np, 1);
    rule.weights.resize(static_cast<Eigen::Index>(n_panels) * np);
    Eigen::Index m = 0;
    for (int p = 0; p < n_panels; ++p) {
        const double a = edges[p], b = edges[p + 1];
        const double mid = 0.5 * (a + b), half_len = 0.5 * (b - a);
        for (int i = 0; i < np; ++i, ++m) {
            rule.nodes(m, 0) = mid + half_len * unit.nodes(i, 0);
            rule.weights(m) = half_len * unit.weights(i);
        }
    }
    rule.domain = DomainKind::interval;
    rule.volume = spec.hi - spec.lo;
    return rule;
}

double integrate(const QuadratureRule& rule, const std::function<double(const Eigen::Ref<const Vec>&)>& f) {
    double sum = 0.0;
    Vec x(rule.dim());
    for (Eigen::Index i = 0; i < rule.size(); ++i) {
        x = rule.nodes.row(i).transpose();
        const double v = f(x);
        if (!std::isfinite(v)) {
            throw evaluation_error("integrate: non-finite integrand at node (" + std::to_string(x(0)) +
                                   (x.size() > 1 ? ", " + std::to_string(x(1)) : "") + ")");
        }
        sum += rule.weights(i) * v;
    }
    return sum;
}

double integrate1(const QuadratureRule& rule, const std::function<double(double)>& f) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < rule.size(); ++i) {
        const double v = f(rule.nodes(i, 0));
        if (!std::isfinite(v)) {
            throw evaluation_error("integrate: non-finite integrand at node (" + std::to_string(rule.nodes(i, 0)) + ")");
        }
        sum += rule.weights(i) * v;
    }
    return sum;
}

double panel_integral(const std::function<double(double)>& f, double a, double b, double panel,
                      int nodes, double grade) {
    if (!(b > a)) return 0.0;
    LineGridSpec spec;
    spec.lo = a;
    spec.hi = b;
    spec.core_lo = a;
    spec.core_hi = std::min(b, a + 8.0 * panel);
    spec.panel_width = panel;
    spec.nodes_per_panel = nodes;
    spec.grade = grade;
    return integrate1(composite_line(spec), f);
}

}  // namespace blob::quad
