#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace blob {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Lebesgue bracket <x> = sqrt(1 + |x|^2), taking the squared radius.
inline double bracket_sq(double r2) { return std::sqrt(1.0 + r2); }

inline double bracket(double x) { return std::sqrt(1.0 + x * x); }

inline double bracket(const Eigen::Ref<const Vec>& x) {
    return std::sqrt(1.0 + x.squaredNorm());
}

/// Thrown when a construction or call violates a documented precondition.
struct invalid_parameter : std::invalid_argument {
    explicit invalid_parameter(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when an evaluation produces a non-finite value; carries location info.
struct evaluation_error : std::runtime_error {
    explicit evaluation_error(const std::string& what) : std::runtime_error(what) {}
};

/// Chunked parallel map over [0, n). Each index writes only its own output;
/// results are identical for every thread count.
template <typename F>
void parallel_for(Eigen::Index n, int threads, F&& body) {
    if (threads <= 1 || n < 64) {
        for (Eigen::Index i = 0; i < n; ++i) body(i);
        return;
    }
    const int k = std::min<int>(threads, static_cast<int>(n));
    std::vector<std::thread> pool;
    pool.reserve(k);
    const Eigen::Index chunk = (n + k - 1) / k;
    for (int t = 0; t < k; ++t) {
        const Eigen::Index lo = t * chunk;
        const Eigen::Index hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (Eigen::Index i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace blob
