#pragma once

#include <string>
#include <vector>

#include "blobflow/config.hpp"

namespace blob::cli {

struct RunContext {
    cfg::RunConfig config;
    std::string out_dir = "out";
    int threads = 1;
};

struct CheckRow {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double bound = 0.0;
};

/// Kernel suite: normalization, moment scaling, gradient-vs-FD, entropy
/// scaling identity for all four families, d in {1,2}, eps in {1, 0.5, 0.1}.
/// norm_scale != 1 is the negative-control hook that perturbs the
/// normalization constant before the mass check.
std::vector<CheckRow> kernel_battery(double norm_scale = 1.0);

/// Growth-lemma checkers: Peetre (exact), log_gauss (explicit constant),
/// rescaled-log and fast-power bounds with frozen calibrated constants across
/// eps in {0.4, 0.2, 0.1}.
std::vector<CheckRow> lemma_battery(int samples, std::uint64_t seed, double log_global_c,
                                    double fast_power_c);

/// Commutator decay on the 16-particle Gaussian quantization with
/// phi = x^2/2: ratio bound per branch constant and eps-linear slope.
std::vector<CheckRow> commutator_battery(double cstar_override = 0.0);

/// Frozen calibration defaults (pilot eps = 0.4, seed 12345, x1.25 headroom).
inline constexpr double kLogGlobalC = 1.10;
inline constexpr double kFastPowerC = 1.02;

int cmd_simulate(const RunContext& ctx);
int cmd_convergence(const RunContext& ctx);
int cmd_validate(const RunContext& ctx);
int cmd_jko(const RunContext& ctx);
int cmd_gibbs(const RunContext& ctx);

}  // namespace blob::cli
