#pragma once

#include <string>
#include <vector>

#include "blobflow/energy.hpp"
#include "blobflow/state.hpp"

namespace blob::dynamics {

enum class Method { euler, rk4 };

/// One report row per snapshot. Energy columns not applicable to the run are
/// NaN; h1 is filled for heat runs only.
struct SnapshotRow {
    double t = 0.0;
    double h_eps_sigma = std::numeric_limits<double>::quiet_NaN();
    double um_eps = std::numeric_limits<double>::quiet_NaN();
    double m2 = 0.0;
    double support_radius = 0.0;
    double max_speed = 0.0;
    double h1 = std::numeric_limits<double>::quiet_NaN();
};

struct Trajectory {
    std::vector<ParticleState> snapshots;
    std::vector<SnapshotRow> report;
    std::vector<std::string> warnings;
};

/// Velocity of every particle under the regularised heat flow:
/// w_i = -int grad V_eps(x_i - y) log((1-s)/N sum_j V_eps(y - x_j) + s N(y)) dy,
/// evaluated on a shared composite panel grid covering the hull plus the
/// kernel truncation radius. The optional (1-sigma) prefactor follows
/// spec.sigma_prefactor. An external potential adds -grad V_ext(x_i).
Mat velocity_heat(const ParticleState& state, const ProblemSpec& spec, int threads = 1);

/// Fast-diffusion velocity:
/// w_i = -m/(1-m) int grad V_eps(x_i - y) ((1/N) sum_j V_eps(y - x_j))^(m-1) dy.
Mat velocity_fast(const ParticleState& state, const ProblemSpec& spec, int threads = 1);

Mat velocity(const ParticleState& state, const ProblemSpec& spec, int threads = 1);

ParticleState step(const ParticleState& state, const ProblemSpec& spec, double dt, Method method,
                   int threads = 1);

/// Largest stable explicit step, c_stab * eps^2.
double dt_max(const ProblemSpec& spec);

struct SimulateOptions {
    double T = 0.5;
    double dt = 0.0;  // 0: use dt_max(spec)
    Method method = Method::rk4;
    int snapshot_every = 10;
    int threads = 1;
    bool with_energy = true;  // energy/h1 columns in the report
};

/// Integrates the particle ODE, recording report rows per snapshot and
/// checking the support-growth bound (violations warn, blow-ups throw).
Trajectory simulate(const ProblemSpec& spec, const ParticleState& init, const SimulateOptions& opt);

enum class ScheduleKind { heat_compact, heat_global, fast };

/// (epsilon, sigma) from the particle-count scaling laws:
/// heat_compact eps = (log log N)^(-gamma) with sigma = eps, gamma in (0,1);
/// heat_global  eps = (log N)^(-gamma), gamma in (0,1/4);
/// fast         eps = (log log N)^(-gamma), gamma in (0,1/2).
std::pair<double, double> scaling_schedule(ScheduleKind kind, double gamma, double n_particles);

}  // namespace blob::dynamics
