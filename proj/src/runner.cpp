#include "blobflow/runner.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>

#include "blobflow/dynamics.hpp"
#include "blobflow/io.hpp"
#include "blobflow/metrics.hpp"
#include "blobflow/quadrature.hpp"
#include "blobflow/reference.hpp"

namespace blob::cli {

namespace {

double surface_factor(int d) { return d == 1 ? 2.0 : 2.0 * M_PI; }

std::vector<KernelFamily> battery_families(int dim) {
    return {KernelFamily::poly_bump(dim, 4), KernelFamily::exp_bracket(dim, 1),
            KernelFamily::exp_bracket(dim, 2), KernelFamily::barenblatt(dim, 2.5)};
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string family_name(const KernelFamily& f) {
    switch (f.type) {
        case Family::poly_bump:
            return "polybump";
        case Family::exp_bracket:
            return f.p == 1 ? "exp1" : "exp2";
        case Family::barenblatt:
            return "barenblatt";
    }
    return "?";
}

void write_run_metadata(const RunContext& ctx) {
    io::ensure_dir(ctx.out_dir);
    std::ostringstream cfg;
    cfg << "# " << io::version() << "\n" << ctx.config.serialize();
    io::write_text(ctx.out_dir + "/resolved_config.ini", cfg.str());
    io::write_text(ctx.out_dir + "/version.txt", std::string(io::version()) + "\n");
}

std::vector<std::vector<double>> trajectory_rows(const dynamics::Trajectory& traj) {
    std::vector<std::vector<double>> rows;
    for (const auto& snap : traj.snapshots)
        for (int i = 0; i < snap.n(); ++i) {
            std::vector<double> row{snap.time, double(i)};
            for (int a = 0; a < snap.dim(); ++a) row.push_back(snap.positions(i, a));
            rows.push_back(std::move(row));
        }
    return rows;
}

void write_trajectory_outputs(const RunContext& ctx, const ProblemSpec& spec,
                              const dynamics::Trajectory& traj) {
    const int dim = traj.snapshots.front().dim();
    std::vector<std::string> theader{"t", "particle_id", "x0"};
    if (dim == 2) theader.push_back("x1");
    io::write_csv(ctx.out_dir + "/trajectory.csv", theader, trajectory_rows(traj));

    std::vector<std::vector<double>> report;
    for (const auto& row : traj.report)
        report.push_back({row.t, row.h_eps_sigma, row.um_eps, row.m2, row.support_radius,
                          row.max_speed, row.h1});
    io::write_csv(ctx.out_dir + "/report.csv",
                  {"t", "H_eps_sigma", "Um_eps", "m2", "support_radius", "max_speed", "h1"},
                  report);

    const auto& last = traj.snapshots.back();
    std::vector<std::vector<double>> fin;
    for (int i = 0; i < last.n(); ++i) {
        std::vector<double> row{double(i)};
        for (int a = 0; a < dim; ++a) row.push_back(last.positions(i, a));
        fin.push_back(std::move(row));
    }
    std::vector<std::string> fheader{"particle_id", "x0"};
    if (dim == 2) fheader.push_back("x1");
    io::write_csv(ctx.out_dir + "/final_state.csv", fheader, fin);

    // Quick-look SVGs: energy decay and the final density histogram.
    io::Series es;
    es.label = spec.is_heat() ? "H_eps_sigma" : "Um_eps";
    for (const auto& row : traj.report) {
        es.x.push_back(row.t);
        es.y.push_back(spec.is_heat() ? row.h_eps_sigma : row.um_eps);
    }
    io::write_text(ctx.out_dir + "/energy.svg", io::svg_line_plot("energy decay", {es}));

    if (dim == 1) {
        std::vector<double> cx, cy;
        const double lo = last.positions.minCoeff() - 0.5, hi = last.positions.maxCoeff() + 0.5;
        const std::string init_kind = ctx.config.get_str("init.kind", "gaussian");
        for (int i = 0; i <= 300; ++i) {
            const double x = lo + (hi - lo) * i / 300.0;
            double y = std::numeric_limits<double>::quiet_NaN();
            if (spec.is_heat() && init_kind == "gaussian" && !spec.potential.active()) {
                y = ref::heat_exact_1d(ctx.config.get_num("init.s0", 1.0), last.time, x);
            } else if (!spec.is_heat() && init_kind == "barenblatt") {
                const double m = spec.m_exponent();
                y = ref::barenblatt_fast_1d(m, ctx.config.get_num("init.t0", 1.0) + last.time,
                                            ref::barenblatt_mass_const(m, 1), x);
            } else if (spec.is_heat() && spec.potential.kind == ExternalPotential::Kind::quadratic) {
                y = ref::ou_exact(0.0, ctx.config.get_num("init.s0", 1.0), last.time, x);
            }
            if (std::isfinite(y)) {
                cx.push_back(x);
                cy.push_back(y);
            }
        }
        io::write_text(ctx.out_dir + "/density.svg",
                       io::svg_density_plot("final density", last.positions.col(0), cx, cy));
    }

    for (const auto& w : traj.warnings) std::cerr << "warning: " << w << "\n";
}

dynamics::SimulateOptions sim_options_from(const RunContext& ctx, const ProblemSpec& spec) {
    dynamics::SimulateOptions opt;
    opt.T = ctx.config.get_num("sim.T", 0.5);
    opt.dt = ctx.config.get_num("sim.dt", 0.0);
    const std::string method = ctx.config.get_str("sim.method", "rk4");
    if (method == "euler")
        opt.method = dynamics::Method::euler;
    else if (method == "rk4")
        opt.method = dynamics::Method::rk4;
    else
        throw invalid_parameter("config: sim.method must be euler|rk4");
    opt.snapshot_every = ctx.config.get_int("sim.snapshot_every", 10);
    opt.with_energy = ctx.config.get_bool("sim.with_energy", true);
    opt.threads = ctx.threads;
    (void)spec;
    return opt;
}

}  // namespace

std::vector<CheckRow> kernel_battery(double norm_scale) {
    std::vector<CheckRow> rows;
    std::mt19937_64 rng(202408);
    std::uniform_real_distribution<double> unif(-0.95, 0.95);
    for (int dim : {1, 2}) {
        for (const auto& fam : battery_families(dim)) {
            const std::string base = family_name(fam) + "/d" + std::to_string(dim);
            for (double eps : {1.0, 0.5, 0.1}) {
                const MollifierKernel ker(fam, eps);
                const std::string tag = base + "/eps" + short_num(eps);

                // Mass over the certified truncation domain; w = d links the
                // gradient-tail certificate to the value tail.
                const double r_end =
                    ker.compact() ? eps : ker.truncation_radius(double(dim), 1e-12);
                const double mass =
                    norm_scale * surface_factor(dim) *
                    quad::panel_integral(
                        [&](double r) {
                            return std::pow(r, dim - 1.0) * ker.eval_r2(r * r);
                        },
                        0.0, r_end, eps / 8.0, 14, 1.2);
                rows.push_back({"norm/" + tag, std::abs(mass - 1.0) < 1e-8,
                                std::abs(mass - 1.0), 1e-8});

                const MollifierKernel unit(fam, 1.0);
                const double scale_err =
                    std::abs(ker.moment(2.0) - eps * eps * unit.moment(2.0)) /
                    (eps * eps * unit.moment(2.0));
                rows.push_back({"moment_scaling/" + tag, scale_err < 1e-10, scale_err, 1e-10});

                double grad_err = 0.0;
                for (int s = 0; s < 64; ++s) {
                    Vec x(dim);
                    for (int a = 0; a < dim; ++a) x(a) = unif(rng) * eps;
                    const Vec g = ker.grad(x);
                    for (int a = 0; a < dim; ++a) {
                        Vec xp = x, xm = x;
                        xp(a) += 1e-6;
                        xm(a) -= 1e-6;
                        const double fd = (ker.eval(xp) - ker.eval(xm)) / 2e-6;
                        grad_err = std::max(grad_err,
                                            std::abs(g(a) - fd) / (1.0 + std::abs(g(a))));
                    }
                }
                rows.push_back({"gradient_fd/" + tag, grad_err < 1e-6, grad_err, 1e-6});

                Mat origin = Mat::Zero(1, dim);
                energy::MixtureDensity mix(origin, ker, 0.0);
                const double lhs = energy::entropy_regularized(mix);
                const double rhs = unit.entropy_v1() - dim * std::log(eps);
                const double ent_err = std::abs(lhs - rhs) / (1.0 + std::abs(rhs));
                rows.push_back({"entropy_scaling/" + tag, ent_err < 1e-6, ent_err, 1e-6});
            }
        }
    }
    return rows;
}

std::vector<CheckRow> lemma_battery(int samples, std::uint64_t seed, double log_global_c,
                                    double fast_power_c) {
    std::vector<CheckRow> rows;
    metrics::GrowthParams peetre;
    peetre.dim = 1;
    peetre.seed = seed;
    auto r1 = metrics::growth_bound_check(metrics::GrowthLemma::peetre, peetre, samples);
    rows.push_back({"peetre/d1", r1.pass, r1.max_ratio, 1.0});
    peetre.dim = 2;
    auto r2 = metrics::growth_bound_check(metrics::GrowthLemma::peetre, peetre, samples);
    rows.push_back({"peetre/d2", r2.pass, r2.max_ratio, 1.0});

    metrics::GrowthParams lg;
    lg.sigma = 0.1;
    lg.p = 1;
    lg.seed = seed;
    auto r3 = metrics::growth_bound_check(metrics::GrowthLemma::log_gauss, lg,
                                          std::max(1, samples / 10));
    rows.push_back({"log_gauss/sigma0.1", r3.pass, r3.max_ratio, 1.0});

    for (double eps : {0.4, 0.2, 0.1}) {
        metrics::GrowthParams p;
        p.eps = eps;
        p.seed = seed;
        p.bound_constant = log_global_c;
        auto r = metrics::growth_bound_check(metrics::GrowthLemma::log_global, p,
                                             std::max(1, samples / 10));
        rows.push_back({"log_global/eps" + short_num(eps), r.pass, r.max_ratio,
                        log_global_c});
        p.bound_constant = fast_power_c;
        auto rf = metrics::growth_bound_check(metrics::GrowthLemma::fast_power, p,
                                              std::max(1, samples / 10));
        rows.push_back({"fast_power/eps" + short_num(eps), rf.pass, rf.max_ratio,
                        fast_power_c});
    }
    return rows;
}

std::vector<CheckRow> commutator_battery(double cstar_override) {
    std::vector<CheckRow> rows;
    auto gauss = ref::GridDensity1D::from_function(
        [](double x) { return std::exp(-0.5 * x * x); }, -8.0, 8.0, 16000);
    const auto st = ref::quantize(gauss, 16);

    const double moment_bound =
        cstar_override > 0.0
            ? cstar_override
            : std::sqrt(MollifierKernel(KernelFamily::exp_bracket(1, 1), 1.0).moment_v1(2.0));
    metrics::ErrorSeries series;
    for (double eps : {0.4, 0.2, 0.1, 0.05}) {
        const MollifierKernel ker(KernelFamily::exp_bracket(1, 1), eps);
        const auto res = metrics::commutator_norm(st, ker, [](double x) { return x; }, 1.0);
        rows.push_back({"commutator_ratio/exp1/eps" + short_num(eps),
                        res.ratio_to_eps <= moment_bound + 1e-9, res.ratio_to_eps, moment_bound});
        series.parameter.push_back(eps);
        series.error.push_back(res.norm);

        const MollifierKernel pb(KernelFamily::poly_bump(1, 4), eps);
        const auto pres = metrics::commutator_norm(st, pb, [](double x) { return x; }, 1.0);
        rows.push_back({"commutator_ratio/polybump/eps" + short_num(eps),
                        pres.ratio_to_eps <= 1.0 + 1e-9, pres.ratio_to_eps, 1.0});
    }
    const auto fit = metrics::rate_fit(series);
    rows.push_back({"commutator_slope/exp1", fit.slope >= 0.9, fit.slope, 0.9});
    return rows;
}

int cmd_validate(const RunContext& ctx) {
    ctx.config.validate_schema();
    write_run_metadata(ctx);
    const int samples = ctx.config.get_int("validate.samples", 100000);
    const std::uint64_t seed = ctx.config.get_int("seed", 12345);
    const double norm_scale = ctx.config.get_num("validate.norm_scale", 1.0);

    std::vector<CheckRow> rows = kernel_battery(norm_scale);
    auto lemmas = lemma_battery(samples, seed,
                                ctx.config.get_num("validate.log_global_c", kLogGlobalC),
                                ctx.config.get_num("validate.fast_power_c", kFastPowerC));
    rows.insert(rows.end(), lemmas.begin(), lemmas.end());
    auto comm = commutator_battery(ctx.config.get_num("validate.commutator_cstar", 0.0));
    rows.insert(rows.end(), comm.begin(), comm.end());

    std::ostringstream csv;
    csv << "check,pass,value,bound\n";
    int failures = 0;
    for (const auto& row : rows) {
        csv << row.name << "," << (row.pass ? 1 : 0) << "," << io::format_num(row.value) << ","
            << io::format_num(row.bound) << "\n";
        if (!row.pass) {
            ++failures;
            std::cerr << "FAIL " << row.name << ": value " << row.value << " vs bound "
                      << row.bound << "\n";
        }
    }
    io::write_text(ctx.out_dir + "/validation.csv", csv.str());
    std::cout << rows.size() - failures << "/" << rows.size() << " checks passed\n";
    return failures == 0 ? 0 : 1;
}

int cmd_simulate(const RunContext& ctx) {
    ctx.config.validate_schema();
    const ProblemSpec spec = cfg::problem_from(ctx.config);
    const ParticleState init = cfg::initial_state_from(ctx.config, spec.kernel.dim());
    const auto opt = sim_options_from(ctx, spec);
    write_run_metadata(ctx);
    const auto traj = dynamics::simulate(spec, init, opt);
    write_trajectory_outputs(ctx, spec, traj);
    return 0;
}

namespace {

/// Advances the state to each checkpoint exactly, returning the states there.
std::vector<ParticleState> run_to_checkpoints(const ProblemSpec& spec, const ParticleState& init,
                                              const std::vector<double>& checkpoints, double dt0,
                                              int threads) {
    std::vector<ParticleState> out;
    ParticleState state = init;
    double t_prev = 0.0;
    for (double t : checkpoints) {
        if (!(t > t_prev)) throw invalid_parameter("checkpoints must be strictly increasing");
        dynamics::SimulateOptions opt;
        opt.T = t - t_prev;
        opt.dt = std::min(dt0 > 0.0 ? dt0 : dynamics::dt_max(spec), opt.T);
        opt.snapshot_every = 1 << 30;  // final state only
        opt.with_energy = false;
        opt.threads = threads;
        const auto traj = dynamics::simulate(spec, state, opt);
        state = traj.snapshots.back();
        out.push_back(state);
        t_prev = t;
    }
    return out;
}

ref::GridDensity1D exact_density(const ProblemSpec& spec, const cfg::RunConfig& c, double t) {
    const int grid_n = c.get_int("init.grid_n", 20000);
    if (spec.is_heat()) {
        const double s0 = c.get_num("init.s0", 1.0);
        const double span = 10.0 * std::sqrt(s0 * s0 + 2.0 * t);
        return ref::GridDensity1D::from_function(
            [&](double x) { return ref::heat_exact_1d(s0, t, x); }, -span, span, grid_n);
    }
    const double m = spec.m_exponent();
    const double t0 = c.get_num("init.t0", 1.0);
    const double mass_c = ref::barenblatt_mass_const(m, 1);
    return ref::GridDensity1D::from_function(
        [&](double x) { return ref::barenblatt_fast_1d(m, t0 + t, mass_c, x); }, -80.0, 80.0,
        grid_n);
}

}  // namespace

int cmd_convergence(const RunContext& ctx) {
    ctx.config.validate_schema();
    write_run_metadata(ctx);
    const auto n_list = ctx.config.get_list("study.N");
    if (n_list.empty()) throw invalid_parameter("convergence: study.N must be a nonempty list");
    std::vector<double> eps_list = ctx.config.get_list("study.epsilon");
    std::vector<double> sigma_list = ctx.config.get_list("study.sigma");
    const double gamma = ctx.config.get_num("study.gamma", 0.0);
    if (gamma > 0.0) {
        const std::string kind_s = ctx.config.get_str("study.kind", "heat_global");
        dynamics::ScheduleKind kind;
        if (kind_s == "heat_compact")
            kind = dynamics::ScheduleKind::heat_compact;
        else if (kind_s == "heat_global")
            kind = dynamics::ScheduleKind::heat_global;
        else if (kind_s == "fast")
            kind = dynamics::ScheduleKind::fast;
        else
            throw invalid_parameter("study.kind must be heat_compact|heat_global|fast");
        eps_list.clear();
        sigma_list.clear();
        for (double n : n_list) {
            const auto [eps, sig] = dynamics::scaling_schedule(kind, gamma, n);
            eps_list.push_back(eps);
            sigma_list.push_back(sig);
        }
    }
    if (eps_list.size() != n_list.size())
        throw invalid_parameter("convergence: study.epsilon must match study.N");
    if (!sigma_list.empty() && sigma_list.size() != n_list.size())
        throw invalid_parameter("convergence: study.sigma must match study.N");
    auto checkpoints = ctx.config.get_list("study.checkpoints");
    if (checkpoints.empty()) checkpoints = {0.25, 0.5};

    std::vector<std::vector<double>> rows;
    std::vector<double> run_errors;
    for (size_t i = 0; i < n_list.size(); ++i) {
        cfg::RunConfig rc = ctx.config;
        rc.set("kernel.epsilon", io::format_num(eps_list[i]));
        rc.set("init.n", io::format_num(n_list[i]));
        if (!sigma_list.empty()) rc.set("problem.sigma", io::format_num(sigma_list[i]));
        const ProblemSpec spec = cfg::problem_from(rc);
        const ParticleState init = cfg::initial_state_from(rc, spec.kernel.dim());
        const auto states =
            run_to_checkpoints(spec, init, checkpoints, rc.get_num("sim.dt", 0.0), ctx.threads);
        double worst = 0.0;
        for (size_t k = 0; k < checkpoints.size(); ++k) {
            const auto exact = exact_density(spec, rc, checkpoints[k]);
            const auto err = metrics::w2_particles_vs_density_1d(states[k], exact);
            rows.push_back({n_list[i], eps_list[i], sigma_list.empty() ? 0.0 : sigma_list[i],
                            checkpoints[k], err.error, err.floor});
            worst = std::max(worst, err.error);
        }
        run_errors.push_back(worst);
        std::cout << "N = " << n_list[i] << ", eps = " << eps_list[i] << ": max error " << worst
                  << "\n";
    }
    io::write_csv(ctx.out_dir + "/errors.csv", {"N", "epsilon", "sigma", "t", "error", "floor"},
                  rows);

    metrics::ErrorSeries series;
    series.label = "N";
    bool monotone = true;
    for (size_t i = 0; i < n_list.size(); ++i) {
        series.parameter.push_back(n_list[i]);
        series.error.push_back(run_errors[i]);
        if (i > 0 && run_errors[i] >= run_errors[i - 1]) monotone = false;
    }
    double slope = 0.0, r2 = 0.0;
    if (n_list.size() >= 3) {
        const auto fit = metrics::rate_fit(series);
        slope = fit.slope;
        r2 = fit.r2;
    }
    io::write_csv(ctx.out_dir + "/convergence_summary.csv", {"slope_vs_N", "r2", "monotone"},
                  {{slope, r2, monotone ? 1.0 : 0.0}});
    std::cout << "error-vs-N slope " << slope << " (r2 " << r2 << "), "
              << (monotone ? "monotone" : "NOT monotone") << "\n";

    io::Series es;
    es.label = "max w2 error";
    es.x = series.parameter;
    es.y = series.error;
    io::write_text(ctx.out_dir + "/errors.svg", io::svg_line_plot("self-convergence", {es}));
    return 0;
}

int cmd_jko(const RunContext& ctx) {
    ctx.config.validate_schema();
    write_run_metadata(ctx);
    const ProblemSpec spec = cfg::problem_from(ctx.config);
    if (spec.kernel.dim() != 1) throw invalid_parameter("jko: d = 1 only");
    const int m_atoms = ctx.config.get_int("jko.M", 128);
    const int n_steps = ctx.config.get_int("jko.steps", 20);
    auto taus = ctx.config.get_list("jko.tau");
    if (taus.empty()) taus = {0.1, 0.05, 0.025};

    cfg::RunConfig rc = ctx.config;
    rc.set("init.n", io::format_num(m_atoms));
    const ParticleState init = cfg::initial_state_from(rc, 1);
    ref::QuantileDiscretization q0;
    q0.values = init.positions.col(0);

    ref::JkoEnergy handle = [&] {
        if (!spec.is_heat()) return ref::JkoEnergy::fast_diffusion(spec.kernel, spec.m_exponent());
        if (spec.sigma() > 0.0)
            return ref::JkoEnergy::entropy_with_lift(spec.kernel, spec.sigma(), *spec.lift);
        return ref::JkoEnergy::entropy_global(spec.kernel);
    }();
    handle.quad = energy::EnergyQuadOptions::from(spec.quad);
    ref::JkoOptions jopt;
    jopt.tol = ctx.config.get_num("jko.tol", 1e-10);
    jopt.max_iters = ctx.config.get_int("jko.max_iters", 5000);

    // Gradient-flow reference trajectory of the same energy: the (1-sigma)
    // prefactor stays on for consistency with the JKO descent.
    ProblemSpec ode_spec = spec;
    ode_spec.sigma_prefactor = true;

    std::vector<std::vector<double>> gap_rows;
    bool energy_monotone = true;
    for (size_t ti = 0; ti < taus.size(); ++ti) {
        const double tau = taus[ti];
        const auto seq = ref::jko_solve(q0, tau, n_steps, handle, jopt);

        std::vector<double> times(n_steps);
        for (int s = 0; s < n_steps; ++s) times[s] = (s + 1) * tau;
        const auto ode_states = run_to_checkpoints(ode_spec, init, times, 0.0, ctx.threads);

        std::vector<std::vector<double>> rows;
        double sup_gap = 0.0;
        double prev_energy = std::numeric_limits<double>::infinity();
        for (int s = 0; s < n_steps; ++s) {
            const double gap =
                metrics::w2_1d(seq[s].q.values, ode_states[s].positions.col(0));
            sup_gap = std::max(sup_gap, gap);
            if (seq[s].energy > prev_energy + 1e-9) energy_monotone = false;
            prev_energy = seq[s].energy;
            rows.push_back({double(s + 1), times[s], seq[s].energy, seq[s].w2_increment,
                            double(seq[s].iterations), gap});
        }
        io::write_csv(ctx.out_dir + "/jko_tau" + std::to_string(ti) + ".csv",
                      {"step", "t", "energy", "w2_increment", "iterations", "gap_to_ode"}, rows);
        gap_rows.push_back({tau, sup_gap});
        std::cout << "tau = " << tau << ": sup gap to ODE " << sup_gap << "\n";
    }
    io::write_csv(ctx.out_dir + "/jko_gaps.csv", {"tau", "sup_gap"}, gap_rows);
    io::write_text(ctx.out_dir + "/jko_certificate.txt",
                   std::string("energy non-increasing: ") + (energy_monotone ? "yes" : "NO") +
                       "\n");
    return energy_monotone ? 0 : 3;
}

int cmd_gibbs(const RunContext& ctx) {
    ctx.config.validate_schema();
    write_run_metadata(ctx);
    const ProblemSpec spec = cfg::problem_from(ctx.config);
    if (!spec.is_heat() || !spec.potential.active() || spec.kernel.dim() != 1)
        throw invalid_parameter("gibbs: heat equation with an external potential in d = 1");
    const ParticleState init = cfg::initial_state_from(ctx.config, 1);

    auto checkpoints = ctx.config.get_list("gibbs.checkpoints");
    if (checkpoints.empty()) checkpoints = {1.0, 2.0, 3.0, 4.0, 5.0};

    const double span = ctx.config.get_num("init.grid_hi", 12.0);
    const auto target = ref::GridDensity1D::from_function(
        [&](double x) {
            Vec p(1);
            p << x;
            return std::exp(-spec.potential.value(p));
        },
        -span, span, ctx.config.get_int("init.grid_n", 20000));

    const bool is_ou = spec.potential.kind == ExternalPotential::Kind::quadratic &&
                       spec.potential.scale == 1.0;
    const double s0 = ctx.config.get_num("init.s0", 1.0);

    const auto states = run_to_checkpoints(spec, init, checkpoints,
                                           ctx.config.get_num("sim.dt", 0.0), ctx.threads);
    std::vector<std::vector<double>> rows;
    for (size_t k = 0; k < checkpoints.size(); ++k) {
        const auto err = metrics::w2_particles_vs_density_1d(states[k], target);
        double dw_ou = std::numeric_limits<double>::quiet_NaN();
        if (is_ou) {
            const auto ou = ref::GridDensity1D::from_function(
                [&](double x) { return ref::ou_exact(0.0, s0, checkpoints[k], x); }, -span, span,
                ctx.config.get_int("init.grid_n", 20000));
            dw_ou = metrics::w2_particles_vs_density_1d(states[k], ou).error;
        }
        rows.push_back({checkpoints[k], err.error, dw_ou, err.floor});
        std::cout << "t = " << checkpoints[k] << ": d_W to Gibbs " << err.error << "\n";
    }
    io::write_csv(ctx.out_dir + "/gibbs.csv", {"t", "dw_gibbs", "dw_ou", "floor"}, rows);

    io::Series es;
    es.label = "d_W to Gibbs";
    for (const auto& r : rows) {
        es.x.push_back(r[0]);
        es.y.push_back(r[1]);
    }
    io::write_text(ctx.out_dir + "/gibbs.svg", io::svg_line_plot("relaxation to Gibbs", {es}));
    return 0;
}

}  // namespace blob::cli
