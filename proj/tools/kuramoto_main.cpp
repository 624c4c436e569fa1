#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "kuramoto/analysis.hpp"
#include "kuramoto/concentration.hpp"
#include "kuramoto/config.hpp"
#include "kuramoto/io.hpp"

namespace fs = std::filesystem;
using namespace kuramoto;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double tol_scale = 0.0;
    std::string checks;
};

cfg::ExperimentConfig load_config(const CommonOpts& opts) {
    cfg::ExperimentConfig c = opts.config_path.empty()
                                  ? cfg::ExperimentConfig{}
                                  : cfg::ExperimentConfig::from_file(opts.config_path);
    if (opts.seed_set) c.seed = opts.seed;
    if (!opts.out_dir.empty()) c.out_dir = opts.out_dir;
    if (opts.tol_scale > 0.0) c.constants.tol_scale = opts.tol_scale;
    if (!opts.checks.empty()) {
        c.checks.clear();
        std::stringstream ss(opts.checks);
        std::string item;
        while (std::getline(ss, item, ',')) c.checks.push_back(item);
    }
    return c;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_checks = false) {
    cmd->add_option("--config", opts.config_path, "config JSON path");
    cmd->add_option("--out", opts.out_dir, "output directory");
    auto* s = cmd->add_option("--seed", opts.seed, "seed override (u64)");
    s->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--tol-scale", opts.tol_scale, "multiply all tolerances");
    if (with_checks) cmd->add_option("--check", opts.checks, "comma-separated check names");
}

// Simulates the kinetic run; when the fixed-point equilibrium exists the run
// is done twice so the per-step distance-to-equilibrium series targets the
// run's own asymptotic phase.
KineticTrajectory simulate_kinetic(const cfg::ExperimentConfig& c,
                                   EquilibriumState* eq_out = nullptr) {
    KineticState f0 = c.initial.family == "from_file"
                          ? io::read_snapshot(c.initial.path)
                          : c.build_initial_state();
    double dt = c.effective_dt();
    auto first = integrate_kinetic(f0, c.model, c.t_end, dt, c.snapshot_stride);
    try {
        double phi_end = first.phi_at_step(first.times.size() - 1);
        auto eq = stable_equilibrium(f0.grid, c.model, phi_end);
        if (eq_out) *eq_out = eq;
        return integrate_kinetic(f0, c.model, c.t_end, dt, c.snapshot_stride, &eq);
    } catch (const NoPhaseLockedEquilibrium&) {
        return first;
    }
}

bool want(const cfg::ExperimentConfig& c, const std::string& name) {
    if (c.checks.empty()) return true;
    for (const auto& x : c.checks)
        if (x == name) return true;
    return false;
}

int cmd_simulate_kinetic(const CommonOpts& opts) {
    auto c = load_config(opts);
    auto t0 = std::chrono::steady_clock::now();
    auto traj = simulate_kinetic(c);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    io::write_run(c.out_dir, traj, c.hash(), c.to_json_text(), wall);
    std::cout << "wrote " << c.out_dir << " (" << traj.times.size() << " steps, "
              << traj.snapshots.size() << " snapshots)\n";
    return 0;
}

int cmd_simulate_particles(const CommonOpts& opts) {
    auto c = load_config(opts);
    KineticState f0 = c.initial.family == "from_file"
                          ? io::read_snapshot(c.initial.path)
                          : c.build_initial_state();
    auto batch = mc::sample_initial(f0, c.particle_N, c.seed, 0);
    double dt = std::min(0.1 / c.model.K, 1e-3);
    auto run = mc::run_particles_with_field(batch.ensemble, c.model, c.t_end, dt, {});
    fs::create_directories(c.out_dir);
    std::ofstream out(fs::path(c.out_dir) / "particles.csv");
    char head[64];
    std::snprintf(head, sizeof(head), "# config_hash=%016llx version=1",
                  static_cast<unsigned long long>(c.hash()));
    out << head << "\nt,R,phi\n";
    for (std::size_t k = 0; k < run.field.times.size(); ++k)
        out << io::fmt(run.field.times[k]) << ',' << io::fmt(run.field.R[k]) << ','
            << io::fmt(wrap_angle(run.field.phi_unwrapped[k])) << "\n";
    std::cout << "wrote " << (fs::path(c.out_dir) / "particles.csv").string() << "\n";
    return 0;
}

int cmd_equilibrium(const CommonOpts& opts) {
    auto c = load_config(opts);
    auto g = c.build_grid();
    auto eq = stable_equilibrium(g, c.model, c.initial.center);
    std::cout << "{\n  \"R_inf\": " << io::fmt(eq.R_inf)
              << ",\n  \"phi_inf\": " << io::fmt(eq.phi_inf)
              << ",\n  \"residual\": " << io::fmt(eq.residual(c.model.K))
              << ",\n  \"atoms\": [";
    for (std::size_t j = 0; j < eq.atom_theta.size(); ++j)
        std::cout << (j ? ", " : "") << io::fmt(eq.atom_theta[j]);
    std::cout << "]\n}\n";
    return 0;
}

int cmd_verify(const CommonOpts& opts, const std::string& run_dir) {
    auto c = load_config(opts);
    auto traj = io::read_run(run_dir);
    auto d = analysis::TrajectoryDiagnostics::from(traj);
    const auto& cons = c.constants;
    std::vector<InequalityReport> reports;

    if (want(c, "dis")) reports.push_back(analysis::check_dissipation_bounds(d, cons));
    if (want(c, "disr"))
        reports.push_back(analysis::check_dissipation_R_relation(d, cons));
    if (want(c, "phidot")) reports.push_back(analysis::check_phi_dot(d, cons));
    if (want(c, "inst")) reports.push_back(analysis::check_instability(d, c.alpha, cons));
    if (want(c, "lateral"))
        reports.push_back(analysis::check_mass_lateral(traj, d, c.alpha, cons));
    if (want(c, "wtransport"))
        reports.push_back(analysis::check_transport_dissipation(traj, d, 20, cons));
    if (want(c, "gl2")) {
        auto full = flow::EvolvingSet::uniform_arc(traj.times.front(), traj.grid.size(),
                                                   Arc{0.0, PI});
        reports.push_back(
            flow::sliding_square_norm(traj, full, traj.times.back(), cons.tol_scale)
                .report);
        Arc seed{traj.phi_at_step(0), PI / 2 - c.alpha};
        auto arc_set = flow::EvolvingSet::uniform_arc(traj.snapshot_times.front(),
                                                      traj.grid.size(), seed);
        auto arc_rep =
            flow::sliding_square_norm(traj, arc_set, traj.times.back(), cons.tol_scale)
                .report;
        arc_rep.name = "gl2_sliding_norm_arc";
        reports.push_back(arc_rep);
    }
    double R0 = d.R.front();
    double lam = c.lambda.value_or(1.0 - R0 / 240.0);
    if (want(c, "gain")) {
        // first time the entry hypotheses hold
        double slope = 0.25 * c.model.K * 0.75 * std::pow(lam, 3.0) * std::pow(R0, 3.0);
        std::size_t k0 = d.t.size();
        for (std::size_t k = 0; k < d.t.size(); ++k) {
            if (d.R_dot_smooth[k] >= slope && d.R[k] <= std::sqrt(2.0) * R0 &&
                d.R[k] > lam * R0) {
                k0 = k;
                break;
            }
        }
        if (k0 < d.t.size()) {
            reports.push_back(
                analysis::check_entropy_production_gain(d, d.t[k0], lam, R0, cons));
        } else {
            InequalityReport skip;
            skip.name = "entropy_production_gain";
            skip.skipped = true;
            skip.skip_reason = "entry hypotheses never hold along the run";
            reports.push_back(skip);
        }
    }
    if (want(c, "rlower"))
        reports.push_back(analysis::check_R_lower_bound(d, lam, R0, cons));
    if (want(c, "decrease"))
        reports.push_back(analysis::check_decrease_rate(d, lam, R0, cons));
    if (want(c, "convexity")) {
        try {
            reports.push_back(analysis::check_convexity_regime(traj, d, c.beta, cons).report);
        } catch (const NeverEntered& e) {
            InequalityReport fail;
            fail.name = "convexity_regime";
            fail.tol = 0.0;
            fail.add(traj.times.back(), -1.0);
            fail.notes.push_back(e.what());
            reports.push_back(fail);
        }
    }
    analysis::SubdivisionReport sub;
    bool have_sub = false;
    if (want(c, "subdivision") || want(c, "l2barrier")) {
        sub = analysis::subdivision_report(d, c.lambda, c.q_threshold, cons);
        have_sub = true;
    }
    if (want(c, "subdivision") && have_sub) reports.push_back(sub.invariants(cons));
    if (want(c, "l2barrier") && have_sub)
        reports.push_back(analysis::check_L2_barrier(traj, d, sub, cons));

    std::string out_dir = opts.out_dir.empty() ? run_dir : c.out_dir;
    fs::create_directories(out_dir);
    std::ofstream rf(fs::path(out_dir) / "reports.json");
    rf << io::reports_to_json(reports, c.hash()) << "\n";
    if (have_sub) {
        std::ofstream sf(fs::path(out_dir) / "subdivision.json");
        sf << io::subdivision_to_json(sub, c.hash()) << "\n";
    }

    int failed = 0;
    for (const auto& rep : reports) {
        bool ok = rep.pass();
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << rep.name;
        if (rep.skipped) std::cout << " (skipped: " << rep.skip_reason << ")";
        std::cout << "\n";
        if (!ok) ++failed;
    }
    return failed == 0 ? 0 : 1;
}

int cmd_subdivide(const CommonOpts& opts, const std::string& run_dir,
                  const std::string& series_path, double series_K) {
    auto c = load_config(opts);
    analysis::SubdivisionReport sub;
    if (!series_path.empty()) {
        std::vector<double> t, R;
        io::read_series_csv(series_path, t, R);
        sub = analysis::subdivision_from_series(t, R, series_K, c.lambda, c.q_threshold,
                                                1.0, c.constants);
    } else {
        auto traj = io::read_run(run_dir);
        auto d = analysis::TrajectoryDiagnostics::from(traj);
        sub = analysis::subdivision_report(d, c.lambda, c.q_threshold, c.constants);
    }
    std::cout << io::subdivision_to_json(sub, c.hash()) << "\n";
    if (!opts.out_dir.empty()) {
        fs::create_directories(opts.out_dir);
        std::ofstream sf(fs::path(opts.out_dir) / "subdivision.json");
        sf << io::subdivision_to_json(sub, c.hash()) << "\n";
    }
    return sub.invariants(c.constants).pass() ? 0 : 1;
}

int cmd_concentration(const CommonOpts& opts, const std::string& run_dir) {
    auto c = load_config(opts);
    // f0 for sampling at the shared quantization resolution
    cfg::ExperimentConfig cq = c;
    cq.n_theta = c.quant_n_theta;
    cq.n_omega = c.quant_n_omega;
    KineticState f0 = cq.build_initial_state();

    std::vector<double> eps = c.eps_grid;
    if (eps.empty()) eps = {0.1, 0.2, 0.3, 0.45, 0.6};
    auto rep = mc::concentration_curve(f0, c.conc_Ns, c.conc_trials, eps, c.model, c.seed,
                                       cfg::thread_count_from_env());
    fs::create_directories(c.out_dir);
    io::write_concentration_csv((fs::path(c.out_dir) / "concentration.csv").string(), rep,
                                c.hash());

    // mass/diameter experiment around the measured convexity-regime time
    KineticTrajectory traj;
    EquilibriumState eq;
    bool have_eq = false;
    if (!run_dir.empty()) {
        traj = io::read_run(run_dir);
        try {
            eq = stable_equilibrium(traj.grid, c.model,
                                    traj.phi_at_step(traj.times.size() - 1));
            have_eq = true;
        } catch (const NoPhaseLockedEquilibrium&) {
        }
    } else {
        EquilibriumState eq_tmp;
        traj = simulate_kinetic(c, &eq_tmp);
        eq = eq_tmp;
        have_eq = !eq.atom_theta.empty();
    }
    mc::MassDiameterReport md;
    if (have_eq && c.trials > 0) {
        auto d = analysis::TrajectoryDiagnostics::from(traj);
        auto conv = analysis::check_convexity_regime(traj, d, c.beta, c.constants);
        // the probe window opens once the state is transport-close to the
        // equilibrium, not merely inside the convexity regime
        double T0 = conv.T0_meas;
        double target = 1.0 / std::sqrt(500.0);
        for (std::size_t k = 0; k < d.t.size(); ++k) {
            if (d.t[k] >= conv.T0_meas && d.w2g_to_eq[k] > 0.0 &&
                d.w2g_to_eq[k] <= target) {
                T0 = d.t[k];
                break;
            }
        }
        Arc L{eq.phi_inf, 0.2};  // diameter 2/5 around the equilibrium phase
        double dt_p = std::min(0.1 / c.model.K, 1e-3);
        auto eq_atoms = transport::ProductMeasure::from_equilibrium(eq);
        md = mc::mass_diameter_experiment(f0, c.model, c.particle_N, c.trials, L, T0,
                                          c.window, traj.times.back(), dt_p, c.seed,
                                          &eq_atoms);
    }
    io::write_mass_diameter_csv((fs::path(c.out_dir) / "mass_diameter.csv").string(), md,
                                c.hash());
    std::cout << "wrote " << c.out_dir << "/concentration.csv and mass_diameter.csv\n";
    std::cout << "pass fractions: mass=" << md.pass_fraction_mass
              << " diam=" << md.pass_fraction_diam << " (flagged "
              << md.flagged_fraction << ", " << md.unflagged_rows
              << " rows in scope)\n";
    return 0;
}

int cmd_distances(const CommonOpts& opts, const std::string& a_path,
                  const std::string& b_path) {
    auto c = load_config(opts);
    double K = c.model.K;
    auto a = io::read_snapshot(a_path, &K);
    auto b = io::read_snapshot(b_path);
    ModelParams p{K, c.model.W};
    double w2g = transport::fibered_w2(a, b);
    auto sw2 = transport::scaled_w2(a, b, p);
    std::cout << "{\n  \"w2g\": " << io::fmt(w2g)
              << ",\n  \"sw2\": " << io::fmt(sw2.distance)
              << ",\n  \"sw2_method\": \"" << sw2.method
              << "\",\n  \"order_margin\": " << io::fmt(w2g - sw2.distance) << "\n}\n";
    return (w2g - sw2.distance >= -1e-8) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kuramoto / Kuramoto-Sakaguchi simulation and verification toolkit"};
    app.require_subcommand(1);

    CommonOpts o_kin, o_par, o_eq, o_ver, o_sub, o_conc, o_dist;
    std::string run_dir_ver, run_dir_sub, run_dir_conc, series_path, dist_a, dist_b;
    double series_K = 1.0;

    auto* kin = app.add_subcommand("simulate-kinetic", "run the transport solver");
    add_common(kin, o_kin);
    auto* par = app.add_subcommand("simulate-particles", "run the oscillator ODE");
    add_common(par, o_par);
    auto* eqc = app.add_subcommand("equilibrium", "solve the phase-locked state");
    add_common(eqc, o_eq);
    auto* ver = app.add_subcommand("verify", "evaluate the inequality suite on a run");
    add_common(ver, o_ver, true);
    ver->add_option("--run", run_dir_ver, "run directory")->required();
    auto* sub = app.add_subcommand("subdivide", "dyadic subdivision report");
    add_common(sub, o_sub);
    sub->add_option("--run", run_dir_sub, "run directory");
    sub->add_option("--series", series_path, "t,R series CSV");
    sub->add_option("--series-K", series_K, "coupling for a bare series");
    auto* conc = app.add_subcommand("concentration", "Monte Carlo experiments");
    add_common(conc, o_conc);
    conc->add_option("--run", run_dir_conc, "reuse an existing kinetic run");
    auto* dist = app.add_subcommand("distances", "transport distances between snapshots");
    add_common(dist, o_dist);
    dist->add_option("--a", dist_a, "first snapshot")->required();
    dist->add_option("--b", dist_b, "second snapshot")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (kin->parsed()) return cmd_simulate_kinetic(o_kin);
        if (par->parsed()) return cmd_simulate_particles(o_par);
        if (eqc->parsed()) return cmd_equilibrium(o_eq);
        if (ver->parsed()) return cmd_verify(o_ver, run_dir_ver);
        if (sub->parsed()) {
            if (series_path.empty() && run_dir_sub.empty())
                throw ConfigError("subdivide: need --run or --series");
            return cmd_subdivide(o_sub, run_dir_sub, series_path, series_K);
        }
        if (conc->parsed()) return cmd_concentration(o_conc, run_dir_conc);
        if (dist->parsed()) return cmd_distances(o_dist, dist_a, dist_b);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
