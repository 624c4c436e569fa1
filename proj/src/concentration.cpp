#include "kuramoto/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace kuramoto::mc {

namespace {

constexpr std::uint32_t PHILOX_M0 = 0xD2511F53u;
constexpr std::uint32_t PHILOX_M1 = 0xCD9E8D57u;
constexpr std::uint32_t PHILOX_W0 = 0x9E3779B9u;
constexpr std::uint32_t PHILOX_W1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t c[4], std::uint32_t k0, std::uint32_t k1) {
    std::uint64_t p0 = static_cast<std::uint64_t>(PHILOX_M0) * c[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(PHILOX_M1) * c[2];
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c[0] = hi1 ^ c[1] ^ k0;
    c[1] = lo1;
    c[2] = hi0 ^ c[3] ^ k1;
    c[3] = lo0;
}

}  // namespace

void Philox::refill() {
    std::uint32_t c[4] = {static_cast<std::uint32_t>(block_),
                          static_cast<std::uint32_t>(block_ >> 32),
                          static_cast<std::uint32_t>(stream_),
                          static_cast<std::uint32_t>(stream_ >> 32)};
    std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
    for (int round = 0; round < 10; ++round) {
        philox_round(c, k0, k1);
        k0 += PHILOX_W0;
        k1 += PHILOX_W1;
    }
    for (int i = 0; i < 4; ++i) out_[i] = c[i];
    have_ = 4;
    ++block_;
}

double Philox::uniform() {
    if (have_ < 2) refill();
    std::uint64_t bits = (static_cast<std::uint64_t>(out_[4 - have_]) << 32) |
                         out_[4 - have_ + 1];
    have_ -= 2;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

SampleBatch sample_initial(const KineticState& f0, int N, std::uint64_t seed,
                           std::uint64_t trial) {
    f0.validate();
    SampleBatch batch;
    batch.seed = seed;
    batch.trial = trial;
    batch.N = N;
    Philox rng(seed, trial);

    const auto& g = f0.grid;
    const double dth = f0.dtheta();
    const double jitter_w = (g.size() > 1) ? g.spacing : 0.0;

    std::vector<double> cum_w(g.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        acc += g.weights[j];
        cum_w[j] = acc;
    }
    std::vector<std::vector<double>> cum_h(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        cum_h[j].resize(f0.n_theta);
        double a = 0.0;
        const double* hj = f0.fiber(j);
        for (int i = 0; i < f0.n_theta; ++i) {
            a += hj[i] * dth;
            cum_h[j][i] = a;
        }
    }

    batch.ensemble.phases.resize(N);
    batch.ensemble.frequencies.resize(N);
    for (int n = 0; n < N; ++n) {
        double u = rng.uniform() * cum_w.back();
        std::size_t j = std::lower_bound(cum_w.begin(), cum_w.end(), u) - cum_w.begin();
        j = std::min(j, g.size() - 1);
        double w_lo = (j == 0) ? 0.0 : cum_w[j - 1];
        double frac_w = (g.weights[j] > 0.0) ? (u - w_lo) / g.weights[j] : 0.5;
        batch.ensemble.frequencies[n] =
            g.nodes[j] + (std::clamp(frac_w, 0.0, 1.0) - 0.5) * jitter_w;

        double v = rng.uniform() * cum_h[j].back();
        auto it = std::lower_bound(cum_h[j].begin(), cum_h[j].end(), v);
        int i = static_cast<int>(std::min<std::ptrdiff_t>(it - cum_h[j].begin(),
                                                          f0.n_theta - 1));
        double h_lo = (i == 0) ? 0.0 : cum_h[j][i - 1];
        double cell_mass = cum_h[j][i] - h_lo;
        double frac = (cell_mass > 0.0) ? (v - h_lo) / cell_mass : 0.5;
        batch.ensemble.phases[n] = wrap_angle((i + std::clamp(frac, 0.0, 1.0)) * dth);
    }
    return batch;
}

// ---------------------------------------------------------------------------

namespace {

struct WilsonInterval {
    double lo, hi;
};

WilsonInterval wilson(double freq, int n, double z = 1.96) {
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (freq + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(freq * (1.0 - freq) / n + z2 / (4.0 * n * n)) / denom;
    return {center - half, center + half};
}

}  // namespace

ConcentrationReport concentration_curve(const KineticState& f0, const std::vector<int>& Ns,
                                        int trials, const std::vector<double>& eps_grid,
                                        const ModelParams& params, std::uint64_t seed,
                                        int n_threads) {
    ConcentrationReport rep;
    rep.Ns = Ns;
    rep.eps_grid = eps_grid;
    rep.trials = trials;
    rep.exceed_freq.assign(Ns.size(), std::vector<double>(eps_grid.size(), 0.0));
    rep.monotonicity.name = "concentration_monotonicity";
    rep.monotonicity.tol = 0.0;
    rep.monotonicity.tol_note = "Wilson 95% intervals must not order-invert";

    auto f0_atoms = transport::ProductMeasure::from_state(f0);
    std::vector<std::vector<double>> sw2(Ns.size(), std::vector<double>(trials, 0.0));
    for (std::size_t ni = 0; ni < Ns.size(); ++ni) {
        auto work = [&](int lo, int hi) {
            for (int trial = lo; trial < hi; ++trial) {
                std::uint64_t stream =
                    static_cast<std::uint64_t>(Ns[ni]) * 1000003ull + trial;
                auto batch = sample_initial(f0, Ns[ni], seed, stream);
                auto mu = transport::ProductMeasure::from_particles(batch.ensemble);
                sw2[ni][trial] = transport::scaled_w2(mu, f0_atoms, params).distance;
            }
        };
        if (n_threads <= 1 || trials < 2) {
            work(0, trials);
        } else {
            int nt = std::min(n_threads, trials);
            std::vector<std::thread> pool;
            for (int w = 0; w < nt; ++w)
                pool.emplace_back(work, trials * w / nt, trials * (w + 1) / nt);
            for (auto& th : pool) th.join();
        }
        std::vector<double> sorted = sw2[ni];
        std::sort(sorted.begin(), sorted.end());
        rep.median_sw2.push_back(sorted[sorted.size() / 2]);
        for (std::size_t ei = 0; ei < eps_grid.size(); ++ei) {
            int count = 0;
            for (double v : sw2[ni])
                if (v >= eps_grid[ei]) ++count;
            rep.exceed_freq[ni][ei] = static_cast<double>(count) / trials;
        }
        double eps_n = std::pow(static_cast<double>(Ns[ni]), -1.0 / 8.0);
        rep.eps_scale.push_back(eps_n);
        int count = 0;
        for (double v : sw2[ni])
            if (v >= eps_n) ++count;
        rep.freq_at_scale.push_back(static_cast<double>(count) / trials);
    }

    for (std::size_t ei = 0; ei < eps_grid.size(); ++ei) {
        for (std::size_t ni = 0; ni + 1 < Ns.size(); ++ni) {
            auto a = wilson(rep.exceed_freq[ni][ei], trials);
            auto b = wilson(rep.exceed_freq[ni + 1][ei], trials);
            rep.monotonicity.add(eps_grid[ei], a.hi - b.lo);
        }
    }

    std::vector<double> xs, ys;
    for (std::size_t ni = 0; ni < Ns.size(); ++ni)
        if (rep.freq_at_scale[ni] > 0.0) {
            xs.push_back(std::sqrt(static_cast<double>(Ns[ni])));
            ys.push_back(std::log(rep.freq_at_scale[ni]));
        }
    if (xs.size() >= 2) {
        double n = static_cast<double>(xs.size());
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            sx += xs[k];
            sy += ys[k];
            sxx += xs[k] * xs[k];
            sxy += xs[k] * ys[k];
        }
        double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        double inter = (sy - slope * sx) / n;
        rep.envelope_c1 = std::exp(inter);
        rep.envelope_c2 = -slope;
        double slack = 2.0 / trials;
        for (std::size_t ni = 0; ni < Ns.size(); ++ni) {
            double cap = rep.envelope_c1 *
                             std::exp(-rep.envelope_c2 *
                                      std::sqrt(static_cast<double>(Ns[ni]))) +
                         slack;
            if (rep.freq_at_scale[ni] > cap * 1.5) rep.envelope_ok = false;
        }
    } else {
        rep.envelope_c1 = xs.empty() ? 0.0 : std::exp(ys[0]);
        rep.envelope_c2 = 0.0;
    }
    return rep;
}

// ---------------------------------------------------------------------------

double ParticleField::advect(double theta, double omega, std::size_t i0,
                             std::size_t i1) const {
    i0 = std::min(i0, times.size() - 1);
    i1 = std::min(i1, times.size() - 1);
    auto lerp = [&](const std::vector<double>& v, double x) {
        if (v.size() < 2) return v.empty() ? 0.0 : v.front();
        double pos = x / dt;
        std::size_t i = static_cast<std::size_t>(
            std::clamp(std::floor(pos), 0.0, double(v.size() - 2)));
        double frac = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
        return v[i] * (1.0 - frac) + v[i + 1] * frac;
    };
    auto speed = [&](double th, double s) {
        return omega - K * lerp(R, s) * std::sin(th - lerp(phi_unwrapped, s));
    };
    double th = theta;
    for (std::size_t i = i0; i < i1; ++i) {
        double s = times[i];
        double k1 = speed(th, s);
        double k2 = speed(th + 0.5 * dt * k1, s + 0.5 * dt);
        double k3 = speed(th + 0.5 * dt * k2, s + 0.5 * dt);
        double k4 = speed(th + dt * k3, s + dt);
        th += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return th;
}

ParticleRun run_particles_with_field(const ParticleEnsemble& init, const ModelParams& params,
                                     double t_end, double dt,
                                     const std::vector<double>& probe_times) {
    ParticleRun run;
    run.field.dt = dt;
    run.field.K = params.K;
    run.probe_times = probe_times;
    run.probe_phases.resize(probe_times.size());

    const std::size_t n = init.size();
    std::vector<double> y = init.phases;
    const auto& freqs = init.frequencies;
    std::size_t n_steps = static_cast<std::size_t>(std::llround(t_end / dt));

    auto order = [&](const std::vector<double>& phases) {
        double c = 0.0, s = 0.0;
        for (double th : phases) {
            c += std::cos(th);
            s += std::sin(th);
        }
        c /= n;
        s /= n;
        double r = std::sqrt(c * c + s * s);
        double phi = (r < R_PHASE_EPS) ? 0.0 : std::atan2(s, c);
        return std::pair{r, phi};
    };
    auto rhs = [&](const std::vector<double>& phases, std::vector<double>& out) {
        auto [r, phi] = order(phases);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = freqs[i] - params.K * r * std::sin(phases[i] - phi);
    };

    double phi_prev = 0.0, phi_lift = 0.0;
    bool started = false;
    auto record = [&](std::size_t step) {
        auto [r, phi] = order(y);
        run.field.times.push_back(step * dt);
        run.field.R.push_back(r);
        if (!started) {
            phi_lift = phi;
            started = true;
        } else {
            phi_lift += wrap_signed(phi - phi_prev);
        }
        phi_prev = phi;
        run.field.phi_unwrapped.push_back(phi_lift);
        for (std::size_t p = 0; p < probe_times.size(); ++p) {
            if (std::fabs(probe_times[p] - step * dt) <= 0.5 * dt &&
                run.probe_phases[p].empty())
                run.probe_phases[p] = y;
        }
    };

    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    record(0);
    for (std::size_t step = 1; step <= n_steps; ++step) {
        rhs(y, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
        rhs(tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            y[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        record(step);
    }
    return run;
}

InequalityReport stability_check(const KineticTrajectory& kin, int N, std::uint64_t seed,
                                 const std::vector<double>& probe_times,
                                 double particle_dt, double tol_scale) {
    InequalityReport rep;
    rep.name = "sw2_stability";
    const ModelParams& params = kin.params;
    const double K = params.K;

    auto batch = sample_initial(kin.snapshots.front(), N, seed, 0);
    double t_end = probe_times.back();
    auto run = run_particles_with_field(batch.ensemble, params, t_end, particle_dt,
                                        probe_times);

    auto mu0 = transport::ProductMeasure::from_particles(batch.ensemble);
    auto f0_atoms = transport::ProductMeasure::from_state(kin.snapshots.front());
    double sw2_0 = transport::scaled_w2(mu0, f0_atoms, params).distance;
    rep.notes.push_back("sw2_at_0=" + std::to_string(sw2_0));
    const double dth = TWO_PI / kin.n_theta;
    rep.tol_note =
        "tol(t) = tol_scale*(dtheta + K*dt + N^{-1/2})*(e^{2.5Kt}-1); zero at t=0";

    for (std::size_t p = 0; p < probe_times.size(); ++p) {
        double t = probe_times[p];
        ParticleEnsemble state;
        state.phases = run.probe_phases[p];
        state.frequencies = batch.ensemble.frequencies;
        auto mu_t = transport::ProductMeasure::from_particles(state);
        auto f_t = transport::ProductMeasure::from_state(
            kin.snapshots[kin.snapshot_index_at(t)]);
        double sw2_t = transport::scaled_w2(mu_t, f_t, params).distance;
        double growth = std::exp(2.5 * K * t);
        double tol = tol_scale * (dth + K * particle_dt + 1.0 / std::sqrt(double(N))) *
                     (growth - 1.0);
        rep.add(t, growth * sw2_0 + tol - sw2_t);
    }
    rep.tol = 0.0;  // tolerance folded into the margin per probe
    return rep;
}

MassDiameterReport mass_diameter_experiment(const KineticState& f0,
                                            const ModelParams& params, int N, int trials,
                                            const Arc& L, double T0, double window,
                                            double t_end, double particle_dt,
                                            std::uint64_t seed,
                                            const transport::ProductMeasure* close_ref) {
    MassDiameterReport rep;
    rep.T0 = T0;
    const double K = params.K;
    const double W = params.W;

    // probe grid clamped to the integrated range
    double w_eff = std::max(0.0, std::min(window, t_end - T0));
    std::vector<double> probes;
    for (int i = 0; i <= 4; ++i) probes.push_back(T0 + w_eff * i / 4.0);
    int extra = 6;
    for (int i = 1; i <= extra; ++i)
        probes.push_back(T0 + w_eff + (t_end - T0 - w_eff) * i / extra);
    for (double& p : probes) {
        p = std::clamp(p, 0.0, t_end);
        p = std::round(p / particle_dt) * particle_dt;  // snap to steps
    }
    std::sort(probes.begin(), probes.end());
    probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
    if (T0 > t_end) return rep;

    std::size_t n_pass_m = 0, n_pass_d = 0, n_rows = 0, n_flagged = 0;
    for (int trial = 0; trial < trials; ++trial) {
        auto batch = sample_initial(f0, N, seed, 1000000ull + trial);
        auto run = run_particles_with_field(batch.ensemble, params, t_end, particle_dt,
                                            probes);
        auto idx_of = [&](double t) {
            return static_cast<std::size_t>(std::llround(t / particle_dt));
        };
        for (std::size_t a = 0; a < probes.size(); ++a) {
            double s = probes[a];
            if (s > T0 + w_eff + 0.5 * particle_dt) break;
            bool hyp = true;
            if (close_ref) {
                ParticleEnsemble at_s;
                at_s.phases = run.probe_phases[a];
                at_s.frequencies = batch.ensemble.frequencies;
                auto mu_s = transport::ProductMeasure::from_particles(at_s);
                double closeness =
                    transport::scaled_w2(mu_s, *close_ref, params).distance;
                hyp = (closeness <= 2.0 / std::sqrt(500.0));
            }
            double lo0 = L.center - L.half_width;
            double hi0 = L.center + L.half_width;
            for (std::size_t b = a; b < probes.size(); ++b) {
                double t = probes[b];
                // extreme-frequency characteristics bound the projection
                double lo_t = run.field.advect(lo0, -W, idx_of(s), idx_of(t));
                double hi_t = run.field.advect(hi0, +W, idx_of(s), idx_of(t));
                double diam = hi_t - lo_t;
                MassDiameterRow row;
                row.trial = trial;
                row.s = s;
                row.t = t;
                row.diam = diam;
                const auto& phases = run.probe_phases[b];
                int inside = 0;
                if (diam >= TWO_PI) {
                    inside = static_cast<int>(phases.size());
                } else {
                    Arc arc{wrap_angle(0.5 * (lo_t + hi_t)), 0.5 * diam};
                    for (double th : phases)
                        if (arc.contains(th)) ++inside;
                }
                row.mass = static_cast<double>(inside) / N;
                double mass_bound = 1.0 - 0.2 * std::exp(-K * (s - T0) / 20.0);
                double diam_bound =
                    std::max(0.8 * std::exp(-K * (t - s) / 20.0), 12.0 * W / K);
                row.pass_mass = (row.mass >= mass_bound);
                row.pass_diam = (row.diam <= diam_bound);
                row.hypothesis_met = hyp;
                if (hyp) {
                    n_pass_m += row.pass_mass;
                    n_pass_d += row.pass_diam;
                    ++n_rows;
                } else {
                    ++n_flagged;
                }
                rep.rows.push_back(row);
            }
        }
    }
    rep.unflagged_rows = n_rows;
    if (n_rows > 0) {
        rep.pass_fraction_mass = static_cast<double>(n_pass_m) / n_rows;
        rep.pass_fraction_diam = static_cast<double>(n_pass_d) / n_rows;
    }
    if (n_rows + n_flagged > 0)
        rep.flagged_fraction = static_cast<double>(n_flagged) / (n_rows + n_flagged);
    return rep;
}

double NStarEstimate::d_n(double N, double K) const {
    return std::max(0.0, 5.0 / (101.0 * K) * (std::log(N) - log_n_star));
}

NStarEstimate estimate_N_star(double T0, double K) {
    NStarEstimate est;
    est.log_n_star = 4.0 * std::log(500.0) + 20.0 * K * T0;
    est.n_star = std::ceil(std::pow(500.0, 4.0) * std::exp(20.0 * K * T0));
    if (est.n_star < 9.2e18) est.n_star_int = static_cast<std::uint64_t>(est.n_star);
    return est;
}

}  // namespace kuramoto::mc
