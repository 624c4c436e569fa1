#include "kuramoto/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kuramoto::analysis {

namespace {

std::vector<double> centered_diff(const std::vector<double>& y, double dt) {
    std::vector<double> d(y.size(), 0.0);
    for (std::size_t k = 1; k + 1 < y.size(); ++k) d[k] = (y[k + 1] - y[k - 1]) / (2 * dt);
    if (y.size() >= 2) {
        d.front() = (y[1] - y[0]) / dt;
        d.back() = (y[y.size() - 1] - y[y.size() - 2]) / dt;
    }
    return d;
}

std::vector<double> smooth5(const std::vector<double>& y) {
    std::vector<double> s(y.size());
    const int n = static_cast<int>(y.size());
    for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        int cnt = 0;
        for (int j = k - 2; j <= k + 2; ++j) {
            if (j >= 0 && j < n) {
                acc += y[j];
                ++cnt;
            }
        }
        s[k] = acc / cnt;
    }
    return s;
}

}  // namespace

TrajectoryDiagnostics TrajectoryDiagnostics::from(const KineticTrajectory& traj) {
    TrajectoryDiagnostics d;
    d.params = traj.params;
    d.dt = traj.dt;
    d.dtheta = TWO_PI / traj.n_theta;
    d.t = traj.times;
    d.R = traj.R;
    d.phi_unwrapped = traj.phi_unwrapped;
    d.I = traj.dissipation_series;
    d.dIdt_formula = traj.dissipation_rate_series;
    d.f2_total = traj.f2_total_series;
    d.f2_chi_minus = traj.f2_chi_minus_series;
    d.w2g_to_eq = traj.w2g_to_eq_series;
    d.R_dot = centered_diff(d.R, d.dt);
    d.R_dot_smooth = smooth5(d.R_dot);
    std::vector<double> R2(d.R.size());
    for (std::size_t k = 0; k < d.R.size(); ++k) R2[k] = d.R[k] * d.R[k];
    d.R2_dot = centered_diff(R2, d.dt);
    d.phi_dot = centered_diff(d.phi_unwrapped, d.dt);
    return d;
}

double TrajectoryDiagnostics::I_max() const {
    double m = 0.0;
    for (double v : I) m = std::max(m, v);
    return m;
}

double TrajectoryDiagnostics::f2_max() const {
    double m = 0.0;
    for (double v : f2_total) m = std::max(m, v);
    return m;
}

// ---------------------------------------------------------------------------

InequalityReport check_dissipation_bounds(const TrajectoryDiagnostics& d,
                                          const AnalysisConstants& c) {
    InequalityReport rep;
    rep.name = "dissipation_bounds";
    const double K = d.params.K;
    const double tol =
        c.tol_scale * c.c_dis * (d.dtheta + d.dt) * K * K * std::max(d.I_max(), 1e-12);
    rep.tol = tol;
    rep.tol_note = "c_dis*(dtheta+dt)*K^2*I_max, refinement-calibrated";
    rep.floor = d.dtheta * d.dtheta * K * K;

    for (std::size_t k = 1; k + 1 < d.t.size(); ++k) {
        double fd = (d.I[k + 1] - d.I[k - 1]) / (2 * d.dt);
        double up = 2 * K * d.I[k] - fd;
        double lo = fd + 2 * K * d.R[k] * d.I[k];
        rep.add(d.t[k], std::min(up, lo));
        // the exact rate obeys the same sandwich with only quadrature error
        double up_f = 2 * K * d.I[k] - d.dIdt_formula[k];
        double lo_f = d.dIdt_formula[k] + 2 * K * d.R[k] * d.I[k];
        rep.margins.back() = std::min(rep.margins.back(), std::min(up_f, lo_f));
    }

    // integrated form, in log space
    double cum_R = 0.0;
    double I0 = std::max(d.I.front(), 1e-300);
    double worst_int = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < d.t.size(); ++k) {
        cum_R += 0.5 * (d.R[k] + d.R[k - 1]) * d.dt;
        if (d.I[k] <= 1e-300) continue;
        double tol_int =
            c.tol_scale * c.c_dis * (d.dtheta + K * d.dt) * (1.0 + K * d.t[k]);
        double lo = std::log(d.I[k]) - (std::log(I0) - 2 * K * cum_R) + tol_int;
        double hi = (std::log(I0) + 2 * K * d.t[k]) - std::log(d.I[k]) + tol_int;
        worst_int = std::min({worst_int, lo, hi});
    }
    rep.notes.push_back("integrated log-margin min=" + std::to_string(worst_int));
    if (worst_int < 0.0)
        rep.add(d.t.back(), worst_int);  // surface the failure
    return rep;
}

InequalityReport check_dissipation_R_relation(const TrajectoryDiagnostics& d,
                                              const AnalysisConstants& c) {
    InequalityReport rep;
    rep.name = "dissipation_order_relation";
    const double K = d.params.K;
    const double W = d.params.W;
    rep.tol = c.tol_scale * c.c_disr * (d.dtheta + d.dt) * K * K *
              std::max(d.I_max(), W * W);
    rep.tol_note = "c_disr*(dtheta+dt)*K^2*max(I_max, W^2)";
    for (std::size_t k = 1; k + 1 < d.t.size(); ++k) {
        double mid = K * d.R2_dot[k];
        double lo = mid - (d.I[k] - W * W);
        double hi = (3 * d.I[k] + W * W) - mid;
        rep.add(d.t[k], std::min(lo, hi));
    }
    return rep;
}

InequalityReport check_phi_dot(const TrajectoryDiagnostics& d,
                               const AnalysisConstants& c) {
    InequalityReport rep;
    rep.name = "phi_dot_bound";
    const double K = d.params.K;
    const double W = d.params.W;
    rep.tol = c.tol_scale * c.c_phidot * (d.dtheta + d.dt) * K;
    rep.tol_note = "c_phidot*(dtheta+dt)*K; gated at R >= 0.05";
    std::size_t gated = 0;
    for (std::size_t k = 1; k + 1 < d.t.size(); ++k) {
        if (d.R[k] < 0.05) {
            ++gated;
            continue;
        }
        double arg = std::max(0.0, K * d.R2_dot[k] + W * W);
        double rhs = std::sqrt(arg) / d.R[k];
        rep.add(d.t[k], rhs - std::fabs(d.phi_dot[k]));
    }
    if (gated) rep.notes.push_back("samples gated at R<0.05: " + std::to_string(gated));
    return rep;
}

InequalityReport check_instability(const TrajectoryDiagnostics& d, double alpha,
                                   const AnalysisConstants& c) {
    InequalityReport rep;
    rep.name = "antipodal_instability";
    const double K = d.params.K;
    const double W = d.params.W;
    rep.tol = c.tol_scale * c.c_inst * K * std::max(d.f2_max(), 1e-12) *
              (d.dtheta + K * d.dt);
    rep.tol_note = "c_inst*K*f2_max*(dtheta+K*dt)";
    for (std::size_t k = 1; k + 1 < d.t.size(); ++k) {
        double R = std::max(d.R[k], 1e-9);
        double fd = (d.f2_chi_minus[k + 1] - d.f2_chi_minus[k - 1]) / (2 * d.dt);
        double inner = 2 * d.R_dot_smooth[k] / (K * R) + W * W / (K * K * R * R);
        double bracket = W / K + std::sqrt(std::max(0.0, inner)) - R * std::cos(alpha);
        bracket = std::max(0.0, bracket);
        double rhs = -K * R * std::sin(alpha) * d.f2_chi_minus[k] +
                     4 * K * d.f2_total[k] * bracket;
        rep.add(d.t[k], rhs - fd);
    }
    return rep;
}

InequalityReport check_mass_lateral(const KineticTrajectory& traj,
                                    const TrajectoryDiagnostics& d, double alpha,
                                    const AnalysisConstants& c) {
    InequalityReport rep;
    rep.name = "lateral_mass";
    const double K = d.params.K;
    const double W = d.params.W;
    const double cos2a = std::cos(alpha) * std::cos(alpha);
    rep.tol = c.tol_scale * c.c_lateral * (d.dtheta + K * d.dt);
    rep.tol_note = "c_lateral*(dtheta+K*dt); gated at R >= 0.05";
    std::size_t gated = 0;
    for (std::size_t s = 0; s < traj.snapshot_times.size(); ++s) {
        std::size_t k = traj.step_index_at(traj.snapshot_times[s]);
        if (k == 0 || k + 1 >= d.t.size()) continue;
        double R = d.R[k];
        if (R < 0.05) {
            ++gated;
            continue;
        }
        double phi = traj.phi_at_step(k);
        Arc plus = lateral_arc_plus(phi, alpha);
        Arc minus = lateral_arc_minus(phi, alpha);
        double inside = arc_mass(traj.snapshots[s], plus) + arc_mass(traj.snapshots[s], minus);
        double outside = std::max(0.0, 1.0 - inside);
        double rhs = d.R2_dot[k] / (K * R * R * cos2a) + W * W / (K * K * R * R * cos2a);
        rep.add(d.t[k], rhs - outside);
    }
    if (gated) rep.notes.push_back("snapshots gated at R<0.05: " + std::to_string(gated));
    return rep;
}

InequalityReport check_entropy_production_gain(const TrajectoryDiagnostics& d, double t0,
                                               double lambda, double R0,
                                               const AnalysisConstants& c) {
    InequalityReport rep;
    rep.name = "entropy_production_gain";
    const double K = d.params.K;
    const double W = d.params.W;
    const double cos2a = 0.75;  // alpha = pi/6
    std::size_t k0 = static_cast<std::size_t>(std::llround(t0 / d.dt));
    if (k0 >= d.t.size()) {
        rep.skipped = true;
        rep.skip_reason = "t0 outside the series";
        return rep;
    }
    double Rt0 = d.R[k0];
    double slope_needed = 0.25 * K * cos2a * lambda * lambda * lambda * R0 * R0 * R0;
    if (!(std::sqrt(2.0) * R0 >= Rt0 && Rt0 > lambda * R0)) {
        rep.skipped = true;
        rep.skip_reason = "R(t0) outside (lambda R0, sqrt(2) R0]";
        return rep;
    }
    if (!(d.R_dot_smooth[k0] >= slope_needed)) {
        rep.skipped = true;
        rep.skip_reason = "Rdot(t0) below the entry slope K/4 cos^2(a) l^3 R0^3";
        return rep;
    }
    if (!(W / K <= c.gain_cali_c * lambda * lambda * R0 * R0)) {
        rep.skipped = true;
        rep.skip_reason = "(Gain_cali) W/K <= C lambda^2 R0^2 fails";
        return rep;
    }
    double d_max = std::log(10.0) / (3 * K * R0);
    double gain_needed = std::pow(lambda, 4.0) * R0 * R0 * R0 / 40.0;
    rep.tol = c.tol_scale * 5.0 * (d.dtheta + d.dt) * R0 * R0;
    rep.tol_note = "5*(dtheta+dt)*R0^2 slack on the R^2 gain";
    double best = -std::numeric_limits<double>::infinity();
    std::size_t k_end = std::min(d.t.size() - 1,
                                 k0 + static_cast<std::size_t>(std::ceil(d_max / d.dt)));
    for (std::size_t k = k0 + 1; k <= k_end; ++k)
        best = std::max(best, d.R[k] * d.R[k] - Rt0 * Rt0);
    rep.add(d.t[k_end], best - gain_needed);
    rep.notes.push_back("gain=" + std::to_string(best) +
                        " needed=" + std::to_string(gain_needed));
    return rep;
}

InequalityReport check_R_lower_bound(const TrajectoryDiagnostics& d, double lambda,
                                     double R0, const AnalysisConstants& c) {
    InequalityReport rep;
    rep.name = "order_parameter_lower_bound";
    const double K = d.params.K;
    const double W = d.params.W;
    if (!(1.0 - lambda > 0.0 && 1.0 - lambda < R0 / 120.0)) {
        rep.skipped = true;
        rep.skip_reason = "1 - lambda outside (0, R0/120)";
        return rep;
    }
    if (!(W / K < c.gain_vs_loss_cali_c * lambda * lambda * (1.0 - lambda) * R0 * R0)) {
        rep.notes.push_back("(Gain_vs_loss_cali) not met with C=" +
                            std::to_string(c.gain_vs_loss_cali_c) +
                            "; bound checked anyway");
    }
    rep.tol = c.tol_scale * 2.0 * (d.dtheta + d.dt);
    rep.tol_note = "2*(dtheta+dt) slack on R";
    double min_R = std::numeric_limits<double>::infinity();
    double argmin_t = 0.0;
    for (std::size_t k = 0; k < d.t.size(); ++k) {
        if (d.R[k] < min_R) {
            min_R = d.R[k];
            argmin_t = d.t[k];
        }
    }
    rep.add(argmin_t, min_R - lambda * R0);
    return rep;
}

InequalityReport check_decrease_rate(const TrajectoryDiagnostics& d, double lambda,
                                     double R0, const AnalysisConstants& c) {
    InequalityReport rep;
    rep.name = "decrease_rate";
    const double K = d.params.K;
    const double W = d.params.W;
    const double cos2a = 0.75;
    const double slope_cut = 0.25 * K * cos2a * std::pow(lambda, 3.0) * std::pow(R0, 3.0);
    const double cos2g = (1.0 - lambda) * R0 / 5.0;
    const double sing = std::sqrt(std::max(1e-12, 1.0 - cos2g));
    const double b_coef = lambda * R0 + 0.6 * (1.0 - lambda) * R0;
    const double c_coef = 0.6 * (1.0 - lambda) * lambda * lambda * R0 * R0 * R0;
    rep.tol = c.tol_scale * 5.0 * (d.dtheta + d.dt) * K;
    rep.tol_note = "5*(dtheta+dt)*K slack on d(R^2)/dt";
    bool cali = (W / K <= c.decrease_cali_c * (1.0 - lambda) * lambda * lambda * R0 * R0);
    if (!cali)
        rep.notes.push_back("(deccon) calibration not met; intervals flagged");

    std::size_t k = 1;
    int n_intervals = 0, n_qualifying = 0;
    while (k + 1 < d.t.size()) {
        if (d.R_dot_smooth[k] > slope_cut) {
            ++k;
            continue;
        }
        std::size_t start = k;
        while (k + 1 < d.t.size() && d.R_dot_smooth[k] <= slope_cut) ++k;
        std::size_t end = k;
        ++n_intervals;
        // entry hypotheses at the interval opening
        if (!(d.R_dot_smooth[start] <= 0.0) || !(d.R[start] >= R0) || !cali) continue;
        ++n_qualifying;
        for (std::size_t i = start; i < end; ++i) {
            double R = d.R[i];
            double cubic = -R * R * R + b_coef * R * R - c_coef;
            double rhs = K * cos2g / (2.0 * sing) * cubic;
            rep.add(d.t[i], d.R2_dot[i] - rhs);
        }
    }
    rep.notes.push_back("small-slope intervals=" + std::to_string(n_intervals) +
                        " qualifying=" + std::to_string(n_qualifying));
    if (rep.margins.empty()) {
        rep.skipped = true;
        rep.skip_reason = "no qualifying small-slope interval";
    }
    return rep;
}

InequalityReport check_transport_dissipation(const KineticTrajectory& traj,
                                             const TrajectoryDiagnostics& d, int n_pairs,
                                             const AnalysisConstants& c) {
    InequalityReport rep;
    rep.name = "transport_dissipation";
    const double K = d.params.K;
    rep.tol = c.tol_scale * c.c_wtransport * (d.dtheta + K * d.dt);
    rep.tol_note = "c_wtransport*(dtheta+K*dt): W2g quantization plus quadrature";
    rep.floor = d.dtheta;

    std::vector<double> cum(d.t.size(), 0.0);
    for (std::size_t k = 1; k < d.t.size(); ++k)
        cum[k] = cum[k - 1] +
                 0.5 * (std::sqrt(std::max(0.0, d.I[k])) +
                        std::sqrt(std::max(0.0, d.I[k - 1]))) *
                     d.dt;

    const std::size_t S = traj.snapshots.size();
    if (S < 2) {
        rep.skipped = true;
        rep.skip_reason = "needs at least two snapshots";
        return rep;
    }
    for (int p = 0; p < n_pairs; ++p) {
        std::size_t a = (p * 7919) % S;
        std::size_t b = (p * 104729 + S / 2) % S;
        if (a == b) b = (b + 1) % S;
        if (a > b) std::swap(a, b);
        double w2g = transport::fibered_w2(traj.snapshots[a], traj.snapshots[b]);
        std::size_t ka = traj.step_index_at(traj.snapshot_times[a]);
        std::size_t kb = traj.step_index_at(traj.snapshot_times[b]);
        double rhs = cum[kb] - cum[ka];
        rep.add(traj.snapshot_times[b], rhs - w2g);
    }
    return rep;
}

ConvexityRegimeResult check_convexity_regime(const KineticTrajectory& traj,
                                             const TrajectoryDiagnostics& d, double beta,
                                             const AnalysisConstants& c) {
    ConvexityRegimeResult res;
    res.report.name = "convexity_regime";
    const double K = d.params.K;
    const double W = d.params.W;
    res.report.tol = c.tol_scale * d.dtheta;
    res.report.tol_note = "dtheta-scale slack on the lateral tail mass";

    const std::size_t S = traj.snapshot_times.size();
    std::vector<double> lat(S), ts(S);
    for (std::size_t s = 0; s < S; ++s) {
        std::size_t k = traj.step_index_at(traj.snapshot_times[s]);
        Arc plus = lateral_arc_plus(traj.phi_at_step(k), beta);
        lat[s] = std::max(0.0, 1.0 - arc_mass(traj.snapshots[s], plus));
        ts[s] = traj.snapshot_times[s];
    }
    std::vector<double> suffix_min_R(d.R.size());
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = d.R.size(); k-- > 0;) {
        m = std::min(m, d.R[k]);
        suffix_min_R[k] = m;
    }

    std::optional<std::size_t> entry;
    for (std::size_t cand = 0; cand < S; ++cand) {
        std::size_t kc = traj.step_index_at(ts[cand]);
        if (suffix_min_R[kc] < 0.6) continue;
        bool ok = true;
        for (std::size_t s = cand; s < S; ++s) {
            double bound = std::exp(-K * (ts[s] - ts[cand]) / 20.0) + res.report.tol;
            if (lat[s] > bound) {
                ok = false;
                break;
            }
        }
        if (ok) {
            entry = cand;
            break;
        }
    }
    if (!entry) throw NeverEntered("convexity regime not entered during the run");

    res.T0_meas = ts[*entry];
    double norm_f0 = std::sqrt(std::max(0.0, d.f2_total.front()));
    double R0 = std::max(d.R.front(), 1e-6);
    res.T0_bound = c.convexity_t0_mult / (K * R0 * R0) *
                   std::log(1.0 + std::sqrt(W) * norm_f0 + 1.0 / R0);
    res.within_bound = res.T0_meas <= res.T0_bound;
    for (std::size_t s = *entry; s < S; ++s) {
        double bound = std::exp(-K * (ts[s] - res.T0_meas) / 20.0);
        res.report.add(ts[s], bound - lat[s]);
    }
    res.report.notes.push_back("T0_meas=" + std::to_string(res.T0_meas) +
                               " T0_bound=" + std::to_string(res.T0_bound));
    if (!res.within_bound) res.report.add(res.T0_meas, res.T0_bound - res.T0_meas);
    return res;
}

UniquenessResult check_uniqueness(const EquilibriumState& a, const EquilibriumState& b,
                                  double tol) {
    if (!a.grid.same_as(b.grid, 1e-9))
        throw MarginalMismatch("check_uniqueness: equilibria on different grids");

    auto support_width = [](const EquilibriumState& e) {
        std::vector<double> th = e.atom_theta;
        std::sort(th.begin(), th.end());
        double best_gap = 0.0;
        for (std::size_t i = 0; i < th.size(); ++i) {
            double next = (i + 1 < th.size()) ? th[i + 1] : th[0] + TWO_PI;
            best_gap = std::max(best_gap, next - th[i]);
        }
        return TWO_PI - best_gap;
    };
    if (support_width(a) >= PI / 2 || support_width(b) >= PI / 2)
        throw DomainError("check_uniqueness: support diameter must be < pi/2");

    auto dist2_at = [&](double c) {
        double acc = 0.0;
        for (std::size_t j = 0; j < a.grid.size(); ++j) {
            double d = circle_dist(a.atom_theta[j], b.atom_theta[j] + c);
            acc += a.grid.weights[j] * d * d;
        }
        return acc;
    };

    const int n_scan = 4096;
    double best_c = 0.0, best = dist2_at(0.0);
    for (int k = 1; k < n_scan; ++k) {
        double cc = TWO_PI * k / n_scan;
        double v = dist2_at(cc);
        if (v < best) {
            best = v;
            best_c = cc;
        }
    }
    double lo = best_c - TWO_PI / n_scan, hi = best_c + TWO_PI / n_scan;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = dist2_at(x1), f2 = dist2_at(x2);
    for (int it = 0; it < 120; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = dist2_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = dist2_at(x2);
        }
    }
    UniquenessResult res;
    res.best_shift = wrap_angle(0.5 * (lo + hi));
    res.min_distance = std::sqrt(std::max(0.0, dist2_at(0.5 * (lo + hi))));
    res.report.name = "uniqueness_up_to_rotation";
    res.report.tol = tol;
    res.report.tol_note = "absolute bound on the optimally rotated W2g";
    res.report.add(0.0, tol - res.min_distance);
    res.report.notes.push_back("best_shift=" + std::to_string(res.best_shift));
    return res;
}

// ---------------------------------------------------------------------------
// Dyadic subdivision.
// ---------------------------------------------------------------------------

double SubdivisionReport::F_at(double t) const {
    if (F_entry.empty() || t < F_anchor[k0]) return norm_f0_sq;
    int k = k0;
    for (int q = k0; q <= k_star; ++q)
        if (F_anchor[q] <= t) k = q;
    double tau = t - F_anchor[k];
    double Rk = R_levels[k];
    double up = 2.0 * K * Rk;
    double down = 0.5 * K * Rk * std::sin(alpha);
    if (tau <= D_k[k]) return F_entry[k] * std::exp(up * tau);
    return F_entry[k] * std::exp(up * D_k[k]) * std::exp(-down * (tau - D_k[k]));
}

int SubdivisionReport::level_of(double t) const {
    int k = 0;
    for (std::size_t q = 0; q < r_times.size(); ++q)
        if (r_times[q] <= t) k = static_cast<int>(q);
    return k;
}

InequalityReport SubdivisionReport::invariants(const AnalysisConstants& c) const {
    InequalityReport rep;
    rep.name = "subdivision_invariants";
    rep.tol = 0.0;
    rep.tol_note = "combinatorial bounds, exact";
    for (int k = k0; k <= k_star; ++k) {
        rep.add(r_times[k], static_cast<double>(g_count[k] + 1 - b_count[k]));
        double bound = 200.0 * (2.0 - lambda * lambda) / R_levels[k] + 5.0;
        rep.add(r_times[k], bound - g_count[k]);
        double glen = 0.0;
        for (const auto& iv : intervals)
            if (iv.level == k && iv.good) glen += iv.t_tilde - iv.t_begin;
        rep.add(r_times[k], c.glen_mult / (K * R_levels[k] * R_levels[k]) - glen);
    }
    if (std::isfinite(t0))
        rep.add(t0, c.t0_mult / (K * R0 * R0) - t0);
    if (!F_entry.empty()) {
        // uniform barrier cap with B computed from the run's D_k sums
        double sum_d = 0.0;
        for (int k = k0; k <= k_star; ++k) sum_d += 2.0 * K * R_levels[k] * D_k[k];
        double B = (4.0 * l2_transient_q / R0 + sum_d) * K * R0 /
                   std::log(1.0 + 1.0 / R0);
        double cap = norm_f0_sq * std::exp(B / (K * R0) * std::log(1.0 + 1.0 / R0));
        double maxF = 0.0;
        for (int k = k0; k <= k_star; ++k)
            maxF = std::max(maxF, F_entry[k] * std::exp(2.0 * K * R_levels[k] * D_k[k]));
        rep.add(t0, cap * (1.0 + 1e-12) - maxF);
    }
    return rep;
}

namespace {

SubdivisionReport build_subdivision(const std::vector<double>& times,
                                    const std::vector<double>& R, double K, double W,
                                    std::optional<double> lambda_opt, double Q,
                                    double norm_f0_sq, const AnalysisConstants& c) {
    if (times.size() < 3) throw ConfigError("subdivision: series too short");
    const double dt = times[1] - times[0];
    for (double r : R)
        if (r > 1.0 + 1e-9) throw DegenerateTrajectory("subdivision: R exceeds 1");

    SubdivisionReport rep;
    rep.K = K;
    rep.R0 = R.front();
    rep.lambda = lambda_opt.value_or(1.0 - rep.R0 / 240.0);
    rep.q_threshold = Q;
    rep.norm_f0_sq = norm_f0_sq;
    rep.l2_transient_q = c.l2_transient_q;
    const double R0 = rep.R0;
    const double lambda = rep.lambda;
    const double cos2a = std::cos(rep.alpha) * std::cos(rep.alpha);
    rep.hypo_subd_ok =
        (W / K <= R0 * R0 * R0) && (1.0 - lambda <= cos2a / 180.0 * R0 + 1e-15);

    // dyadic crossing times (linear interpolation of R^2 between samples)
    std::vector<double> R2(R.size());
    for (std::size_t i = 0; i < R.size(); ++i) R2[i] = R[i] * R[i];
    rep.r_times = {times.front()};
    rep.R_levels = {R0};
    std::vector<std::size_t> r_idx = {0};
    while (true) {
        double target = 2.0 * rep.R_levels.back() * rep.R_levels.back();
        if (target > 1.0 + 1e-12) break;
        std::size_t from = r_idx.back();
        std::size_t hit = R.size();
        for (std::size_t i = from; i < R.size(); ++i) {
            if (R2[i] >= target) {
                hit = i;
                break;
            }
        }
        if (hit == R.size()) break;
        double t_cross = times[hit];
        if (hit > 0 && R2[hit] > R2[hit - 1]) {
            double frac = (target - R2[hit - 1]) / (R2[hit] - R2[hit - 1]);
            t_cross = times[hit - 1] + frac * dt;
        }
        rep.r_times.push_back(t_cross);
        rep.R_levels.push_back(std::sqrt(target));
        r_idx.push_back(hit);
    }
    rep.k_star = static_cast<int>(rep.r_times.size()) - 1;

    std::vector<double> rdot = smooth5(centered_diff(R, dt));

    rep.t_minus1.assign(rep.k_star + 1, std::numeric_limits<double>::quiet_NaN());
    double t0 = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= rep.k_star; ++k) {
        double cut = K * Q * std::pow(rep.R_levels[k], 3.0);
        for (std::size_t i = r_idx[k]; i < times.size(); ++i) {
            if (rdot[i] <= cut) {
                rep.t_minus1[k] = times[i];
                break;
            }
        }
        if (!std::isnan(rep.t_minus1[k])) t0 = std::min(t0, rep.t_minus1[k]);
    }
    rep.t0 = t0;
    rep.k0 = 0;
    if (std::isfinite(t0))
        for (int k = 0; k <= rep.k_star; ++k)
            if (rep.r_times[k] <= t0) rep.k0 = k;

    rep.mu_k.resize(rep.k_star + 1);
    rep.d_k.resize(rep.k_star + 1);
    rep.delta_k.resize(rep.k_star + 1);
    rep.D_k.assign(rep.k_star + 1, 0.0);
    rep.g_count.assign(rep.k_star + 1, 0);
    rep.b_count.assign(rep.k_star + 1, 0);
    for (int k = 0; k <= rep.k_star; ++k) {
        double Rk = rep.R_levels[k];
        rep.mu_k[k] = 0.25 * cos2a * std::pow(lambda, 3.0) * Rk * Rk * Rk;
        rep.d_k[k] = std::log(10.0) / (3.0 * K * Rk);
        rep.delta_k[k] = std::log(1.0 / Rk) / (K * Rk);
    }

    if (!std::isfinite(t0)) return rep;  // slope never dropped below the cutoff

    auto idx_of = [&](double t) {
        return static_cast<std::size_t>(
            std::clamp(std::ceil((t - times.front()) / dt - 1e-9), 0.0,
                       double(times.size() - 1)));
    };
    auto level_end = [&](int k) {
        return (k < rep.k_star) ? rep.r_times[k + 1] : times.back();
    };
    std::size_t i = idx_of(t0);
    while (times[i] < times.back() - 0.5 * dt) {
        double t_l = times[i];
        int k = 0;
        for (int q = 0; q <= rep.k_star; ++q)
            if (rep.r_times[q] <= t_l + 1e-12) k = q;
        double bound = level_end(k);
        double cut = K * rep.mu_k[k];
        SubdivisionInterval iv;
        iv.t_begin = t_l;
        iv.level = k;
        iv.good = (rdot[i] >= cut);
        std::size_t j = i + 1;
        while (j < times.size() && times[j] < bound - 0.5 * dt &&
               ((iv.good && rdot[j] >= cut) || (!iv.good && rdot[j] < cut)))
            ++j;
        double t_raw = std::min(times[std::min(j, times.size() - 1)], bound);
        if (iv.good) {
            iv.t_tilde = t_raw;
            iv.t_end = (t_raw + rep.d_k[k] <= bound) ? t_raw + rep.d_k[k] : bound;
        } else {
            iv.t_tilde = t_raw;
            iv.t_end = t_raw;
        }
        iv.terminal = (iv.t_end >= bound - 0.5 * dt);
        rep.intervals.push_back(iv);
        (iv.good ? rep.g_count[k] : rep.b_count[k])++;
        std::size_t next = idx_of(iv.t_end);
        i = std::max(next, i + 1);
        if (i >= times.size()) break;
    }

    for (int k = rep.k0; k <= rep.k_star; ++k) {
        double glen = 0.0;
        for (const auto& iv : rep.intervals)
            if (iv.level == k && iv.good) glen += iv.t_tilde - iv.t_begin;
        rep.D_k[k] = std::max(rep.b_count[k], rep.g_count[k]) *
                         (rep.delta_k[k] + rep.d_k[k]) +
                     glen;
    }

    rep.F_entry.assign(rep.k_star + 1, 0.0);
    rep.F_anchor.assign(rep.k_star + 1, 0.0);
    rep.F_entry[rep.k0] = norm_f0_sq * std::exp(4.0 * c.l2_transient_q / R0);
    rep.F_anchor[rep.k0] = t0;
    for (int k = rep.k0 + 1; k <= rep.k_star; ++k) {
        rep.F_anchor[k] = rep.r_times[k];
        double tau = rep.r_times[k] - rep.F_anchor[k - 1];
        double Rk = rep.R_levels[k - 1];
        double v;
        if (tau <= rep.D_k[k - 1])
            v = rep.F_entry[k - 1] * std::exp(2.0 * K * Rk * tau);
        else
            v = rep.F_entry[k - 1] * std::exp(2.0 * K * Rk * rep.D_k[k - 1]) *
                std::exp(-0.5 * K * Rk * std::sin(rep.alpha) * (tau - rep.D_k[k - 1]));
        rep.F_entry[k] = v;
    }

    double Rks = rep.R_levels[rep.k_star];
    double sina = std::sin(rep.alpha);
    double norm_f0 = std::sqrt(std::max(norm_f0_sq, 0.0));
    double term_mass =
        4.0 / (K * Rks * sina) *
        std::max(0.0, std::log(4.0 * std::sqrt(PI) * std::sqrt(W) * norm_f0 * 120.0 / Rks));
    double term_tail = (c.t0_select_qprime + 16.0) / (2.0 * K * R0) *
                       std::log(1.0 + 1.0 / (40.0 * R0));
    rep.T0_candidate = rep.r_times[rep.k_star] + rep.D_k[rep.k_star] + term_mass + term_tail;
    return rep;
}

}  // namespace

SubdivisionReport subdivision_report(const TrajectoryDiagnostics& d,
                                     std::optional<double> lambda, double Q,
                                     const AnalysisConstants& c) {
    return build_subdivision(d.t, d.R, d.params.K, d.params.W, lambda, Q,
                             d.f2_total.empty() ? 1.0 : d.f2_total.front(), c);
}

SubdivisionReport subdivision_from_series(const std::vector<double>& times,
                                          const std::vector<double>& R, double K,
                                          std::optional<double> lambda, double Q,
                                          double norm_f0_sq, const AnalysisConstants& c) {
    return build_subdivision(times, R, K, 0.0, lambda, Q, norm_f0_sq, c);
}

InequalityReport check_L2_barrier(const KineticTrajectory& traj,
                                  const TrajectoryDiagnostics& d,
                                  const SubdivisionReport& sub,
                                  const AnalysisConstants& c) {
    InequalityReport rep;
    rep.name = "l2_barrier";
    if (!sub.hypo_subd_ok) {
        rep.skipped = true;
        rep.skip_reason = "(Hypo-subd) calibration fails for this run";
        return rep;
    }
    if (!std::isfinite(sub.t0) || sub.F_entry.empty()) {
        rep.skipped = true;
        rep.skip_reason = "subdivision has no attractor entry time";
        return rep;
    }
    const double eps = sub.R0 / 15.0;
    double cos2g = std::min(1.0, sub.R_levels[sub.k0] / 30.0);
    double gamma = std::acos(std::sqrt(cos2g));
    double half_width = PI / 2 - gamma;

    rep.tol = c.tol_scale * 5.0 * d.dtheta * std::max(d.f2_max(), 1e-12);
    rep.tol_note = "5*dtheta*f2_max quadrature slack";
    rep.floor = d.dtheta * d.f2_max();

    std::size_t s0 = traj.snapshot_index_at(sub.t0);
    double birth = traj.snapshot_times[s0];
    std::size_t step0 = traj.step_index_at(birth);
    Arc seed{traj.phi_at_step(step0), half_width};
    auto set = flow::EvolvingSet::uniform_arc(birth, traj.grid.size(), seed);
    auto field = flow::FlowField::from_trajectory(traj);

    for (std::size_t s = s0; s < traj.snapshot_times.size(); ++s) {
        double tsnap = traj.snapshot_times[s];
        auto evolved = flow::evolve_set(field, set, tsnap);
        flow::EvolvingSet complement;
        complement.birth = tsnap;
        complement.fiber_arcs.resize(traj.grid.size());
        bool full = false;
        try {
            auto grown = flow::arc_neighborhood(evolved, eps);
            for (std::size_t j = 0; j < traj.grid.size(); ++j) {
                if (grown.fiber_arcs[j].empty()) {
                    complement.fiber_arcs[j].push_back(Arc{0.0, PI});
                } else {
                    const Arc& g = grown.fiber_arcs[j][0];
                    complement.fiber_arcs[j].push_back(
                        Arc{wrap_angle(g.center + PI), PI - g.half_width});
                }
            }
        } catch (const ConfigError&) {
            full = true;
        }
        if (full) {
            for (std::size_t j = 0; j < traj.grid.size(); ++j)
                complement.fiber_arcs[j].push_back(Arc{0.0, PI});
        }
        double f2_out = flow::f2_over_set(traj.snapshots[s], complement);
        rep.add(tsnap, sub.F_at(tsnap) - f2_out);
    }
    return rep;
}

DecayFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& series,
                        double t_start, double t_end, double floor_value) {
    DecayFit fit;
    fit.floor = floor_value;
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < t_start || times[k] > t_end) continue;
        if (!(series[k] > 2.0 * floor_value) || series[k] <= 0.0) continue;
        xs.push_back(times[k]);
        ys.push_back(std::log(series[k]));
    }
    if (xs.size() < 3)
        throw WindowBelowFloor("fit_decay_rate: fewer than 3 samples above twice the floor");
    double n = static_cast<double>(xs.size());
    double sx = std::accumulate(xs.begin(), xs.end(), 0.0);
    double sy = std::accumulate(ys.begin(), ys.end(), 0.0);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += xs[k] * xs[k];
        sxy += xs[k] * ys[k];
        syy += ys[k] * ys[k];
    }
    double denom = n * sxx - sx * sx;
    double slope = (n * sxy - sx * sy) / denom;
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0.0;
    double intercept = (sy - slope * sx) / n;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        double e = ys[k] - (intercept + slope * xs[k]);
        ss_res += e * e;
    }
    fit.rate = -slope;
    fit.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
    fit.points = xs.size();
    return fit;
}

}  // namespace kuramoto::analysis
