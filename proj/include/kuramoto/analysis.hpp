#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kuramoto/flow.hpp"
#include "kuramoto/kinetic.hpp"
#include "kuramoto/report.hpp"
#include "kuramoto/transport.hpp"

namespace kuramoto::analysis {

inline constexpr double ALPHA_DEFAULT = PI / 6.0;
inline constexpr double BETA_DEFAULT = PI / 3.0;
inline constexpr double Q_THRESHOLD_DEFAULT = 1.0 / 3600.0;  // K Q R_k^3 slope cutoff

// Calibrated multipliers for the tolerance formulas and the unspecified
// universal constants. Every report records the values it used.
struct AnalysisConstants {
    double tol_scale = 1.0;

    double c_dis = 5.0;      // (Dis): tol = c*(dtheta+dt)*K^2*I_max
    double c_disr = 5.0;     // order-parameter relation
    double c_phidot = 5.0;   // angular-velocity bound
    double c_lateral = 5.0;  // lateral mass bound
    double c_inst = 8.0;     // antipodal instability
    double c_wtransport = 4.0;

    double gain_cali_c = 0.05;          // (Gain_cali) W/K <= C lambda^2 R0^2
    double gain_vs_loss_cali_c = 0.05;  // W/K < C lambda^2 (1-lambda) R0^2
    double decrease_cali_c = 0.05;      // (deccon) W/K <= C (1-lambda) lambda^2 R0^2

    double t0_mult = 20.0;           // t0 <= t0_mult / (K R0^2)
    double glen_mult = 40.0;         // sum of G_k lengths <= glen_mult/(K R_k^2)
    double l2_transient_q = 1.0;     // f2(t0) <= ||f0||_2^2 e^{4 q / R0}
    double t0_select_qprime = 4.0;   // Q' in the T0 selection formula
    double convexity_t0_mult = 20.0; // T0 <= mult/(K R0^2) log(1+sqrt(W)||f0||+1/R0)
};

// Per-step series derived from a kinetic trajectory: the raw observables plus
// smoothed/differentiated versions used by the inequality system.
struct TrajectoryDiagnostics {
    ModelParams params;
    double dt = 0.0;
    double dtheta = 0.0;
    std::vector<double> t;
    std::vector<double> R;
    std::vector<double> phi_unwrapped;
    std::vector<double> R_dot;         // centered differences
    std::vector<double> R_dot_smooth;  // 5-point moving average of R_dot
    std::vector<double> R2_dot;        // centered differences of R^2
    std::vector<double> phi_dot;
    std::vector<double> I;
    std::vector<double> dIdt_formula;
    std::vector<double> f2_total;
    std::vector<double> f2_chi_minus;
    std::vector<double> w2g_to_eq;

    static TrajectoryDiagnostics from(const KineticTrajectory& traj);
    double I_max() const;
    double f2_max() const;
};

// --- the inequality system -------------------------------------------------

// -2KR I <= dI/dt <= 2K I for the formula rate and the trajectory finite
// difference, plus the integrated two-sided bound.
InequalityReport check_dissipation_bounds(const TrajectoryDiagnostics& d,
                                          const AnalysisConstants& c = {});

// I - W^2 <= K d(R^2)/dt <= 3I + W^2.
InequalityReport check_dissipation_R_relation(const TrajectoryDiagnostics& d,
                                              const AnalysisConstants& c = {});

// |phi_dot| <= (1/R) sqrt(K d(R^2)/dt + W^2), at times with R >= 0.05.
InequalityReport check_phi_dot(const TrajectoryDiagnostics& d,
                               const AnalysisConstants& c = {});

// d/dt f^2(chi-) <= -K R sin(a) f^2(chi-) + 4K f^2(T) [W/K + sqrt(...) - R cos a]^+.
InequalityReport check_instability(const TrajectoryDiagnostics& d,
                                   double alpha = ALPHA_DEFAULT,
                                   const AnalysisConstants& c = {});

// rho(T \ (L+ u L-)) <= d(R^2)/dt/(K R^2 cos^2 a) + W^2/(K^2 R^2 cos^2 a).
InequalityReport check_mass_lateral(const KineticTrajectory& traj,
                                    const TrajectoryDiagnostics& d,
                                    double alpha = ALPHA_DEFAULT,
                                    const AnalysisConstants& c = {});

// Entropy production gain after t0: R^2(t0+d) - R^2(t0) >= lambda^4 R0^3 / 40
// for some d <= log(10)/(3 K R0).
InequalityReport check_entropy_production_gain(const TrajectoryDiagnostics& d, double t0,
                                               double lambda, double R0,
                                               const AnalysisConstants& c = {});

// min_t R(t) >= lambda R0.
InequalityReport check_R_lower_bound(const TrajectoryDiagnostics& d, double lambda,
                                     double R0, const AnalysisConstants& c = {});

// Cubic decrease-rate bound on the small-slope intervals.
InequalityReport check_decrease_rate(const TrajectoryDiagnostics& d, double lambda,
                                     double R0, const AnalysisConstants& c = {});

// W2g(f_t, f_s) <= int_t^s sqrt(I) dtau on sampled snapshot pairs.
InequalityReport check_transport_dissipation(const KineticTrajectory& traj,
                                             const TrajectoryDiagnostics& d,
                                             int n_pairs = 20,
                                             const AnalysisConstants& c = {});

struct ConvexityRegimeResult {
    InequalityReport report;
    double T0_meas = 0.0;
    double T0_bound = 0.0;  // convexity_t0_mult/(K R0^2) log(1 + sqrt(W)||f0|| + 1/R0)
    bool within_bound = false;
};
// First time after which R >= 3/5 and the lateral mass outside L+_beta decays
// exponentially for the rest of the run. Throws NeverEntered.
ConvexityRegimeResult check_convexity_regime(const KineticTrajectory& traj,
                                             const TrajectoryDiagnostics& d,
                                             double beta = BETA_DEFAULT,
                                             const AnalysisConstants& c = {});

struct UniquenessResult {
    InequalityReport report;
    double best_shift = 0.0;
    double min_distance = 0.0;
};
// Minimizes W2g(eqA, rotate(eqB, c)) over c; equilibria agree up to rotation.
UniquenessResult check_uniqueness(const EquilibriumState& a, const EquilibriumState& b,
                                  double tol = 1e-8);

// --- dyadic subdivision ------------------------------------------------------

struct SubdivisionInterval {
    double t_begin = 0.0;
    double t_end = 0.0;
    double t_tilde = 0.0;  // raw threshold-crossing time before the d_k extension
    int level = 0;
    bool good = false;
    bool terminal = false;  // last interval within [r_k, r_{k+1})
};

struct SubdivisionReport {
    double K = 1.0;
    double R0 = 0.0;
    double lambda = 0.0;
    double q_threshold = Q_THRESHOLD_DEFAULT;
    double alpha = ALPHA_DEFAULT;

    std::vector<double> r_times;   // r_0 .. r_{k*} (interpolated crossings)
    std::vector<double> R_levels;  // R_k
    int k_star = 0;
    int k0 = 0;
    std::vector<double> t_minus1;  // T_{-1}^k per level (inf -> quiet NaN)
    double t0 = 0.0;
    std::vector<SubdivisionInterval> intervals;
    std::vector<int> g_count, b_count;
    std::vector<double> mu_k, d_k, delta_k, D_k;

    // barrier data: F_k on [anchor_k, r_{k+1}) with entry value E_k
    std::vector<double> F_entry, F_anchor;
    double norm_f0_sq = 1.0;
    double l2_transient_q = 1.0;

    double T0_candidate = 0.0;
    bool hypo_subd_ok = false;  // (W/K <= C R0^3 and 1-lambda <= cos^2(a)/180 R0)

    double F_at(double t) const;
    int level_of(double t) const;
    InequalityReport invariants(const AnalysisConstants& c = {}) const;
};

SubdivisionReport subdivision_report(const TrajectoryDiagnostics& d,
                                     std::optional<double> lambda = std::nullopt,
                                     double Q = Q_THRESHOLD_DEFAULT,
                                     const AnalysisConstants& c = {});
// Series-only entry point (synthetic fixtures, CSV input).
SubdivisionReport subdivision_from_series(const std::vector<double>& times,
                                          const std::vector<double>& R, double K,
                                          std::optional<double> lambda = std::nullopt,
                                          double Q = Q_THRESHOLD_DEFAULT,
                                          double norm_f0_sq = 1.0,
                                          const AnalysisConstants& c = {});

// f^2 outside the eps-neighborhood of the evolved arc stays below the barrier.
InequalityReport check_L2_barrier(const KineticTrajectory& traj,
                                  const TrajectoryDiagnostics& d,
                                  const SubdivisionReport& sub,
                                  const AnalysisConstants& c = {});

// --- decay fitting -----------------------------------------------------------

struct DecayFit {
    double rate = 0.0;  // positive for decaying series
    double r2 = 0.0;
    double floor = 0.0;
    std::size_t points = 0;
};
// Least-squares slope of log(series) over [t_start, t_end], excluding samples
// at or below twice the floor value. Throws WindowBelowFloor.
DecayFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& series,
                        double t_start, double t_end, double floor_value);

}  // namespace kuramoto::analysis
