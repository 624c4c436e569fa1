#pragma once

#include <functional>
#include <vector>

#include "kuramoto/model.hpp"
#include "kuramoto/report.hpp"

namespace kuramoto {

// Closed arc {theta : d(theta, center) <= half_width}; half_width = pi is the
// full circle, half_width = 0 a single point.
struct Arc {
    double center = 0.0;      // canonical in [0, 2*pi)
    double half_width = 0.0;  // in [0, pi]

    bool contains(double theta) const { return circle_dist(theta, center) <= half_width; }
    double lo() const { return center - half_width; }  // not wrapped
    double hi() const { return center + half_width; }
};

// Arc of diameter pi - 2*alpha centered at phi (L^+) or at phi + pi (L^-).
inline Arc lateral_arc_plus(double phi, double alpha) {
    return Arc{wrap_angle(phi), 0.5 * PI - alpha};
}
inline Arc lateral_arc_minus(double phi, double alpha) {
    return Arc{wrap_angle(phi + PI), 0.5 * PI - alpha};
}

struct KineticTrajectory {
    ModelParams params;
    FrequencyGrid grid;
    int n_theta = 0;
    double dt = 0.0;

    // Per-step series (size steps + 1).
    std::vector<double> times;
    std::vector<double> R;
    std::vector<double> phi_unwrapped;  // continuous lift of phi
    std::vector<double> dissipation_series;
    std::vector<double> dissipation_rate_series;  // exact rate formula per step
    std::vector<double> f2_total_series;
    std::vector<double> f2_chi_minus_series;
    std::vector<double> w2g_to_eq_series;  // filled by simulate when eq given

    // Snapshots at stride (always includes first and last state).
    int snapshot_stride = 1;
    std::vector<double> snapshot_times;
    std::vector<KineticState> snapshots;

    double phi_at_step(std::size_t k) const { return wrap_angle(phi_unwrapped[k]); }
    std::size_t snapshot_index_at(double t) const;  // nearest snapshot
    std::size_t step_index_at(double t) const;      // nearest step
};

// v_j(theta) = omega_j - K R sin(theta - phi) at the n_theta + 1 cell edges
// (edge 0 and edge n_theta coincide).
std::vector<std::vector<double>> velocity_field(const KineticState& state,
                                                const ModelParams& params);

// One conservative upwind + two-stage SSP step; (R, phi) is recomputed at
// each stage. Throws CFLViolation if dt * max|v| / dtheta > 0.45.
KineticState step_kinetic(const KineticState& state, const ModelParams& params, double dt);

// I[f] = sum_j w_j sum_i (omega_j - K R sin(theta_i - phi))^2 h_j(theta_i) dtheta.
double dissipation(const KineticState& state, const ModelParams& params);

// Exact dI/dt: -K * double integral of ((u - u')^2 cos(theta - theta')) f f'.
double dissipation_rate_formula(const KineticState& state, const ModelParams& params);

struct OrderRates {
    double R_dot = 0.0;
    double R_phi_dot = 0.0;  // R * d(phi)/dt
};
// Throws PhiUndefined when R < R_PHASE_EPS.
OrderRates order_rates(const KineticState& state, const ModelParams& params);

// Overlap length of the cell [cell_lo, cell_lo + dth) with the arc.
double cell_arc_overlap(double cell_lo, double dth, const Arc& arc);

// rho_t(B) for B an arc, boundary cells weighted by fractional overlap.
double arc_mass(const KineticState& state, const Arc& arc);

// f^2(weight) = sum_j w_j g_dens_j sum_i weight(theta_i) h_j(theta_i)^2 dtheta.
double weighted_square_norm(const KineticState& state,
                            const std::function<double(double)>& weight);
double f2_total(const KineticState& state);  // weight == 1

// Smooth cutoff xi_{alpha,delta0} evaluated at theta - phi - pi: equals 1 on
// the core of the antipodal arc, 0 outside, logistic in the transition band.
double smooth_cutoff(double theta, double alpha, double delta0, double phi);
inline double smooth_cutoff(double theta, double phi) {
    return smooth_cutoff(theta, PI / 6.0, 0.5, phi);
}
double f2_chi_minus(const KineticState& state, double phi, double alpha = PI / 6.0,
                    double delta0 = 0.5);

// W_{2,g} from a grid state to the phase-locked equilibrium: per-fiber
// second moment about the atom (no transport solve needed).
double fibered_w2_to_equilibrium(const KineticState& state, const EquilibriumState& eq);

// Integrate (E-KS): fixed dt, snapshots every `snapshot_stride` steps.
// When `eq` is non-null the W2g-to-equilibrium series is recorded.
KineticTrajectory integrate_kinetic(const KineticState& initial, const ModelParams& params,
                                    double t_end, double dt, int snapshot_stride,
                                    const EquilibriumState* eq = nullptr);

// Initial condition builders (cell-averaged, renormalized per fiber).
KineticState make_uniform_state(const FrequencyGrid& grid, int n_theta);
KineticState make_vonmises_state(const FrequencyGrid& grid, int n_theta, double center,
                                 double concentration);
KineticState make_two_bump_state(const FrequencyGrid& grid, int n_theta,
                                 double c1, double c2, double w1, double w2,
                                 double kappa1, double kappa2);

}  // namespace kuramoto
