#pragma once

#include <optional>
#include <vector>

#include "kuramoto/kinetic.hpp"
#include "kuramoto/report.hpp"

namespace kuramoto::flow {

// Velocity reconstruction from a trajectory's stored (R, phi) samples,
// piecewise linear in t. This is exactly the field the solver used, not a
// re-derivation from snapshots.
struct FlowField {
    ModelParams params;
    FrequencyGrid grid;
    double t_begin = 0.0;
    double dt = 0.0;
    std::vector<double> R;              // per sample
    std::vector<double> phi_unwrapped;  // per sample

    static FlowField from_trajectory(const KineticTrajectory& traj);
    // Frozen-coefficient field, for closed-form checks.
    static FlowField frozen(const ModelParams& params, const FrequencyGrid& grid,
                            double R_const, double phi_const, double t_begin,
                            double t_end, double dt);

    double t_end() const { return t_begin + dt * (R.size() - 1); }
    double R_at(double t) const;
    double phi_at(double t) const;  // unwrapped
    // omega_j - K R(t) sin(theta - phi(t))
    double speed(double theta, std::size_t fiber, double t) const;
};

// Union of per-fiber arcs transported by the characteristic flow.
struct EvolvingSet {
    double birth = 0.0;
    std::vector<std::vector<Arc>> fiber_arcs;  // one list per fiber

    static EvolvingSet uniform_arc(double birth, std::size_t n_fibers, const Arc& arc);
    bool empty() const;
};

// Integrates d(theta)/ds = omega_j - K R(s) sin(theta - phi(s)) by RK4 with
// the trajectory step. Backward integration (t < t0) is supported for
// invertibility checks. Throws OutOfRange outside the stored samples.
double flow_point(const FlowField& field, double theta, std::size_t fiber, double t0,
                  double t);

EvolvingSet evolve_set(const FlowField& field, const EvolvingSet& set, double t);

// Smallest covering arc of the theta-projection; nullopt when the arcs wrap
// the full circle.
std::optional<Arc> projection_hull(const EvolvingSet& set);

// inf over pairs of points in the projection of cos(theta - theta').
double min_pair_cosine_value(const EvolvingSet& set);

// f^2 over per-fiber arcs with fractional boundary cells.
double f2_over_set(const KineticState& state, const EvolvingSet& set);
// Mass of the set (per-fiber arcs) in the given state.
double set_mass(const KineticState& state, const EvolvingSet& set);

struct SlidingNormResult {
    double value = 0.0;        // f^2(A_{t0,t})
    InequalityReport report;   // (GL2) growth-bound margins on [t0, t]
};
// Checks d/dt f^2(A_{t0,t}) <= K R (sup_A cos(theta - phi)) f^2 + tol by
// finite differences between consecutive snapshots.
SlidingNormResult sliding_square_norm(const KineticTrajectory& traj,
                                      const EvolvingSet& set, double t,
                                      double tol_scale = 1.0);

struct PairCosineResult {
    double p_bar = 1.0;       // at the final queried time
    std::vector<double> times;
    std::vector<double> p_bar_series;
    InequalityReport report;  // attractor decay bound margins
};
// Evaluates P_bar(t) along snapshots and, when the entry hypotheses
//   m p - (1 - m) >= sigma  and  W^2/K^2 <= (1 - p) sigma^2 / 4
// hold at the set's birth, checks
//   1 - P_bar(t) <= max{(1-p) e^{-K sigma (t-t0)/4}, 4 W^2/(sigma^2 K^2)} + tol.
PairCosineResult min_pair_cosine(const KineticTrajectory& traj, const EvolvingSet& set,
                                 double t, std::optional<double> sigma = std::nullopt,
                                 double tol = 1e-2);

// (L)_eps of the projection: points whose distance to every point of the set
// is at most arccos(1 - eps); an arc determined by the projection hull,
// replicated on each fiber so the result can be evolved further.
EvolvingSet arc_neighborhood(const EvolvingSet& set, double eps);

}  // namespace kuramoto::flow
