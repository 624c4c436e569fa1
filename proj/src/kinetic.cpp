#include "kuramoto/kinetic.hpp"

#include <algorithm>
#include <cmath>

namespace kuramoto {

std::size_t KineticTrajectory::snapshot_index_at(double t) const {
    std::size_t best = 0;
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < snapshot_times.size(); ++k) {
        double d = std::fabs(snapshot_times[k] - t);
        if (d < dmin) {
            dmin = d;
            best = k;
        }
    }
    return best;
}

std::size_t KineticTrajectory::step_index_at(double t) const {
    if (times.empty()) return 0;
    double k = std::round((t - times.front()) / dt);
    k = std::clamp(k, 0.0, static_cast<double>(times.size() - 1));
    return static_cast<std::size_t>(k);
}

std::vector<std::vector<double>> velocity_field(const KineticState& state,
                                                const ModelParams& params) {
    OrderParameterPair op = order_parameter_kinetic(state);
    const double dth = state.dtheta();
    std::vector<std::vector<double>> v(state.grid.size(),
                                       std::vector<double>(state.n_theta + 1));
    for (std::size_t j = 0; j < state.grid.size(); ++j) {
        for (int i = 0; i <= state.n_theta; ++i) {
            double edge = i * dth;
            double force = op.defined_flag
                               ? params.K * op.R * std::sin(edge - op.phi)
                               : 0.0;
            v[j][i] = state.grid.nodes[j] - force;
        }
    }
    return v;
}

namespace {

// Upwind flux divergence for one full state; returns -d(vh)/dtheta per cell
// and the max edge speed encountered.
void upwind_rhs(const KineticState& state, const ModelParams& params,
                std::vector<double>& out, double& max_speed) {
    const int n = state.n_theta;
    const double dth = state.dtheta();
    OrderParameterPair op = order_parameter_kinetic(state);
    out.assign(state.h.size(), 0.0);
    max_speed = 0.0;
    std::vector<double> flux(n + 1);
    for (std::size_t j = 0; j < state.grid.size(); ++j) {
        const double* hj = state.fiber(j);
        for (int i = 0; i <= n; ++i) {
            double edge = i * dth;
            double force = op.defined_flag
                               ? params.K * op.R * std::sin(edge - op.phi)
                               : 0.0;
            double v = state.grid.nodes[j] - force;
            max_speed = std::max(max_speed, std::fabs(v));
            // upwind donor cell, periodic
            double up = (v >= 0.0) ? hj[(i - 1 + n) % n] : hj[i % n];
            flux[i] = v * up;
        }
        double* oj = out.data() + j * n;
        for (int i = 0; i < n; ++i) oj[i] = -(flux[i + 1] - flux[i]) / dth;
    }
}

}  // namespace

KineticState step_kinetic(const KineticState& state, const ModelParams& params, double dt) {
    const double dth = state.dtheta();
    std::vector<double> rhs;
    double max_speed = 0.0;

    upwind_rhs(state, params, rhs, max_speed);
    if (dt * max_speed / dth > 0.45)
        throw CFLViolation("step_kinetic: dt*max|v|/dtheta = " +
                           std::to_string(dt * max_speed / dth) + " > 0.45");

    KineticState stage = state;
    for (std::size_t i = 0; i < stage.h.size(); ++i) stage.h[i] += dt * rhs[i];

    upwind_rhs(stage, params, rhs, max_speed);
    if (dt * max_speed / dth > 0.45)
        throw CFLViolation("step_kinetic: stage-2 CFL violated");

    KineticState next = state;
    next.time = state.time + dt;
    for (std::size_t i = 0; i < next.h.size(); ++i)
        next.h[i] = 0.5 * state.h[i] + 0.5 * (stage.h[i] + dt * rhs[i]);
    return next;
}

double dissipation(const KineticState& state, const ModelParams& params) {
    OrderParameterPair op = order_parameter_kinetic(state);
    const double dth = state.dtheta();
    double total = 0.0;
    for (std::size_t j = 0; j < state.grid.size(); ++j) {
        const double* hj = state.fiber(j);
        double acc = 0.0;
        for (int i = 0; i < state.n_theta; ++i) {
            double force = op.defined_flag
                               ? params.K * op.R * std::sin(state.theta_center(i) - op.phi)
                               : 0.0;
            double u = state.grid.nodes[j] - force;
            acc += u * u * hj[i];
        }
        total += state.grid.weights[j] * acc * dth;
    }
    return total;
}

double dissipation_rate_formula(const KineticState& state, const ModelParams& params) {
    // Expand (u-u')^2 cos(theta-theta') into single-integral moments:
    //   dI/dt = -2K [ <u^2 cos>*<cos> + <u^2 sin>*<sin> - <u cos>^2 - <u sin>^2 ].
    OrderParameterPair op = order_parameter_kinetic(state);
    const double dth = state.dtheta();
    double a_c = 0.0, a_s = 0.0, b_c = 0.0, b_s = 0.0, c_c = 0.0, c_s = 0.0;
    for (std::size_t j = 0; j < state.grid.size(); ++j) {
        const double* hj = state.fiber(j);
        const double wj = state.grid.weights[j];
        for (int i = 0; i < state.n_theta; ++i) {
            double th = state.theta_center(i);
            double force = op.defined_flag ? params.K * op.R * std::sin(th - op.phi) : 0.0;
            double u = state.grid.nodes[j] - force;
            double m = wj * hj[i] * dth;
            double ct = std::cos(th), st = std::sin(th);
            a_c += u * u * ct * m;
            a_s += u * u * st * m;
            b_c += u * ct * m;
            b_s += u * st * m;
            c_c += ct * m;
            c_s += st * m;
        }
    }
    return -2.0 * params.K * (a_c * c_c + a_s * c_s - b_c * b_c - b_s * b_s);
}

OrderRates order_rates(const KineticState& state, const ModelParams& params) {
    OrderParameterPair op = order_parameter_kinetic(state);
    if (!op.defined_flag)
        throw PhiUndefined("order_rates: R below R_PHASE_EPS");
    const double dth = state.dtheta();
    OrderRates rates;
    for (std::size_t j = 0; j < state.grid.size(); ++j) {
        const double* hj = state.fiber(j);
        const double wj = state.grid.weights[j];
        for (int i = 0; i < state.n_theta; ++i) {
            double th = state.theta_center(i);
            double u = state.grid.nodes[j] - params.K * op.R * std::sin(th - op.phi);
            double m = wj * hj[i] * dth;
            rates.R_dot += -std::sin(th - op.phi) * u * m;
            rates.R_phi_dot += std::cos(th - op.phi) * u * m;
        }
    }
    return rates;
}

// Overlap length of cell [a, a+dth) with the arc, both on the circle.
double cell_arc_overlap(double cell_lo, double dth, const Arc& arc) {
    if (arc.half_width >= PI) return dth;
    if (arc.half_width <= 0.0) return 0.0;
    // Work in the frame where the arc is [-w, w] around 0.
    double lo = wrap_signed(cell_lo - arc.center);
    double hi = lo + dth;
    // The arc in this frame is [-w, w]; the cell [lo, hi) may stick out past
    // pi, in which case it wraps to the far side where the arc is absent
    // (w < pi), so clipping against [-w, w] plus the wrapped copy suffices.
    double overlap = std::max(0.0, std::min(hi, arc.half_width) -
                                       std::max(lo, -arc.half_width));
    if (hi > PI) {
        double lo2 = -PI;
        double hi2 = hi - TWO_PI;
        overlap += std::max(0.0, std::min(hi2, arc.half_width) -
                                     std::max(lo2, -arc.half_width));
    }
    return overlap;
}

double arc_mass(const KineticState& state, const Arc& arc) {
    const double dth = state.dtheta();
    double total = 0.0;
    for (std::size_t j = 0; j < state.grid.size(); ++j) {
        const double* hj = state.fiber(j);
        double acc = 0.0;
        for (int i = 0; i < state.n_theta; ++i)
            acc += hj[i] * cell_arc_overlap(i * dth, dth, arc);
        total += state.grid.weights[j] * acc;
    }
    return total;
}

double weighted_square_norm(const KineticState& state,
                            const std::function<double(double)>& weight) {
    const double dth = state.dtheta();
    double total = 0.0;
    for (std::size_t j = 0; j < state.grid.size(); ++j) {
        const double* hj = state.fiber(j);
        double acc = 0.0;
        for (int i = 0; i < state.n_theta; ++i) {
            double w = weight(state.theta_center(i));
            acc += w * hj[i] * hj[i];
        }
        total += state.grid.weights[j] * state.grid.density(j) * acc * dth;
    }
    return total;
}

double f2_total(const KineticState& state) {
    return weighted_square_norm(state, [](double) { return 1.0; });
}

double smooth_cutoff(double theta, double alpha, double delta0, double phi) {
    const double r = std::fabs(wrap_signed(theta - phi - PI));
    const double inner = 0.5 * PI - alpha;
    const double outer = inner + delta0;
    if (r <= inner) return 1.0;
    if (r >= outer) return 0.0;
    double z = (2.0 * r - (PI - 2.0 * alpha + delta0)) /
               ((outer - r) * (r - inner));
    return 1.0 / (1.0 + std::exp(z));
}

double f2_chi_minus(const KineticState& state, double phi, double alpha, double delta0) {
    return weighted_square_norm(
        state, [&](double th) { return smooth_cutoff(th, alpha, delta0, phi); });
}

double fibered_w2_to_equilibrium(const KineticState& state, const EquilibriumState& eq) {
    if (!state.grid.same_as(eq.grid, 1e-9))
        throw MarginalMismatch("fibered_w2_to_equilibrium: grids differ");
    const double dth = state.dtheta();
    double total = 0.0;
    for (std::size_t j = 0; j < state.grid.size(); ++j) {
        const double* hj = state.fiber(j);
        double acc = 0.0;
        for (int i = 0; i < state.n_theta; ++i) {
            double d = circle_dist(state.theta_center(i), eq.atom_theta[j]);
            acc += d * d * hj[i];
        }
        total += state.grid.weights[j] * acc * dth;
    }
    return std::sqrt(total);
}

KineticTrajectory integrate_kinetic(const KineticState& initial, const ModelParams& params,
                                    double t_end, double dt, int snapshot_stride,
                                    const EquilibriumState* eq) {
    params.validate();
    initial.validate();
    if (!(dt > 0.0)) throw ConfigError("integrate_kinetic: dt > 0 required");
    if (snapshot_stride < 1) snapshot_stride = 1;

    const std::size_t n_steps = static_cast<std::size_t>(std::llround(t_end / dt));
    KineticTrajectory traj;
    traj.params = params;
    traj.grid = initial.grid;
    traj.n_theta = initial.n_theta;
    traj.dt = dt;
    traj.snapshot_stride = snapshot_stride;

    KineticState state = initial;
    state.time = 0.0;
    double phi_prev = 0.0;
    bool phi_started = false;
    double phi_lift = 0.0;

    auto record = [&](std::size_t step) {
        OrderParameterPair op = order_parameter_kinetic(state);
        traj.times.push_back(state.time);
        traj.R.push_back(op.R);
        double phi_now = op.defined_flag ? op.phi : (phi_started ? phi_prev : 0.0);
        if (!phi_started) {
            phi_lift = phi_now;
            phi_started = true;
        } else {
            phi_lift += wrap_signed(phi_now - phi_prev);
        }
        phi_prev = phi_now;
        traj.phi_unwrapped.push_back(phi_lift);
        traj.dissipation_series.push_back(dissipation(state, params));
        traj.dissipation_rate_series.push_back(dissipation_rate_formula(state, params));
        traj.f2_total_series.push_back(f2_total(state));
        traj.f2_chi_minus_series.push_back(f2_chi_minus(state, phi_now));
        traj.w2g_to_eq_series.push_back(eq ? fibered_w2_to_equilibrium(state, *eq) : 0.0);
        if (step % snapshot_stride == 0 || step == n_steps) {
            traj.snapshot_times.push_back(state.time);
            traj.snapshots.push_back(state);
        }
    };

    record(0);
    for (std::size_t step = 1; step <= n_steps; ++step) {
        state = step_kinetic(state, params, dt);
        record(step);
    }
    return traj;
}

namespace {

void normalize_fibers(KineticState& st) {
    const double dth = st.dtheta();
    for (std::size_t j = 0; j < st.grid.size(); ++j) {
        double* hj = st.fiber(j);
        double mass = 0.0;
        for (int i = 0; i < st.n_theta; ++i) mass += hj[i] * dth;
        for (int i = 0; i < st.n_theta; ++i) hj[i] /= mass;
    }
}

}  // namespace

KineticState make_uniform_state(const FrequencyGrid& grid, int n_theta) {
    KineticState st;
    st.grid = grid;
    st.n_theta = n_theta;
    st.h.assign(grid.size() * n_theta, 1.0 / TWO_PI);
    return st;
}

KineticState make_vonmises_state(const FrequencyGrid& grid, int n_theta, double center,
                                 double concentration) {
    KineticState st;
    st.grid = grid;
    st.n_theta = n_theta;
    st.h.resize(grid.size() * n_theta);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        double* hj = st.fiber(j);
        for (int i = 0; i < n_theta; ++i)
            hj[i] = std::exp(concentration * std::cos(st.theta_center(i) - center));
    }
    normalize_fibers(st);
    return st;
}

KineticState make_two_bump_state(const FrequencyGrid& grid, int n_theta,
                                 double c1, double c2, double w1, double w2,
                                 double kappa1, double kappa2) {
    KineticState st;
    st.grid = grid;
    st.n_theta = n_theta;
    st.h.resize(grid.size() * n_theta);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        double* hj = st.fiber(j);
        for (int i = 0; i < n_theta; ++i) {
            double th = st.theta_center(i);
            hj[i] = w1 * std::exp(kappa1 * std::cos(th - c1)) +
                    w2 * std::exp(kappa2 * std::cos(th - c2));
        }
    }
    normalize_fibers(st);
    return st;
}

}  // namespace kuramoto
