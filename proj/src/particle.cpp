#include "kuramoto/particle.hpp"

#include <cmath>
#include <limits>

namespace kuramoto {

std::vector<double> particle_rhs(const ParticleEnsemble& ensemble, const ModelParams& params) {
    const std::size_t n = ensemble.size();
    OrderParameterPair op = order_parameter_particles(ensemble);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        double force = op.defined_flag
                           ? params.K * op.R * std::sin(ensemble.phases[i] - op.phi)
                           : 0.0;
        d[i] = ensemble.frequencies[i] - force;
    }
    return d;
}

std::vector<double> particle_rhs_direct(const ParticleEnsemble& ensemble,
                                        const ModelParams& params) {
    const std::size_t n = ensemble.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            s += std::sin(ensemble.phases[j] - ensemble.phases[i]);
        d[i] = ensemble.frequencies[i] + params.K * s / static_cast<double>(n);
    }
    return d;
}

namespace {

// RHS on lifted phases; the force depends on phases only through differences,
// so lifted and canonical inputs agree.
std::vector<double> rhs_lifted(const std::vector<double>& lifted,
                               const std::vector<double>& freqs,
                               const ModelParams& params) {
    const std::size_t n = lifted.size();
    double c = 0.0, s = 0.0;
    for (double th : lifted) {
        c += std::cos(th);
        s += std::sin(th);
    }
    c /= n;
    s /= n;
    double r = std::sqrt(c * c + s * s);
    double phi = (r < R_PHASE_EPS) ? 0.0 : std::atan2(s, c);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        double force = (r < R_PHASE_EPS) ? 0.0 : params.K * r * std::sin(lifted[i] - phi);
        d[i] = freqs[i] - force;
    }
    return d;
}

}  // namespace

ParticleTrajectory integrate_particles(const ParticleEnsemble& initial,
                                       const ModelParams& params, double t_end, double dt) {
    params.validate();
    initial.validate(params.W);
    if (dt > 0.1 / params.K + 1e-15)
        throw StepTooLarge("integrate_particles: dt > 0.1/K");
    if (!(dt > 0.0) || !(t_end >= 0.0))
        throw ConfigError("integrate_particles: dt > 0 and t_end >= 0 required");

    const std::size_t n = initial.size();
    const auto& freqs = initial.frequencies;
    std::size_t n_steps = static_cast<std::size_t>(std::llround(t_end / dt));

    ParticleTrajectory traj;
    traj.params = params;
    traj.dt = dt;
    traj.times.reserve(n_steps + 1);
    traj.states.reserve(n_steps + 1);
    traj.lifted.reserve(n_steps + 1);

    std::vector<double> y(initial.phases);
    traj.times.push_back(0.0);
    traj.states.push_back(initial);
    traj.lifted.push_back(y);

    std::vector<double> k1, k2, k3, k4, tmp(n);
    for (std::size_t step = 1; step <= n_steps; ++step) {
        k1 = rhs_lifted(y, freqs, params);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
        k2 = rhs_lifted(tmp, freqs, params);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
        k3 = rhs_lifted(tmp, freqs, params);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
        k4 = rhs_lifted(tmp, freqs, params);
        for (std::size_t i = 0; i < n; ++i)
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

        ParticleEnsemble st;
        st.frequencies = freqs;  // conserved bit-for-bit
        st.phases.resize(n);
        for (std::size_t i = 0; i < n; ++i) st.phases[i] = wrap_angle(y[i]);
        traj.times.push_back(step * dt);
        traj.states.push_back(std::move(st));
        traj.lifted.push_back(y);
    }
    return traj;
}

InequalityReport check_gradient_flow(const ParticleTrajectory& traj, double c_fd) {
    InequalityReport rep;
    rep.name = "gradient_flow_identity";
    if (traj.times.size() < 3) {
        rep.skipped = true;
        rep.skip_reason = "trajectory shorter than 3 states";
        return rep;
    }
    const double dt = traj.dt;
    const double eps = std::numeric_limits<double>::epsilon();
    rep.tol_note = "c_fd*(dt^2 + eps/dt)*max_slope, c_fd=" + std::to_string(c_fd);

    std::vector<double> V(traj.times.size());
    std::vector<double> slope(traj.times.size());
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        ParticleEnsemble lifted_state;
        lifted_state.phases = traj.lifted[k];
        lifted_state.frequencies = traj.states[k].frequencies;
        V[k] = potential_energy(lifted_state, traj.params);
        slope[k] = gradient_slope(traj.states[k], traj.params);
    }
    double max_slope = 0.0, max_v = 0.0;
    for (double s : slope) max_slope = std::max(max_slope, s);
    for (double v : V) max_v = std::max(max_v, std::fabs(v));
    // dt^2 term: finite-difference truncation, scales with the slope;
    // eps/dt term: roundoff in V amplified by the difference quotient.
    rep.tol = c_fd * (dt * dt * max_slope + eps * std::max(1.0, max_v) / dt);
    rep.floor = eps * std::max(1.0, max_v) / dt;

    for (std::size_t k = 1; k + 1 < traj.times.size(); ++k) {
        double dV = (V[k + 1] - V[k - 1]) / (2.0 * dt);
        double residual = std::fabs(dV + slope[k]);
        rep.add(traj.times[k], rep.tol - residual);
    }
    rep.notes.push_back("max_slope=" + std::to_string(max_slope));
    return rep;
}

}  // namespace kuramoto
