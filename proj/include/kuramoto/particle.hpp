#pragma once

#include <vector>

#include "kuramoto/model.hpp"
#include "kuramoto/report.hpp"

namespace kuramoto {

struct ParticleTrajectory {
    ModelParams params;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<ParticleEnsemble> states;       // canonical phases
    std::vector<std::vector<double>> lifted;    // continuous (unwrapped) phases

    std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
};

// theta_dot_i = omega_i - K r sin(theta_i - phi) (order-parameter form, O(N)).
std::vector<double> particle_rhs(const ParticleEnsemble& ensemble, const ModelParams& params);

// O(N^2) double-sum form, kept as an independent oracle for the O(N) path.
std::vector<double> particle_rhs_direct(const ParticleEnsemble& ensemble,
                                        const ModelParams& params);

// Classical fixed-step RK4. Throws StepTooLarge if dt > 0.1 / K.
ParticleTrajectory integrate_particles(const ParticleEnsemble& initial,
                                       const ModelParams& params, double t_end, double dt);

// Residual of dV/dt = -|grad V|^2 along the trajectory, by centered
// differences of V on the lifted phases. Tolerance: c_fd * (dt^2 + eps/dt)
// scaled by the max slope, with c_fd documented in the report.
InequalityReport check_gradient_flow(const ParticleTrajectory& traj, double c_fd = 10.0);

}  // namespace kuramoto
