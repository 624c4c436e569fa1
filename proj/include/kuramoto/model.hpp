#pragma once

#include <optional>
#include <vector>

#include "kuramoto/common.hpp"

namespace kuramoto {

struct ModelParams {
    double K = 1.0;  // coupling strength, 1/time
    double W = 0.0;  // half-width of the natural-frequency support, 1/time

    void validate() const {
        if (!(K > 0.0)) throw ConfigError("ModelParams: K must be > 0");
        if (!(W >= 0.0)) throw ConfigError("ModelParams: W must be >= 0");
    }
    double frequency_ratio() const { return W / K; }  // W/K, used by hypothesis checks
};

// Phases + natural frequencies of N oscillators. Frequencies must be centered.
struct ParticleEnsemble {
    std::vector<double> phases;       // canonical representatives in [0, 2*pi)
    std::vector<double> frequencies;  // mean zero, |omega_i| <= W

    std::size_t size() const { return phases.size(); }
    void validate(double W) const;
};

// Discretization of the frequency marginal g: quadrature nodes and masses.
// `spacing` is the cell width used when a density value of g is needed
// (g_dens_j = weights[j] / spacing). For a degenerate grid (W = 0, single
// node) spacing defaults to 1 so that the atom is treated as density one
// over a unit cell; the convention only affects f^2-type functionals.
struct FrequencyGrid {
    std::vector<double> nodes;    // strictly increasing, in [-W, W]
    std::vector<double> weights;  // nonnegative, sum to 1
    double spacing = 1.0;

    std::size_t size() const { return nodes.size(); }
    double density(std::size_t j) const { return weights[j] / spacing; }
    double max_abs_node() const;
    void validate() const;
    bool same_as(const FrequencyGrid& other, double tol = 1e-12) const;
};

// Uniform cell-centered grid of n_omega nodes on [-W, W] with weights
// proportional to g evaluated at cell centers, renormalized to sum 1.
FrequencyGrid uniform_frequency_grid(double W, int n_omega);
FrequencyGrid two_atom_frequency_grid(double omega0);

// Per-fiber phase densities on a uniform periodic theta grid (cell averages).
struct KineticState {
    double time = 0.0;
    FrequencyGrid grid;
    int n_theta = 0;
    std::vector<double> h;  // size n_omega * n_theta, fiber-major, h >= 0

    double dtheta() const { return TWO_PI / n_theta; }
    double theta_center(int i) const { return (i + 0.5) * dtheta(); }
    double* fiber(std::size_t j) { return h.data() + j * n_theta; }
    const double* fiber(std::size_t j) const { return h.data() + j * n_theta; }

    // Per-fiber conditional mass (should be 1 for every fiber).
    double fiber_mass(std::size_t j) const;
    void validate(double tol = 1e-10) const;
};

struct OrderParameterPair {
    double R = 0.0;
    double phi = 0.0;  // canonical in [0, 2*pi); meaningful only if defined_flag
    bool defined_flag = false;
};

// Phase-locked state on the stable branch: one atom per fiber at
// theta_plus(omega) = phi_inf + asin(omega / (K * R_inf)).
struct EquilibriumState {
    double R_inf = 1.0;
    double phi_inf = 0.0;
    FrequencyGrid grid;
    std::vector<double> atom_theta;  // theta_plus per fiber, canonical

    double residual(double K) const;  // self-consistency defect
};

OrderParameterPair order_parameter_particles(const ParticleEnsemble& ensemble);
OrderParameterPair order_parameter_kinetic(const KineticState& state);

// Energy of the particle gradient flow. Uses the phase values as given
// (callers that need a continuous-in-time energy must pass lifted phases).
double potential_energy(const ParticleEnsemble& ensemble, const ModelParams& params);

// |grad V|^2 in the scaled metric: (1/N) sum |omega_j - K r sin(theta_j - phi)|^2.
double gradient_slope(const ParticleEnsemble& ensemble, const ModelParams& params);

// <D^2 V(Theta) v, v> in the scaled metric.
double hessian_quadratic_form(const ParticleEnsemble& ensemble,
                              const std::vector<double>& v,
                              const ModelParams& params);

// Largest solution r in (max|omega|/K, 1] of r = sum_j w_j sqrt(1 - (omega_j/(K r))^2),
// found by scan + bisection. Throws NoPhaseLockedEquilibrium when no root exists.
EquilibriumState stable_equilibrium(const FrequencyGrid& freqs, const ModelParams& params,
                                    double phi_target);
EquilibriumState stable_equilibrium(const std::vector<double>& particle_freqs,
                                    const ModelParams& params, double phi_target);

// Render an equilibrium onto a theta grid (each fiber's atom placed in its
// cell, all mass in that one cell).
KineticState equilibrium_to_grid(const EquilibriumState& eq, int n_theta, double time = 0.0);

}  // namespace kuramoto
