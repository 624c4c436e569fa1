#include "kuramoto/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kuramoto {

void ParticleEnsemble::validate(double W) const {
    if (phases.empty()) throw ConfigError("ParticleEnsemble: N >= 1 required");
    if (phases.size() != frequencies.size())
        throw ConfigError("ParticleEnsemble: phases/frequencies size mismatch");
    double mean = std::accumulate(frequencies.begin(), frequencies.end(), 0.0) /
                  static_cast<double>(frequencies.size());
    if (std::fabs(mean) > 1e-12)
        throw ConfigError("ParticleEnsemble: frequencies not centered (|mean| = " +
                          std::to_string(std::fabs(mean)) + ")");
    for (double w : frequencies)
        if (std::fabs(w) > W + 1e-12)
            throw ConfigError("ParticleEnsemble: |omega| exceeds W");
}

double FrequencyGrid::max_abs_node() const {
    double m = 0.0;
    for (double w : nodes) m = std::max(m, std::fabs(w));
    return m;
}

void FrequencyGrid::validate() const {
    if (nodes.empty()) throw ConfigError("FrequencyGrid: empty");
    if (nodes.size() != weights.size()) throw ConfigError("FrequencyGrid: size mismatch");
    for (std::size_t j = 1; j < nodes.size(); ++j)
        if (!(nodes[j] > nodes[j - 1]))
            throw ConfigError("FrequencyGrid: nodes must be strictly increasing");
    double total = 0.0, mean = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (weights[j] < 0.0) throw ConfigError("FrequencyGrid: negative weight");
        total += weights[j];
        mean += weights[j] * nodes[j];
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw ConfigError("FrequencyGrid: weights must sum to 1");
    if (std::fabs(mean) > 1e-10)
        throw ConfigError("FrequencyGrid: frequency marginal not centered");
}

bool FrequencyGrid::same_as(const FrequencyGrid& other, double tol) const {
    if (nodes.size() != other.nodes.size()) return false;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (std::fabs(nodes[j] - other.nodes[j]) > tol) return false;
        if (std::fabs(weights[j] - other.weights[j]) > tol) return false;
    }
    return true;
}

FrequencyGrid uniform_frequency_grid(double W, int n_omega) {
    if (n_omega < 1) throw ConfigError("uniform_frequency_grid: n_omega >= 1 required");
    FrequencyGrid g;
    if (W == 0.0 || n_omega == 1) {
        g.nodes = {0.0};
        g.weights = {1.0};
        g.spacing = (W == 0.0) ? 1.0 : 2.0 * W;
        return g;
    }
    double dw = 2.0 * W / n_omega;
    g.spacing = dw;
    g.nodes.resize(n_omega);
    g.weights.assign(n_omega, 1.0 / n_omega);
    for (int j = 0; j < n_omega; ++j) g.nodes[j] = -W + (j + 0.5) * dw;
    // re-center exactly (symmetric grid is already centered up to roundoff)
    double mean = 0.0;
    for (int j = 0; j < n_omega; ++j) mean += g.weights[j] * g.nodes[j];
    for (int j = 0; j < n_omega; ++j) g.nodes[j] -= mean;
    return g;
}

FrequencyGrid two_atom_frequency_grid(double omega0) {
    FrequencyGrid g;
    g.nodes = {-std::fabs(omega0), std::fabs(omega0)};
    g.weights = {0.5, 0.5};
    g.spacing = std::fabs(omega0) > 0 ? std::fabs(omega0) : 1.0;
    return g;
}

double KineticState::fiber_mass(std::size_t j) const {
    const double* hj = fiber(j);
    double s = 0.0;
    for (int i = 0; i < n_theta; ++i) s += hj[i];
    return s * dtheta();
}

void KineticState::validate(double tol) const {
    grid.validate();
    if (n_theta < 1) throw ConfigError("KineticState: n_theta >= 1 required");
    if (h.size() != grid.size() * static_cast<std::size_t>(n_theta))
        throw ConfigError("KineticState: h size mismatch");
    for (double v : h)
        if (v < -tol) throw ConfigError("KineticState: negative density");
    for (std::size_t j = 0; j < grid.size(); ++j)
        if (std::fabs(fiber_mass(j) - 1.0) > tol)
            throw ConfigError("KineticState: fiber " + std::to_string(j) +
                              " not normalized");
}

double EquilibriumState::residual(double K) const {
    double s = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        double x = grid.nodes[j] / (K * R_inf);
        if (std::fabs(x) > 1.0) return std::numeric_limits<double>::infinity();
        s += grid.weights[j] * std::sqrt(1.0 - x * x);
    }
    return std::fabs(R_inf - s);
}

namespace {

OrderParameterPair order_from_sums(double c, double s) {
    OrderParameterPair op;
    op.R = std::sqrt(c * c + s * s);
    if (op.R > 1.0) op.R = std::min(op.R, 1.0 + 1e-15);  // guard roundoff
    if (op.R < R_PHASE_EPS) {
        op.phi = 0.0;
        op.defined_flag = false;
    } else {
        op.phi = wrap_angle(std::atan2(s, c));
        op.defined_flag = true;
    }
    return op;
}

}  // namespace

OrderParameterPair order_parameter_particles(const ParticleEnsemble& ensemble) {
    const std::size_t n = ensemble.size();
    double c = 0.0, s = 0.0;
    for (double th : ensemble.phases) {
        c += std::cos(th);
        s += std::sin(th);
    }
    return order_from_sums(c / n, s / n);
}

OrderParameterPair order_parameter_kinetic(const KineticState& state) {
    const double dth = state.dtheta();
    double c = 0.0, s = 0.0;
    for (std::size_t j = 0; j < state.grid.size(); ++j) {
        const double* hj = state.fiber(j);
        double cj = 0.0, sj = 0.0;
        for (int i = 0; i < state.n_theta; ++i) {
            double th = state.theta_center(i);
            cj += std::cos(th) * hj[i];
            sj += std::sin(th) * hj[i];
        }
        c += state.grid.weights[j] * cj * dth;
        s += state.grid.weights[j] * sj * dth;
    }
    return order_from_sums(c, s);
}

double potential_energy(const ParticleEnsemble& ensemble, const ModelParams& params) {
    const std::size_t n = ensemble.size();
    OrderParameterPair op = order_parameter_particles(ensemble);
    double drift = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        drift += ensemble.frequencies[j] * ensemble.phases[j];
    return -drift / static_cast<double>(n) + 0.5 * params.K * (1.0 - op.R * op.R);
}

double gradient_slope(const ParticleEnsemble& ensemble, const ModelParams& params) {
    const std::size_t n = ensemble.size();
    OrderParameterPair op = order_parameter_particles(ensemble);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double force = op.defined_flag
                           ? params.K * op.R * std::sin(ensemble.phases[j] - op.phi)
                           : 0.0;
        double d = ensemble.frequencies[j] - force;
        s += d * d;
    }
    return s / static_cast<double>(n);
}

double hessian_quadratic_form(const ParticleEnsemble& ensemble,
                              const std::vector<double>& v,
                              const ModelParams& params) {
    const std::size_t n = ensemble.size();
    if (v.size() != n) throw ConfigError("hessian_quadratic_form: v size mismatch");
    OrderParameterPair op = order_parameter_particles(ensemble);
    double diag = 0.0, mc = 0.0, ms = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double cosr = op.defined_flag ? op.R * std::cos(ensemble.phases[j] - op.phi) : 0.0;
        diag += cosr * v[j] * v[j];
        mc += v[j] * std::cos(ensemble.phases[j]);
        ms += v[j] * std::sin(ensemble.phases[j]);
    }
    mc /= static_cast<double>(n);
    ms /= static_cast<double>(n);
    return params.K * diag / static_cast<double>(n) -
           params.K * (mc * mc + ms * ms);
}

namespace {

// F(r) = r - sum_j w_j sqrt(1 - (omega_j / (K r))^2), defined for r >= max|omega|/K.
double fixed_point_defect(double r, const FrequencyGrid& g, double K) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        double x = g.nodes[j] / (K * r);
        double q = 1.0 - x * x;
        if (q < 0.0) q = 0.0;  // r at the lower bracket edge, roundoff
        s += g.weights[j] * std::sqrt(q);
    }
    return r - s;
}

EquilibriumState solve_equilibrium(const FrequencyGrid& g, const ModelParams& params,
                                   double phi_target) {
    params.validate();
    g.validate();
    const double K = params.K;
    const double r_lo = g.max_abs_node() / K;
    if (r_lo >= 1.0)
        throw NoPhaseLockedEquilibrium("max|omega| >= K: coupling too weak");

    // The stable branch is the largest zero of F. F(1) >= 0 always; scan down
    // from r = 1 for the first sign change, then bisect.
    const int scan_points = 4096;
    double hi = 1.0;
    double f_hi = fixed_point_defect(hi, g, K);
    double lo = hi;
    bool bracketed = false;
    if (std::fabs(f_hi) < 1e-14) {
        bracketed = true;  // root at r = 1 (identical oscillators)
        lo = hi;
    } else {
        for (int k = 1; k <= scan_points; ++k) {
            double r = 1.0 - (1.0 - r_lo) * k / scan_points;
            if (r <= r_lo) r = r_lo + (1.0 - r_lo) * 1e-12;
            double f = fixed_point_defect(r, g, K);
            if (f_hi > 0.0 && f <= 0.0) {
                lo = r;
                bracketed = true;
                break;
            }
            hi = r;
            f_hi = f;
        }
    }
    if (!bracketed)
        throw NoPhaseLockedEquilibrium("fixed-point map has no root in (max|omega|/K, 1]");

    double a = lo, b = hi;
    if (lo != hi) {
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (a + b);
            if (fixed_point_defect(mid, g, K) <= 0.0)
                a = mid;
            else
                b = mid;
        }
    }
    double r_inf = 0.5 * (a + b);

    EquilibriumState eq;
    eq.R_inf = r_inf;
    eq.phi_inf = wrap_angle(phi_target);
    eq.grid = g;
    eq.atom_theta.resize(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        double x = std::clamp(g.nodes[j] / (K * r_inf), -1.0, 1.0);
        eq.atom_theta[j] = wrap_angle(eq.phi_inf + std::asin(x));
    }
    if (eq.residual(K) > 1e-10)
        throw NoPhaseLockedEquilibrium("bisection failed to reach residual tolerance");
    return eq;
}

}  // namespace

EquilibriumState stable_equilibrium(const FrequencyGrid& freqs, const ModelParams& params,
                                    double phi_target) {
    return solve_equilibrium(freqs, params, phi_target);
}

EquilibriumState stable_equilibrium(const std::vector<double>& particle_freqs,
                                    const ModelParams& params, double phi_target) {
    // Collapse repeated frequencies into weighted nodes.
    std::vector<double> sorted = particle_freqs;
    std::sort(sorted.begin(), sorted.end());
    FrequencyGrid g;
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t k = i;
        while (k < sorted.size() && sorted[k] <= sorted[i] + 1e-15) ++k;
        g.nodes.push_back(sorted[i]);
        g.weights.push_back((k - i) / n);
        i = k;
    }
    if (g.nodes.size() == 1 && g.nodes[0] == 0.0) {
        g.spacing = 1.0;
    } else {
        g.spacing = (g.nodes.back() - g.nodes.front()) / std::max<std::size_t>(1, g.size() - 1);
    }
    return solve_equilibrium(g, params, phi_target);
}

KineticState equilibrium_to_grid(const EquilibriumState& eq, int n_theta, double time) {
    KineticState st;
    st.time = time;
    st.grid = eq.grid;
    st.n_theta = n_theta;
    st.h.assign(eq.grid.size() * n_theta, 0.0);
    const double dth = st.dtheta();
    for (std::size_t j = 0; j < eq.grid.size(); ++j) {
        int cell = static_cast<int>(std::floor(eq.atom_theta[j] / dth));
        cell = std::clamp(cell, 0, n_theta - 1);
        st.fiber(j)[cell] = 1.0 / dth;
    }
    return st;
}

}  // namespace kuramoto
