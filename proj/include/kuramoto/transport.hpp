#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kuramoto/kinetic.hpp"
#include "kuramoto/model.hpp"
#include "kuramoto/report.hpp"

namespace kuramoto::transport {

// Probability measure on the circle as weighted atoms.
struct CircleMeasure {
    std::vector<double> theta;  // canonical in [0, 2*pi)
    std::vector<double> mass;   // nonnegative, sums to 1 (checked to 1e-12)

    std::size_t size() const { return theta.size(); }
    void validate() const;
    static CircleMeasure from_fiber(const KineticState& state, std::size_t j);
};

struct ProductAtom {
    double theta = 0.0;
    double omega = 0.0;
    double mass = 0.0;
};

// Probability measure on T x R as weighted atoms.
struct ProductMeasure {
    std::vector<ProductAtom> atoms;

    double total_mass() const;
    void validate() const;
    static ProductMeasure from_state(const KineticState& state, double mass_floor = 0.0);
    static ProductMeasure from_particles(const ParticleEnsemble& ensemble);
    static ProductMeasure from_equilibrium(const EquilibriumState& eq);
};

struct PlanEntry {
    int from = 0;
    int to = 0;
    double mass = 0.0;
    double cost = 0.0;  // squared ground distance for this pair
};

struct TransportResult {
    double distance = 0.0;
    std::vector<PlanEntry> plan;
    std::string method;

    double plan_cost() const;  // sum mass * cost; equals distance^2 at optimum
};

// Quadratic optimal transport on the circle with geodesic cost, by quantile
// matching optimized over the circular cut (convex in the cut parameter;
// golden-section bracket + exact minimization over cut candidates).
TransportResult w2_circle(const CircleMeasure& mu, const CircleMeasure& nu);

// W_{2,g} between two grid states sharing the same frequency grid; each fiber
// is quantized to cell-center atoms and solved with w2_circle.
double fibered_w2(const KineticState& a, const KineticState& b);
double fibered_w2(const KineticState& a, const EquilibriumState& b);
// Distance between two phase-locked states on the same grid.
double fibered_w2(const EquilibriumState& a, const EquilibriumState& b);

enum class SW2Backend { Auto, Exhaustive, Hungarian, NetworkSimplex };

inline constexpr int SW2_EXACT_LIMIT = 8;
inline constexpr int SW2_HUNGARIAN_LIMIT = 2000;
inline constexpr int SW2_SIMPLEX_LIMIT = 5000;

// Scaled quadratic Wasserstein distance on T x R with ground cost
// d(theta,theta')^2 + (omega-omega')^2 / K^2.
TransportResult scaled_w2(const ProductMeasure& mu, const ProductMeasure& nu,
                          const ModelParams& params,
                          SW2Backend backend = SW2Backend::Auto);
TransportResult scaled_w2(const KineticState& a, const KineticState& b,
                          const ModelParams& params);

// Checks SW2(a, b) <= W2g(a, b) + tol on the quantized-density path.
InequalityReport verify_order(const KineticState& a, const KineticState& b,
                              const ModelParams& params, double tol = 1e-8);

// Low-level exact solvers, exposed for tests and oracles.
double hungarian_assignment(const std::vector<std::vector<double>>& cost,
                            std::vector<int>& match);
double network_simplex(const std::vector<double>& supply, const std::vector<double>& demand,
                       const std::vector<std::vector<double>>& cost,
                       std::vector<PlanEntry>* plan = nullptr);

}  // namespace kuramoto::transport
