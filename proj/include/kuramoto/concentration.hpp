#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kuramoto/kinetic.hpp"
#include "kuramoto/particle.hpp"
#include "kuramoto/report.hpp"
#include "kuramoto/transport.hpp"

namespace kuramoto::mc {

// Philox4x32-10 counter-based generator; substreams are (seed, stream) pairs
// so trials can run in any order and still reproduce bit-for-bit.
class Philox {
public:
    Philox(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    // uniform double in [0, 1)
    double uniform();

private:
    void refill();
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::uint32_t out_[4] = {0, 0, 0, 0};
    int have_ = 0;
};

struct SampleBatch {
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    int N = 0;
    ParticleEnsemble ensemble;
};

// i.i.d. draws from the law of f0: omega by inverse CDF over the fiber
// weights with within-cell jitter, theta by inverse CDF of the selected
// fiber's conditional with within-cell jitter. Deterministic in (seed, trial).
SampleBatch sample_initial(const KineticState& f0, int N, std::uint64_t seed,
                           std::uint64_t trial = 0);

struct ConcentrationReport {
    std::vector<int> Ns;
    std::vector<double> eps_grid;
    int trials = 0;
    std::vector<std::vector<double>> exceed_freq;  // [N index][eps index]
    std::vector<double> median_sw2;                // per N
    std::vector<double> eps_scale;                 // N^{-1/8}
    std::vector<double> freq_at_scale;
    double envelope_c1 = 0.0;
    double envelope_c2 = 0.0;
    bool envelope_ok = true;
    InequalityReport monotonicity;  // Wilson-interval check, no significant increase
};

// Trials are independent substreams; with n_threads > 1 they run in parallel
// and reduce in index order, so the report is scheduling-independent.
ConcentrationReport concentration_curve(const KineticState& f0, const std::vector<int>& Ns,
                                        int trials, const std::vector<double>& eps_grid,
                                        const ModelParams& params, std::uint64_t seed,
                                        int n_threads = 1);

// SW2(f_t, mu_t^N) <= e^{(5/2) K t} SW2(f_0, mu_0^N) + tol at the probe times.
InequalityReport stability_check(const KineticTrajectory& kin, int N, std::uint64_t seed,
                                 const std::vector<double>& probe_times,
                                 double particle_dt, double tol_scale = 1.0);

struct MassDiameterRow {
    int trial = 0;
    double s = 0.0;
    double t = 0.0;
    double mass = 0.0;
    double diam = 0.0;
    bool pass_mass = false;
    bool pass_diam = false;
    bool hypothesis_met = true;  // SW2(mu_s, f_s) below the closeness threshold
};

struct MassDiameterReport {
    std::vector<MassDiameterRow> rows;
    // fractions over the rows whose closeness hypothesis held
    double pass_fraction_mass = 0.0;
    double pass_fraction_diam = 0.0;
    double flagged_fraction = 0.0;
    std::size_t unflagged_rows = 0;
    double T0 = 0.0;
};

// Samples N oscillators from f0, runs the particle system, and tracks the
// arc L (diameter 2/5 at phi_inf) from each probe time s under the empirical
// field; checks the mass-concentration and diameter-contraction bounds.
// When a reference measure (the phase-locked state as atoms) is supplied,
// rows whose empirical measure is not transport-close to it at the probe
// opening (SW2(mu_s, ref) > 2/sqrt(500), a triangle bound through the
// kinetic state) are flagged and excluded from the pass fractions: at
// feasible N the closeness that holds for N >= N* is a per-realization
// hypothesis, not a guarantee.
MassDiameterReport mass_diameter_experiment(const KineticState& f0,
                                            const ModelParams& params, int N, int trials,
                                            const Arc& L, double T0, double window,
                                            double t_end, double particle_dt,
                                            std::uint64_t seed,
                                            const transport::ProductMeasure* close_ref =
                                                nullptr);

struct NStarEstimate {
    double log_n_star = 0.0;  // natural log
    double n_star = 0.0;
    std::optional<std::uint64_t> n_star_int;  // when representable
    double d_n(double N, double K) const;     // (5/(101 K)) log(N / N*), clamped at 0
};

// Smallest N with N^{-1/8} e^{(5/2) K T0} <= 1/sqrt(500).
NStarEstimate estimate_N_star(double T0, double K);

// Characteristics of the empirical field recorded along a particle run;
// used to evolve arcs under v[mu^N].
struct ParticleField {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> R;
    std::vector<double> phi_unwrapped;
    double K = 0.0;

    // advances theta from times[i0] to times[i1] with omega fixed
    double advect(double theta, double omega, std::size_t i0, std::size_t i1) const;
};

struct ParticleRun {
    ParticleField field;
    std::vector<std::vector<double>> probe_phases;  // particle phases at probe times
    std::vector<double> probe_times;
};

ParticleRun run_particles_with_field(const ParticleEnsemble& init, const ModelParams& params,
                                     double t_end, double dt,
                                     const std::vector<double>& probe_times);

}  // namespace kuramoto::mc
