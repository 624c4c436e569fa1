#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "kuramoto/particle.hpp"

using namespace kuramoto;

namespace {

ParticleEnsemble random_ensemble(int n, double W, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uth(0.0, TWO_PI);
    std::uniform_real_distribution<double> uw(-W, W);
    ParticleEnsemble e;
    for (int i = 0; i < n; ++i) {
        e.phases.push_back(uth(rng));
        e.frequencies.push_back(W > 0 ? uw(rng) : 0.0);
    }
    double mean = 0.0;
    for (double w : e.frequencies) mean += w;
    mean /= n;
    for (double& w : e.frequencies) w -= mean;
    double peak = 0.0;
    for (double w : e.frequencies) peak = std::max(peak, std::fabs(w));
    if (peak > W && peak > 0.0)
        for (double& w : e.frequencies) w *= 0.999 * W / peak;
    return e;
}

}  // namespace

TEST_CASE("particle rhs: trivial cases and the direct double-sum oracle") {
    ModelParams p{1.0, 0.0};

    ParticleEnsemble sync;
    sync.phases = {0.4, 0.4, 0.4};
    sync.frequencies = {0.0, 0.0, 0.0};
    for (double d : particle_rhs(sync, p)) CHECK(std::fabs(d) <= 1e-14);

    ParticleEnsemble solo;
    solo.phases = {1.0};
    solo.frequencies = {0.3};
    auto d1 = particle_rhs(solo, ModelParams{2.0, 0.3});
    CHECK(d1[0] == doctest::Approx(0.3).epsilon(1e-14));

    ParticleEnsemble two;
    two.phases = {0.0, 1.0};
    two.frequencies = {0.0, 0.0};
    auto d2 = particle_rhs(two, p);
    CHECK(d2[0] == doctest::Approx(std::sin(1.0) / 2).epsilon(1e-13));
    CHECK(d2[1] == doctest::Approx(-std::sin(1.0) / 2).epsilon(1e-13));

    for (unsigned seed = 0; seed < 10; ++seed) {
        auto e = random_ensemble(17, 0.4, seed);
        ModelParams pr{1.5, 0.4};
        auto fast = particle_rhs(e, pr);
        auto slow = particle_rhs_direct(e, pr);
        for (std::size_t i = 0; i < e.size(); ++i)
            CHECK(std::fabs(fast[i] - slow[i]) <= 1e-12);
    }
}

TEST_CASE("integrate: equilibrium is a fixed point") {
    ModelParams p{2.0, 0.6};
    FrequencyGrid g = two_atom_frequency_grid(0.6);
    auto eq = stable_equilibrium(g, p, 0.5);
    ParticleEnsemble pe;
    pe.phases = {eq.atom_theta[0], eq.atom_theta[1]};
    pe.frequencies = {g.nodes[0], g.nodes[1]};
    auto traj = integrate_particles(pe, p, 1.0, 1e-3);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(circle_dist(traj.states.back().phases[i], pe.phases[i]) <= 1e-8);
}

TEST_CASE("integrate: two-oscillator closed-form gap") {
    // identical oscillators: gap psi obeys tan(psi/2) = tan(psi0/2) e^{-Kt}
    ModelParams p{1.0, 0.0};
    double psi0 = 1.3;
    ParticleEnsemble pe;
    pe.phases = {0.0, psi0};
    pe.frequencies = {0.0, 0.0};
    auto traj = integrate_particles(pe, p, 1.0, 1e-3);
    double gap = traj.lifted.back()[1] - traj.lifted.back()[0];
    double expected = 2.0 * std::atan(std::tan(psi0 / 2) * std::exp(-p.K * 1.0));
    CHECK(gap == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("integrate: frequencies conserved bit-for-bit, step guard") {
    auto e = random_ensemble(12, 0.3, 5);
    ModelParams p{1.0, 0.3};
    auto traj = integrate_particles(e, p, 0.5, 1e-2);
    for (std::size_t i = 0; i < e.size(); ++i)
        CHECK(traj.states.back().frequencies[i] == e.frequencies[i]);

    CHECK_THROWS_AS(integrate_particles(e, ModelParams{10.0, 0.3}, 0.1, 0.05),
                    StepTooLarge);
}

TEST_CASE("gradient flow identity along trajectories") {
    ModelParams p{1.0, 0.2};
    auto e = random_ensemble(32, 0.2, 2024);
    auto traj = integrate_particles(e, p, 2.0, 1e-3);
    auto rep = check_gradient_flow(traj);
    CHECK(rep.pass());

    // equilibrium trajectory: residual at the roundoff floor
    FrequencyGrid g = two_atom_frequency_grid(0.6);
    ModelParams p2{2.0, 0.6};
    auto eq = stable_equilibrium(g, p2, 0.5);
    ParticleEnsemble pe;
    pe.phases = {eq.atom_theta[0], eq.atom_theta[1]};
    pe.frequencies = {g.nodes[0], g.nodes[1]};
    auto eq_traj = integrate_particles(pe, p2, 0.2, 1e-3);
    auto eq_rep = check_gradient_flow(eq_traj);
    CHECK(eq_rep.pass());
    for (double m : eq_rep.margins) CHECK(eq_rep.tol - m <= 1e-10);  // residual ~ 0
}

TEST_CASE("gradient flow residual shrinks ~4x when dt halves") {
    ModelParams p{1.0, 0.2};
    auto e = random_ensemble(16, 0.2, 31);
    auto residual_of = [&](double dt) {
        auto traj = integrate_particles(e, p, 1.0, dt);
        auto rep = check_gradient_flow(traj);
        double worst = 0.0;
        for (double m : rep.margins) worst = std::max(worst, rep.tol - m);
        return worst;
    };
    double r1 = residual_of(2e-3);
    double r2 = residual_of(1e-3);
    CHECK(r1 / r2 >= 3.5);
}

TEST_CASE("energy is non-increasing along trajectories") {
    ModelParams p{1.5, 0.3};
    auto e = random_ensemble(24, 0.3, 8);
    auto traj = integrate_particles(e, p, 1.5, 1e-3);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        ParticleEnsemble lifted;
        lifted.phases = traj.lifted[k];
        lifted.frequencies = traj.states[k].frequencies;
        double v = potential_energy(lifted, p);
        CHECK(v <= prev + 1e-8);
        prev = v;
    }
}

TEST_CASE("rotational equivariance of the flow") {
    ModelParams p{1.0, 0.25};
    auto e = random_ensemble(10, 0.25, 90);
    double c = 1.7;
    ParticleEnsemble rot = e;
    for (double& th : rot.phases) th = wrap_angle(th + c);
    auto t1 = integrate_particles(e, p, 1.0, 1e-3);
    auto t2 = integrate_particles(rot, p, 1.0, 1e-3);
    for (std::size_t i = 0; i < e.size(); ++i) {
        double a = wrap_angle(t1.states.back().phases[i] + c);
        CHECK(circle_dist(a, t2.states.back().phases[i]) <= 1e-9);
    }
}

TEST_CASE("order-parameter evolution matches the rate formulas") {
    // dR/dt and R dphi/dt from the rate expressions evaluated on the
    // empirical measure vs centered differences of the series
    ModelParams p{1.0, 0.2};
    auto e = random_ensemble(40, 0.2, 55);
    double dt = 1e-3;
    auto traj = integrate_particles(e, p, 0.5, dt);

    auto rates_at = [&](const ParticleEnsemble& st) {
        auto op = order_parameter_particles(st);
        double rdot = 0.0, rphidot = 0.0;
        for (std::size_t i = 0; i < st.size(); ++i) {
            double u = st.frequencies[i] - p.K * op.R * std::sin(st.phases[i] - op.phi);
            rdot += -std::sin(st.phases[i] - op.phi) * u;
            rphidot += std::cos(st.phases[i] - op.phi) * u;
        }
        return std::pair{rdot / st.size(), rphidot / st.size()};
    };

    for (std::size_t k = 10; k + 10 < traj.times.size(); k += 50) {
        auto opm = order_parameter_particles(traj.states[k - 1]);
        auto opp = order_parameter_particles(traj.states[k + 1]);
        double rdot_fd = (opp.R - opm.R) / (2 * dt);
        auto [rdot, rphidot] = rates_at(traj.states[k]);
        CHECK(rdot_fd == doctest::Approx(rdot).epsilon(1e-3));
        double dphi = wrap_signed(opp.phi - opm.phi) / (2 * dt);
        auto opk = order_parameter_particles(traj.states[k]);
        CHECK(opk.R * dphi == doctest::Approx(rphidot).epsilon(2e-3));
    }
}
