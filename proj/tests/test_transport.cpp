#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "kuramoto/transport.hpp"

using namespace kuramoto;
using namespace kuramoto::transport;

namespace {

CircleMeasure uniform_atoms(const std::vector<double>& theta) {
    CircleMeasure m;
    m.theta = theta;
    m.mass.assign(theta.size(), 1.0 / theta.size());
    return m;
}

// Independent oracle: exhaustive matching over all permutations with
// geodesic squared cost (valid for uniform equal-count atom sets).
double w2_circle_bruteforce(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<int> perm(b.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            double d = circle_dist(a[i], b[perm[i]]);
            c += d * d;
        }
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::sqrt(best / a.size());
}

double sw2_bruteforce(const std::vector<ProductAtom>& a, const std::vector<ProductAtom>& b,
                      double K) {
    std::vector<int> perm(b.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            double dth = circle_dist(a[i].theta, b[perm[i]].theta);
            double dw = (a[i].omega - b[perm[i]].omega) / K;
            c += dth * dth + dw * dw;
        }
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::sqrt(best / a.size());
}

}  // namespace

TEST_CASE("w2_circle: identical measures and single atoms") {
    CircleMeasure m = uniform_atoms({0.3, 1.7, 4.4});
    CHECK(w2_circle(m, m).distance <= 1e-12);

    CircleMeasure a = uniform_atoms({0.1});
    CircleMeasure b = uniform_atoms({6.1});
    double d = w2_circle(a, b).distance;
    CHECK(d == doctest::Approx(TWO_PI - 6.0).epsilon(1e-12));
}

TEST_CASE("w2_circle equals exhaustive matching on random small instances") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> uth(0.0, TWO_PI);
    std::uniform_int_distribution<int> usize(1, 6);
    for (int trial = 0; trial < 100; ++trial) {
        int n = usize(rng);
        std::vector<double> xs(n), ys(n);
        for (auto& x : xs) x = uth(rng);
        for (auto& y : ys) y = uth(rng);
        double solver = w2_circle(uniform_atoms(xs), uniform_atoms(ys)).distance;
        double oracle = w2_circle_bruteforce(xs, ys);
        CHECK(std::fabs(solver - oracle) <= 1e-10);
    }
}

TEST_CASE("w2_circle: plan invariants (marginals and recomputed cost)") {
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> uth(0.0, TWO_PI);
    std::uniform_real_distribution<double> um(0.1, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        CircleMeasure a, b;
        int n = 5, m = 7;
        double ta = 0.0, tb = 0.0;
        for (int i = 0; i < n; ++i) {
            a.theta.push_back(uth(rng));
            a.mass.push_back(um(rng));
            ta += a.mass.back();
        }
        for (int j = 0; j < m; ++j) {
            b.theta.push_back(uth(rng));
            b.mass.push_back(um(rng));
            tb += b.mass.back();
        }
        for (auto& x : a.mass) x /= ta;
        for (auto& x : b.mass) x /= tb;
        auto res = w2_circle(a, b);
        CHECK(std::fabs(res.plan_cost() - res.distance * res.distance) <= 1e-9);
        std::vector<double> ma(n, 0.0), mb(m, 0.0);
        for (const auto& e : res.plan) {
            ma[e.from] += e.mass;
            mb[e.to] += e.mass;
        }
        for (int i = 0; i < n; ++i) CHECK(std::fabs(ma[i] - a.mass[i]) <= 1e-9);
        for (int j = 0; j < m; ++j) CHECK(std::fabs(mb[j] - b.mass[j]) <= 1e-9);
    }
}

TEST_CASE("w2_circle metric axioms on random discrete instances") {
    std::mt19937 rng(2468);
    std::uniform_real_distribution<double> uth(0.0, TWO_PI);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<double> xs(4), ys(4), zs(4);
        for (auto& v : xs) v = uth(rng);
        for (auto& v : ys) v = uth(rng);
        for (auto& v : zs) v = uth(rng);
        auto A = uniform_atoms(xs), B = uniform_atoms(ys), C = uniform_atoms(zs);
        double ab = w2_circle(A, B).distance;
        double ba = w2_circle(B, A).distance;
        double ac = w2_circle(A, C).distance;
        double cb = w2_circle(C, B).distance;
        CHECK(std::fabs(ab - ba) <= 1e-12);
        CHECK(ab <= ac + cb + 1e-9);
        CHECK(w2_circle(A, A).distance <= 1e-12);
    }
}

TEST_CASE("w2_circle handles mass mismatch") {
    CircleMeasure a = uniform_atoms({0.1, 2.0});
    CircleMeasure b;
    b.theta = {1.0};
    b.mass = {0.7};
    CHECK_THROWS_AS(w2_circle(a, b), MassMismatch);
}

TEST_CASE("fibered_w2: identity, rotation, and the two-point construction") {
    FrequencyGrid g = uniform_frequency_grid(0.1, 3);
    auto a = make_vonmises_state(g, 64, 1.0, 2.0);
    CHECK(fibered_w2(a, a) <= 1e-12);

    // rigid rotation by c of a narrowly supported state costs exactly c
    // (full-support states can do better by wrapping; uniform costs 0)
    KineticState narrow = make_uniform_state(g, 64);
    std::fill(narrow.h.begin(), narrow.h.end(), 0.0);
    for (std::size_t j = 0; j < g.size(); ++j) {
        narrow.fiber(j)[10] = 0.25 / narrow.dtheta();
        narrow.fiber(j)[11] = 0.5 / narrow.dtheta();
        narrow.fiber(j)[12] = 0.25 / narrow.dtheta();
    }
    int shift = 9;
    double c_exact = shift * narrow.dtheta();
    KineticState rotated = narrow;
    std::fill(rotated.h.begin(), rotated.h.end(), 0.0);
    for (std::size_t j = 0; j < g.size(); ++j)
        for (int i = 0; i < narrow.n_theta; ++i)
            rotated.fiber(j)[(i + shift) % narrow.n_theta] = narrow.fiber(j)[i];
    CHECK(fibered_w2(narrow, rotated) == doctest::Approx(c_exact).epsilon(1e-10));

    // full-support sanity: rotation cost is a strict upper bound
    KineticState b = a;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double* src = a.fiber(j);
        double* dst = b.fiber(j);
        for (int i = 0; i < a.n_theta; ++i)
            dst[(i + shift) % a.n_theta] = src[i];
    }
    CHECK(fibered_w2(a, b) <= c_exact + 1e-10);

    // Remark construction: mu = 1/2(d_{t1,w1} + d_{t2,w2}), nu with thetas
    // swapped; conditionals differ by moving theta1 <-> theta2 on each fiber
    double t1 = 0.5, t2 = 1.4;
    FrequencyGrid g2 = two_atom_frequency_grid(0.3);
    KineticState mu = make_uniform_state(g2, 128), nu = make_uniform_state(g2, 128);
    std::fill(mu.h.begin(), mu.h.end(), 0.0);
    std::fill(nu.h.begin(), nu.h.end(), 0.0);
    int i1 = static_cast<int>(t1 / mu.dtheta()), i2 = static_cast<int>(t2 / mu.dtheta());
    mu.fiber(0)[i1] = 1.0 / mu.dtheta();
    mu.fiber(1)[i2] = 1.0 / mu.dtheta();
    nu.fiber(0)[i2] = 1.0 / nu.dtheta();
    nu.fiber(1)[i1] = 1.0 / nu.dtheta();
    double eps_theta = circle_dist(mu.theta_center(i1), mu.theta_center(i2));
    double w2g = fibered_w2(mu, nu);
    CHECK(w2g * w2g == doctest::Approx(eps_theta * eps_theta).epsilon(1e-12));
}

TEST_CASE("fibered_w2 under rotation obeys the triangle bound") {
    // rotating one argument by c moves the distance by at most the rotation cost
    FrequencyGrid g = uniform_frequency_grid(0.1, 3);
    auto a = make_vonmises_state(g, 64, 1.0, 2.0);
    auto b = make_two_bump_state(g, 64, 0.4, 2.9, 0.6, 0.4, 3.0, 4.0);
    double d0 = fibered_w2(a, b);
    for (int shift : {3, 9, 17}) {
        KineticState rot = b;
        std::fill(rot.h.begin(), rot.h.end(), 0.0);
        for (std::size_t j = 0; j < g.size(); ++j)
            for (int i = 0; i < b.n_theta; ++i)
                rot.fiber(j)[(i + shift) % b.n_theta] = b.fiber(j)[i];
        double c = shift * b.dtheta();
        double d1 = fibered_w2(a, rot);
        CHECK(d1 <= d0 + c + 1e-9);
        CHECK(d1 >= std::fabs(d0 - c) - 1e-9);
    }
}

TEST_CASE("fibered_w2 rejects mismatched grids") {
    auto a = make_uniform_state(uniform_frequency_grid(0.1, 3), 32);
    auto b = make_uniform_state(uniform_frequency_grid(0.1, 4), 32);
    CHECK_THROWS_AS(fibered_w2(a, b), MarginalMismatch);
}

TEST_CASE("hungarian equals exhaustive on random assignment instances") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> uc(0.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 2 + trial % 5;
        std::vector<std::vector<double>> cost(n, std::vector<double>(n));
        for (auto& row : cost)
            for (auto& c : row) c = uc(rng);
        std::vector<int> match;
        double got = hungarian_assignment(cost, match);
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        double best = std::numeric_limits<double>::infinity();
        do {
            double c = 0.0;
            for (int i = 0; i < n; ++i) c += cost[i][perm[i]];
            best = std::min(best, c);
        } while (std::next_permutation(perm.begin(), perm.end()));
        CHECK(got == doctest::Approx(best).epsilon(1e-12));
        // match is a permutation
        std::vector<char> seen(n, 0);
        for (int j : match) {
            CHECK(j >= 0);
            CHECK(!seen[j]);
            seen[j] = 1;
        }
    }
}

TEST_CASE("network simplex equals split-atom Hungarian on general masses") {
    // random masses in twelfths; splitting into unit atoms reduces the
    // general transport problem to an assignment problem
    std::mt19937 rng(31337);
    std::uniform_real_distribution<double> uc(0.0, 3.0);
    for (int trial = 0; trial < 25; ++trial) {
        int L = 12;
        std::vector<int> ka(3, 0), kb(4, 0);
        // random composition of L into parts
        for (int u = 0; u < L; ++u) ka[rng() % ka.size()]++;
        for (int u = 0; u < L; ++u) kb[rng() % kb.size()]++;
        std::vector<double> supply, demand;
        for (int k : ka) supply.push_back(k / double(L));
        for (int k : kb) demand.push_back(k / double(L));
        std::vector<std::vector<double>> cost(supply.size(),
                                              std::vector<double>(demand.size()));
        for (auto& row : cost)
            for (auto& c : row) c = uc(rng);

        std::vector<PlanEntry> plan;
        double ns = network_simplex(supply, demand, cost, &plan);

        // split into L unit atoms per side and assign
        std::vector<int> ia, jb;
        for (std::size_t i = 0; i < supply.size(); ++i)
            for (int u = 0; u < ka[i]; ++u) ia.push_back(static_cast<int>(i));
        for (std::size_t j = 0; j < demand.size(); ++j)
            for (int u = 0; u < kb[j]; ++u) jb.push_back(static_cast<int>(j));
        std::vector<std::vector<double>> cc(L, std::vector<double>(L));
        for (int p = 0; p < L; ++p)
            for (int q = 0; q < L; ++q) cc[p][q] = cost[ia[p]][jb[q]];
        std::vector<int> match;
        double split = hungarian_assignment(cc, match) / L;
        CHECK(ns == doctest::Approx(split).epsilon(1e-10));

        // plan feasibility
        std::vector<double> ra(supply.size(), 0.0), rb(demand.size(), 0.0);
        for (const auto& e : plan) {
            CHECK(e.mass >= 0.0);
            ra[e.from] += e.mass;
            rb[e.to] += e.mass;
        }
        for (std::size_t i = 0; i < supply.size(); ++i)
            CHECK(std::fabs(ra[i] - supply[i]) <= 1e-9);
        for (std::size_t j = 0; j < demand.size(); ++j)
            CHECK(std::fabs(rb[j] - demand[j]) <= 1e-9);
    }
}

TEST_CASE("scaled_w2: trivial, Remark two-point example, brute-force oracle") {
    ModelParams p{2.0, 1.0};
    ProductMeasure mu, nu;
    mu.atoms = {{0.5, -0.3, 0.5}, {1.4, 0.3, 0.5}};
    CHECK(scaled_w2(mu, mu, p).distance <= 1e-12);

    // Remark: nu swaps the thetas; SW2^2 = min(eps_theta^2, eps_omega^2/K^2)
    nu.atoms = {{1.4, -0.3, 0.5}, {0.5, 0.3, 0.5}};
    double eps_th = circle_dist(0.5, 1.4);
    double eps_w = 0.6;
    auto res = scaled_w2(mu, nu, p, SW2Backend::Exhaustive);
    double expect = std::min(eps_th * eps_th, eps_w * eps_w / (p.K * p.K));
    CHECK(res.distance * res.distance == doctest::Approx(expect).epsilon(1e-12));

    // K large: swapping omegas is cheap; K small: moving thetas is cheap
    ModelParams klarge{100.0, 1.0};
    auto r2 = scaled_w2(mu, nu, klarge, SW2Backend::Exhaustive);
    CHECK(r2.distance * r2.distance ==
          doctest::Approx(eps_w * eps_w / (klarge.K * klarge.K)).epsilon(1e-12));

    std::mt19937 rng(5150);
    std::uniform_real_distribution<double> uth(0.0, TWO_PI);
    std::uniform_real_distribution<double> uw(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 2 + trial % 3;  // up to 4 atoms
        std::vector<ProductAtom> A(n), B(n);
        for (auto& a : A) a = {uth(rng), uw(rng), 1.0 / n};
        for (auto& b : B) b = {uth(rng), uw(rng), 1.0 / n};
        ProductMeasure ma, mb;
        ma.atoms = A;
        mb.atoms = B;
        double got = scaled_w2(ma, mb, p).distance;  // dispatches to Hungarian
        double oracle = sw2_bruteforce(A, B, p.K);
        CHECK(std::fabs(got - oracle) <= 1e-10);
        // network simplex on the same instance agrees too
        double ns = scaled_w2(ma, mb, p, SW2Backend::NetworkSimplex).distance;
        CHECK(std::fabs(ns - oracle) <= 1e-10);
    }
}

TEST_CASE("scaled_w2 rejects oversized instances") {
    ModelParams p{1.0, 0.5};
    ProductMeasure big_a, big_b;
    int n = 2600;
    for (int i = 0; i < n; ++i) {
        big_a.atoms.push_back({wrap_angle(0.001 * i), 0.0, (i % 2 ? 2.0 : 1.0) / (1.5 * n)});
        big_b.atoms.push_back({wrap_angle(0.002 * i), 0.1, (i % 2 ? 1.0 : 2.0) / (1.5 * n)});
    }
    CHECK_THROWS_AS(scaled_w2(big_a, big_b, p), InstanceTooLarge);
}

TEST_CASE("scaled_w2 plan cost is consistent with the distance") {
    ModelParams p{3.0, 0.5};
    std::mt19937 rng(321);
    std::uniform_real_distribution<double> uth(0.0, TWO_PI);
    std::uniform_real_distribution<double> uw(-0.5, 0.5);
    ProductMeasure ma, mb;
    for (int i = 0; i < 6; ++i) ma.atoms.push_back({uth(rng), uw(rng), 1.0 / 6});
    for (int i = 0; i < 9; ++i) mb.atoms.push_back({uth(rng), uw(rng), 1.0 / 9});
    auto res = scaled_w2(ma, mb, p);
    CHECK(res.method == "network_simplex");
    CHECK(std::fabs(res.plan_cost() - res.distance * res.distance) <= 1e-9);
}

TEST_CASE("order relation: SW2 <= W2g <= mixing bound on state pairs") {
    ModelParams p{10.0, 0.1};
    FrequencyGrid g = uniform_frequency_grid(0.1, 3);
    std::mt19937 rng(8080);
    std::uniform_real_distribution<double> uc(0.0, TWO_PI);
    std::uniform_real_distribution<double> uk(0.5, 4.0);
    for (int trial = 0; trial < 10; ++trial) {
        auto a = make_vonmises_state(g, 24, uc(rng), uk(rng));
        auto b = make_two_bump_state(g, 24, uc(rng), uc(rng), 0.5, 0.5, uk(rng), uk(rng));
        double w2g = fibered_w2(a, b);
        auto sw2 = scaled_w2(a, b, p);
        CHECK(sw2.distance <= w2g + 1e-8);
        // standard product W2 (cost d^2 + dw^2) is also below W2g
        auto atoms_a = ProductMeasure::from_state(a);
        auto atoms_b = ProductMeasure::from_state(b);
        auto w2std = scaled_w2(atoms_a, atoms_b, ModelParams{1.0, 0.1});
        CHECK(w2std.distance <= w2g + 1e-8);
    }
}

TEST_CASE("verify_order on identical and Remark states") {
    ModelParams p{2.0, 0.3};
    FrequencyGrid g2 = two_atom_frequency_grid(0.3);
    auto a = make_vonmises_state(g2, 32, 1.0, 2.0);
    auto rep0 = verify_order(a, a, p);
    CHECK(rep0.pass());

    // Remark construction with eps_omega/K >= eps_theta: equality
    KineticState mu = make_uniform_state(g2, 128), nu = make_uniform_state(g2, 128);
    std::fill(mu.h.begin(), mu.h.end(), 0.0);
    std::fill(nu.h.begin(), nu.h.end(), 0.0);
    int i1 = 20, i2 = 26;  // eps_theta = 6 cells ~ 0.29 < eps_omega/K = 0.3
    mu.fiber(0)[i1] = 1.0 / mu.dtheta();
    mu.fiber(1)[i2] = 1.0 / mu.dtheta();
    nu.fiber(0)[i2] = 1.0 / nu.dtheta();
    nu.fiber(1)[i1] = 1.0 / nu.dtheta();
    auto rep = verify_order(mu, nu, p);
    CHECK(rep.pass());
    CHECK(std::fabs(rep.min_margin()) <= 1e-9);  // equality case
}
