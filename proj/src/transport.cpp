#include "kuramoto/transport.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace kuramoto::transport {

namespace {
constexpr double INF = std::numeric_limits<double>::infinity();
}

void CircleMeasure::validate() const {
    if (theta.size() != mass.size()) throw ConfigError("CircleMeasure: size mismatch");
    double total = 0.0;
    for (double m : mass) {
        if (m < 0.0) throw ConfigError("CircleMeasure: negative mass");
        total += m;
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw ConfigError("CircleMeasure: total mass != 1");
}

CircleMeasure CircleMeasure::from_fiber(const KineticState& state, std::size_t j) {
    CircleMeasure m;
    const double dth = state.dtheta();
    const double* hj = state.fiber(j);
    for (int i = 0; i < state.n_theta; ++i) {
        if (hj[i] > 0.0) {
            m.theta.push_back(state.theta_center(i));
            m.mass.push_back(hj[i] * dth);
        }
    }
    return m;
}

double ProductMeasure::total_mass() const {
    double t = 0.0;
    for (const auto& a : atoms) t += a.mass;
    return t;
}

void ProductMeasure::validate() const {
    for (const auto& a : atoms)
        if (a.mass < 0.0) throw ConfigError("ProductMeasure: negative mass");
    if (std::fabs(total_mass() - 1.0) > 1e-9)
        throw ConfigError("ProductMeasure: total mass != 1");
}

ProductMeasure ProductMeasure::from_state(const KineticState& state, double mass_floor) {
    ProductMeasure m;
    const double dth = state.dtheta();
    for (std::size_t j = 0; j < state.grid.size(); ++j) {
        const double* hj = state.fiber(j);
        for (int i = 0; i < state.n_theta; ++i) {
            double mass = state.grid.weights[j] * hj[i] * dth;
            if (mass > mass_floor)
                m.atoms.push_back({state.theta_center(i), state.grid.nodes[j], mass});
        }
    }
    if (mass_floor > 0.0) {
        double total = m.total_mass();
        for (auto& a : m.atoms) a.mass /= total;
    }
    return m;
}

ProductMeasure ProductMeasure::from_particles(const ParticleEnsemble& ensemble) {
    ProductMeasure m;
    const double w = 1.0 / static_cast<double>(ensemble.size());
    for (std::size_t i = 0; i < ensemble.size(); ++i)
        m.atoms.push_back({ensemble.phases[i], ensemble.frequencies[i], w});
    return m;
}

ProductMeasure ProductMeasure::from_equilibrium(const EquilibriumState& eq) {
    ProductMeasure m;
    for (std::size_t j = 0; j < eq.grid.size(); ++j)
        if (eq.grid.weights[j] > 0.0)
            m.atoms.push_back({eq.atom_theta[j], eq.grid.nodes[j], eq.grid.weights[j]});
    return m;
}

double TransportResult::plan_cost() const {
    double c = 0.0;
    for (const auto& e : plan) c += e.mass * e.cost;
    return c;
}

// ---------------------------------------------------------------------------
// Circle W2 by quantile matching over the circular cut.
// ---------------------------------------------------------------------------
namespace {

struct SortedMeasure {
    std::vector<double> x;     // sorted atom positions
    std::vector<double> cum;   // cumulative masses, cum.back() == 1
    std::vector<int> orig;     // original atom index
};

SortedMeasure sort_measure(const CircleMeasure& m) {
    std::vector<int> idx;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m.mass[i] > 0.0) idx.push_back(static_cast<int>(i));
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return m.theta[a] < m.theta[b]; });
    SortedMeasure s;
    double acc = 0.0;
    for (int i : idx) {
        s.x.push_back(wrap_angle(m.theta[i]));
        acc += m.mass[i];
        s.cum.push_back(acc);
        s.orig.push_back(i);
    }
    double total = s.cum.back();
    for (double& c : s.cum) c /= total;
    s.cum.back() = 1.0;
    return s;
}

// Walks the merged quantile segments for cut parameter s. When `plan` is
// given, records (mu atom, nu atom, mass, lifted displacement) pieces.
double quantile_cost(const SortedMeasure& A, const SortedMeasure& B, double s,
                     std::vector<std::tuple<int, int, double, double>>* plan = nullptr) {
    const std::size_t n = A.x.size(), m = B.x.size();
    double t = 0.0, cost = 0.0;
    std::size_t ia = 0;
    double next_a = A.cum[0];

    double k = std::floor(s);
    double fr = s - k;
    std::size_t jb = 0;
    while (jb < m && B.cum[jb] <= fr + 1e-18) ++jb;
    if (jb == m) {
        jb = 0;
        k += 1.0;
    }
    double next_b = B.cum[jb] + k - s;

    const std::size_t max_iter = 8 * (n + m) + 64;
    for (std::size_t iter = 0; iter < max_iter && t < 1.0 - 1e-15; ++iter) {
        double tn = std::min({next_a, next_b, 1.0});
        double disp = A.x[ia] - (B.x[jb] + TWO_PI * k);
        double seg = tn - t;
        if (seg > 0.0) {
            cost += disp * disp * seg;
            if (plan) plan->emplace_back(static_cast<int>(ia), static_cast<int>(jb), seg, disp);
        }
        t = tn;
        if (t >= 1.0 - 1e-15) break;
        if (next_a <= next_b) {
            if (ia + 1 < n) ++ia;
            next_a = A.cum[ia];
            if (ia + 1 == n) next_a = 1.0;
        } else {
            ++jb;
            if (jb == m) {
                jb = 0;
                k += 1.0;
            }
            next_b = B.cum[jb] + k - s;
        }
    }
    return cost;
}

}  // namespace

TransportResult w2_circle(const CircleMeasure& mu, const CircleMeasure& nu) {
    double ma = std::accumulate(mu.mass.begin(), mu.mass.end(), 0.0);
    double mb = std::accumulate(nu.mass.begin(), nu.mass.end(), 0.0);
    if (std::fabs(ma - mb) > 1e-9)
        throw MassMismatch("w2_circle: total masses differ");
    SortedMeasure A = sort_measure(mu);
    SortedMeasure B = sort_measure(nu);
    if (A.x.empty() || B.x.empty())
        throw ConfigError("w2_circle: empty measure");

    auto cost_at = [&](double s) { return quantile_cost(A, B, s); };

    // The cut cost is convex piecewise linear in s; golden-section brackets
    // the minimizer, then the exact minimum is taken over the cut candidates
    // (atom-boundary alignments) inside the bracket.
    double lo = -2.0, hi = 2.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = cost_at(c), fd = cost_at(d);
    for (int it = 0; it < 64 && hi - lo > 1e-7; ++it) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = cost_at(c);
        } else if (fd < fc) {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = cost_at(d);
        } else {
            lo = c;
            hi = d;
            c = hi - gr * (hi - lo);
            d = lo + gr * (hi - lo);
            fc = cost_at(c);
            fd = cost_at(d);
        }
    }

    // Candidate cuts: s = cumB[j] - cumA[i] + k within the bracket.
    double pad = 1e-9;
    std::vector<double> candidates{0.5 * (lo + hi)};
    for (double ca : A.cum) {
        for (double k = -3.0; k <= 3.0; k += 1.0) {
            // find cumB values with cumB + k - ca inside [lo-pad, hi+pad]
            double blo = lo - pad + ca - k, bhi = hi + pad + ca - k;
            auto first = std::lower_bound(B.cum.begin(), B.cum.end(), blo);
            for (auto it = first; it != B.cum.end() && *it <= bhi; ++it)
                candidates.push_back(*it + k - ca);
        }
    }
    double best_s = candidates.front(), best = cost_at(best_s);
    for (double s : candidates) {
        double v = cost_at(s);
        if (v < best) {
            best = v;
            best_s = s;
        }
    }

    TransportResult res;
    res.method = "quantile";
    res.distance = std::sqrt(std::max(0.0, best));
    std::vector<std::tuple<int, int, double, double>> pieces;
    quantile_cost(A, B, best_s, &pieces);
    for (auto& [ia, jb, mass, disp] : pieces) {
        PlanEntry e;
        e.from = A.orig[ia];
        e.to = B.orig[jb];
        e.mass = mass * ma;  // scale back to input mass units
        e.cost = disp * disp;
        res.plan.push_back(e);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Fibered distance.
// ---------------------------------------------------------------------------

double fibered_w2(const KineticState& a, const KineticState& b) {
    if (a.n_theta != b.n_theta || !a.grid.same_as(b.grid, 1e-9))
        throw MarginalMismatch("fibered_w2: states must share the same grids");
    double acc = 0.0;
    for (std::size_t j = 0; j < a.grid.size(); ++j) {
        CircleMeasure ma = CircleMeasure::from_fiber(a, j);
        CircleMeasure mb = CircleMeasure::from_fiber(b, j);
        TransportResult r = w2_circle(ma, mb);
        acc += a.grid.weights[j] * r.distance * r.distance;
    }
    return std::sqrt(acc);
}

double fibered_w2(const KineticState& a, const EquilibriumState& b) {
    return fibered_w2_to_equilibrium(a, b);
}

double fibered_w2(const EquilibriumState& a, const EquilibriumState& b) {
    if (!a.grid.same_as(b.grid, 1e-9))
        throw MarginalMismatch("fibered_w2: equilibria on different grids");
    double acc = 0.0;
    for (std::size_t j = 0; j < a.grid.size(); ++j) {
        double d = circle_dist(a.atom_theta[j], b.atom_theta[j]);
        acc += a.grid.weights[j] * d * d;
    }
    return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Hungarian assignment (Jonker-Volgenant style shortest augmenting paths).
// ---------------------------------------------------------------------------

double hungarian_assignment(const std::vector<std::vector<double>>& cost,
                            std::vector<int>& match) {
    const int n = static_cast<int>(cost.size());
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, INF);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = -1;
            double delta = INF;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    match.assign(n, -1);
    double total = 0.0;
    for (int j = 1; j <= n; ++j) {
        if (p[j] > 0) {
            match[p[j] - 1] = j - 1;
            total += cost[p[j] - 1][j - 1];
        }
    }
    return total;
}

// ---------------------------------------------------------------------------
// Transportation network simplex on the dense bipartite graph.
// ---------------------------------------------------------------------------
namespace {

struct TreeEdge {
    int src;   // source index in [0, n)
    int snk;   // sink index in [0, m)
    double flow;
};

class TransportSimplex {
public:
    TransportSimplex(std::vector<double> a, std::vector<double> b,
                     std::function<double(int, int)> cost)
        : a_(std::move(a)), b_(std::move(b)), cost_(std::move(cost)) {
        n_ = static_cast<int>(a_.size());
        m_ = static_cast<int>(b_.size());
        nodes_ = n_ + m_;
        double sa = std::accumulate(a_.begin(), a_.end(), 0.0);
        double sb = std::accumulate(b_.begin(), b_.end(), 0.0);
        if (std::fabs(sa - sb) > 1e-9 * std::max(1.0, sa))
            throw MassMismatch("network_simplex: supplies and demands differ");
        for (double& x : b_) x *= sa / sb;
        cost_scale_ = 1.0;
        for (int i = 0; i < std::min(n_, 64); ++i)
            for (int j = 0; j < std::min(m_, 64); ++j)
                cost_scale_ = std::max(cost_scale_, std::fabs(cost_(i, j)));
    }

    double solve(std::vector<PlanEntry>* plan) {
        northwest_start();
        build_adjacency();
        const double eps = 1e-12 * cost_scale_;
        const long block = std::max<long>(64, static_cast<long>(
            std::sqrt(static_cast<double>(n_) * m_)));
        const long arc_count = static_cast<long>(n_) * m_;
        long cursor = 0;
        long max_pivots = 200L * nodes_ + 20000L;
        for (long pivot = 0; pivot < max_pivots; ++pivot) {
            compute_potentials();
            // block search for the entering arc
            int enter_i = -1, enter_j = -1;
            double best_rc = -eps;
            long scanned = 0;
            while (scanned < arc_count) {
                long stop = std::min(arc_count, scanned + block);
                for (; scanned < stop; ++scanned) {
                    long idx = (cursor + scanned) % arc_count;
                    int i = static_cast<int>(idx / m_);
                    int j = static_cast<int>(idx % m_);
                    double rc = cost_(i, j) - u_[i] - v_[j];
                    if (rc < best_rc) {
                        best_rc = rc;
                        enter_i = i;
                        enter_j = j;
                    }
                }
                if (enter_i >= 0) break;
            }
            cursor = (cursor + scanned) % arc_count;
            if (enter_i < 0) break;  // optimal
            pivot_edge(enter_i, enter_j);
        }
        // final exactness sweep
        compute_potentials();
        double total = 0.0;
        for (const auto& e : edges_)
            if (e.flow > 0.0) total += e.flow * cost_(e.src, e.snk);
        if (plan) {
            plan->clear();
            for (const auto& e : edges_)
                if (e.flow > 0.0)
                    plan->push_back({e.src, e.snk, e.flow, cost_(e.src, e.snk)});
        }
        return total;
    }

private:
    int node_of_src(int i) const { return i; }
    int node_of_snk(int j) const { return n_ + j; }

    void northwest_start() {
        std::vector<double> ra = a_, rb = b_;
        int i = 0, j = 0;
        edges_.clear();
        while (true) {
            double f = std::min(ra[i], rb[j]);
            edges_.push_back({i, j, f});
            ra[i] -= f;
            rb[j] -= f;
            if (i == n_ - 1 && j == m_ - 1) break;
            if (i == n_ - 1)
                ++j;
            else if (j == m_ - 1)
                ++i;
            else if (ra[i] < rb[j])
                ++i;
            else if (rb[j] < ra[i])
                ++j;
            else
                ++i;  // tie: cross out the row, keep a degenerate column cell
        }
    }

    void build_adjacency() {
        adj_.assign(nodes_, {});
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            adj_[node_of_src(edges_[e].src)].push_back(static_cast<int>(e));
            adj_[node_of_snk(edges_[e].snk)].push_back(static_cast<int>(e));
        }
    }

    // BFS from node 0 over the basis tree: potentials + parent structure.
    void compute_potentials() {
        u_.assign(n_, 0.0);
        v_.assign(m_, 0.0);
        parent_node_.assign(nodes_, -1);
        parent_edge_.assign(nodes_, -1);
        depth_.assign(nodes_, -1);
        std::vector<int> stack{0};
        depth_[0] = 0;
        u_[0] = 0.0;
        while (!stack.empty()) {
            int nd = stack.back();
            stack.pop_back();
            for (int eid : adj_[nd]) {
                const TreeEdge& e = edges_[eid];
                int other = (node_of_src(e.src) == nd) ? node_of_snk(e.snk)
                                                       : node_of_src(e.src);
                if (depth_[other] >= 0) continue;
                depth_[other] = depth_[nd] + 1;
                parent_node_[other] = nd;
                parent_edge_[other] = eid;
                if (other >= n_)
                    v_[other - n_] = cost_(e.src, e.snk) - u_[e.src];
                else
                    u_[other] = cost_(e.src, e.snk) - v_[e.snk];
                stack.push_back(other);
            }
        }
    }

    void pivot_edge(int ei, int ej) {
        // Cycle: entering arc ei -> ej plus tree path from sink node back to
        // source node. Walk both endpoints up to their LCA.
        int x = node_of_src(ei), y = node_of_snk(ej);
        std::vector<int> path_x, path_y;  // edge ids climbing to LCA
        int px = x, py = y;
        while (px != py) {
            if (depth_[px] >= depth_[py]) {
                path_x.push_back(parent_edge_[px]);
                px = parent_node_[px];
            } else {
                path_y.push_back(parent_edge_[py]);
                py = parent_node_[py];
            }
        }
        // Orientation: traversal follows src->snk => +delta, snk->src => -delta.
        // Full cycle: enter (src ei -> snk ej, +), then climb from y, then the
        // reversed climb back down to x.
        struct Leg {
            int eid;
            int sign;
        };
        std::vector<Leg> legs;
        int cur = y;
        for (int eid : path_y) {
            const TreeEdge& e = edges_[eid];
            bool from_snk = (node_of_snk(e.snk) == cur);
            legs.push_back({eid, from_snk ? -1 : +1});
            cur = (node_of_snk(e.snk) == cur) ? node_of_src(e.src) : node_of_snk(e.snk);
        }
        cur = px;  // LCA; descend toward x by reversing path_x
        for (auto it = path_x.rbegin(); it != path_x.rend(); ++it) {
            const TreeEdge& e = *&edges_[*it];
            bool to_snk = (node_of_src(e.src) == cur);
            legs.push_back({*it, to_snk ? +1 : -1});
            cur = (node_of_src(e.src) == cur) ? node_of_snk(e.snk) : node_of_src(e.src);
        }
        double delta = INF;
        int leave = -1;
        for (const auto& leg : legs) {
            if (leg.sign < 0 && edges_[leg.eid].flow <= delta) {
                delta = edges_[leg.eid].flow;
                leave = leg.eid;
            }
        }
        if (leave < 0) throw DomainError("network_simplex: unbounded cycle");
        for (const auto& leg : legs) edges_[leg.eid].flow += leg.sign * delta;
        // replace the leaving edge by the entering edge in the basis
        TreeEdge& le = edges_[leave];
        remove_adj(node_of_src(le.src), leave);
        remove_adj(node_of_snk(le.snk), leave);
        le = {ei, ej, delta};
        adj_[node_of_src(ei)].push_back(leave);
        adj_[node_of_snk(ej)].push_back(leave);
    }

    void remove_adj(int node, int eid) {
        auto& lst = adj_[node];
        lst.erase(std::find(lst.begin(), lst.end(), eid));
    }

    std::vector<double> a_, b_;
    std::function<double(int, int)> cost_;
    int n_ = 0, m_ = 0, nodes_ = 0;
    double cost_scale_ = 1.0;
    std::vector<TreeEdge> edges_;
    std::vector<std::vector<int>> adj_;
    std::vector<double> u_, v_;
    std::vector<int> parent_node_, parent_edge_, depth_;
};

}  // namespace

double network_simplex(const std::vector<double>& supply, const std::vector<double>& demand,
                       const std::vector<std::vector<double>>& cost,
                       std::vector<PlanEntry>* plan) {
    TransportSimplex solver(supply, demand,
                            [&cost](int i, int j) { return cost[i][j]; });
    return solver.solve(plan);
}

// ---------------------------------------------------------------------------
// Scaled W2 dispatch.
// ---------------------------------------------------------------------------
namespace {

double sw2_ground_cost(const ProductAtom& p, const ProductAtom& q, double K) {
    double dth = circle_dist(p.theta, q.theta);
    double dw = (p.omega - q.omega) / K;
    return dth * dth + dw * dw;
}

bool is_uniform(const std::vector<ProductAtom>& atoms) {
    if (atoms.empty()) return false;
    double m0 = atoms.front().mass;
    for (const auto& a : atoms)
        if (std::fabs(a.mass - m0) > 1e-12 * std::max(1.0, m0)) return false;
    return true;
}

std::vector<ProductAtom> nonzero_atoms(const ProductMeasure& m) {
    std::vector<ProductAtom> v;
    for (const auto& a : m.atoms)
        if (a.mass > 0.0) v.push_back(a);
    return v;
}

TransportResult sw2_exhaustive(const std::vector<ProductAtom>& A,
                               const std::vector<ProductAtom>& B, double K) {
    const int n = static_cast<int>(A.size());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_cost = INF;
    do {
        double c = 0.0;
        for (int i = 0; i < n; ++i) c += sw2_ground_cost(A[i], B[perm[i]], K);
        if (c < best_cost) {
            best_cost = c;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    TransportResult res;
    res.method = "exhaustive";
    double total_mass = 0.0;
    for (int i = 0; i < n; ++i) {
        res.plan.push_back({i, best[i], A[i].mass, sw2_ground_cost(A[i], B[best[i]], K)});
        total_mass += A[i].mass;
    }
    res.distance = std::sqrt(std::max(0.0, res.plan_cost() / total_mass));
    return res;
}

}  // namespace

TransportResult scaled_w2(const ProductMeasure& mu, const ProductMeasure& nu,
                          const ModelParams& params, SW2Backend backend) {
    auto A = nonzero_atoms(mu);
    auto B = nonzero_atoms(nu);
    double sa = 0.0, sb = 0.0;
    for (const auto& a : A) sa += a.mass;
    for (const auto& b : B) sb += b.mass;
    if (std::fabs(sa - sb) > 1e-9 * std::max(1.0, sa))
        throw MassMismatch("scaled_w2: total masses differ");
    const double K = params.K;

    bool uniform_pair = (A.size() == B.size()) && is_uniform(A) && is_uniform(B);
    if (backend == SW2Backend::Auto)
        backend = uniform_pair ? SW2Backend::Hungarian : SW2Backend::NetworkSimplex;

    switch (backend) {
        case SW2Backend::Exhaustive: {
            if (!uniform_pair || A.size() > SW2_EXACT_LIMIT)
                throw InstanceTooLarge("scaled_w2: exhaustive backend needs uniform atoms, n <= 8");
            return sw2_exhaustive(A, B, K);
        }
        case SW2Backend::Hungarian: {
            if (!uniform_pair)
                throw InstanceTooLarge("scaled_w2: Hungarian backend needs uniform equal counts");
            if (A.size() > SW2_HUNGARIAN_LIMIT)
                throw InstanceTooLarge("scaled_w2: instance exceeds Hungarian limit");
            const int n = static_cast<int>(A.size());
            std::vector<std::vector<double>> cost(n, std::vector<double>(n));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) cost[i][j] = sw2_ground_cost(A[i], B[j], K);
            std::vector<int> match;
            hungarian_assignment(cost, match);
            TransportResult res;
            res.method = "hungarian";
            for (int i = 0; i < n; ++i)
                res.plan.push_back({i, match[i], A[i].mass, cost[i][match[i]]});
            res.distance = std::sqrt(std::max(0.0, res.plan_cost() / sa));
            return res;
        }
        case SW2Backend::NetworkSimplex: {
            if (A.size() + B.size() > SW2_SIMPLEX_LIMIT)
                throw InstanceTooLarge("scaled_w2: instance exceeds network-simplex limit");
            std::vector<double> supply(A.size()), demand(B.size());
            for (std::size_t i = 0; i < A.size(); ++i) supply[i] = A[i].mass;
            for (std::size_t j = 0; j < B.size(); ++j) demand[j] = B[j].mass;
            TransportResult res;
            res.method = "network_simplex";
            TransportSimplex solver(supply, demand, [&](int i, int j) {
                return sw2_ground_cost(A[i], B[j], K);
            });
            double total = solver.solve(&res.plan);
            res.distance = std::sqrt(std::max(0.0, total / sa));
            return res;
        }
        default:
            throw ConfigError("scaled_w2: unknown backend");
    }
}

TransportResult scaled_w2(const KineticState& a, const KineticState& b,
                          const ModelParams& params) {
    return scaled_w2(ProductMeasure::from_state(a), ProductMeasure::from_state(b), params);
}

InequalityReport verify_order(const KineticState& a, const KineticState& b,
                              const ModelParams& params, double tol) {
    InequalityReport rep;
    rep.name = "sw2_le_w2g";
    rep.tol = tol;
    rep.tol_note = "absolute tolerance on the distance ordering";
    double w2g = fibered_w2(a, b);
    TransportResult sw2 = scaled_w2(a, b, params);
    rep.add(a.time, w2g - sw2.distance);
    rep.notes.push_back("w2g=" + std::to_string(w2g) +
                        " sw2=" + std::to_string(sw2.distance));
    return rep;
}

}  // namespace kuramoto::transport
