#include "kuramoto/flow.hpp"

#include <algorithm>
#include <cmath>

namespace kuramoto::flow {

FlowField FlowField::from_trajectory(const KineticTrajectory& traj) {
    FlowField f;
    f.params = traj.params;
    f.grid = traj.grid;
    f.t_begin = traj.times.front();
    f.dt = traj.dt;
    f.R = traj.R;
    f.phi_unwrapped = traj.phi_unwrapped;
    return f;
}

FlowField FlowField::frozen(const ModelParams& params, const FrequencyGrid& grid,
                            double R_const, double phi_const, double t_begin,
                            double t_end, double dt) {
    FlowField f;
    f.params = params;
    f.grid = grid;
    f.t_begin = t_begin;
    f.dt = dt;
    std::size_t n = static_cast<std::size_t>(std::ceil((t_end - t_begin) / dt)) + 2;
    f.R.assign(n, R_const);
    f.phi_unwrapped.assign(n, phi_const);
    return f;
}

namespace {

double lerp_sample(const std::vector<double>& v, double t_begin, double dt, double t) {
    if (v.size() < 2) return v.empty() ? 0.0 : v.front();
    double x = (t - t_begin) / dt;
    double k = std::floor(x);
    std::size_t i = static_cast<std::size_t>(std::clamp(k, 0.0, double(v.size() - 2)));
    double frac = std::clamp(x - static_cast<double>(i), 0.0, 1.0);
    return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

}  // namespace

double FlowField::R_at(double t) const { return lerp_sample(R, t_begin, dt, t); }
double FlowField::phi_at(double t) const {
    return lerp_sample(phi_unwrapped, t_begin, dt, t);
}

double FlowField::speed(double theta, std::size_t fiber, double t) const {
    return grid.nodes[fiber] - params.K * R_at(t) * std::sin(theta - phi_at(t));
}

EvolvingSet EvolvingSet::uniform_arc(double birth, std::size_t n_fibers, const Arc& arc) {
    EvolvingSet s;
    s.birth = birth;
    s.fiber_arcs.assign(n_fibers, {arc});
    return s;
}

bool EvolvingSet::empty() const {
    for (const auto& arcs : fiber_arcs)
        if (!arcs.empty()) return false;
    return true;
}

namespace {

// RK4 on the lifted phase; sub-steps aligned to the sample spacing.
double integrate_lifted(const FlowField& field, double theta0, std::size_t fiber,
                        double t0, double t1) {
    const double span = t1 - t0;
    if (span == 0.0) return theta0;
    int n_steps = std::max(1, static_cast<int>(std::ceil(std::fabs(span) / field.dt)));
    double h = span / n_steps;
    double th = theta0;
    double s = t0;
    for (int k = 0; k < n_steps; ++k) {
        double k1 = field.speed(th, fiber, s);
        double k2 = field.speed(th + 0.5 * h * k1, fiber, s + 0.5 * h);
        double k3 = field.speed(th + 0.5 * h * k2, fiber, s + 0.5 * h);
        double k4 = field.speed(th + h * k3, fiber, s + h);
        th += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        s += h;
    }
    return th;
}

}  // namespace

double flow_point(const FlowField& field, double theta, std::size_t fiber, double t0,
                  double t) {
    const double pad = 0.5 * field.dt;
    if (t0 < field.t_begin - pad || t0 > field.t_end() + pad ||
        t < field.t_begin - pad || t > field.t_end() + pad)
        throw OutOfRange("flow_point: query outside the stored sample range");
    return wrap_angle(integrate_lifted(field, theta, fiber, t0, t));
}

EvolvingSet evolve_set(const FlowField& field, const EvolvingSet& set, double t) {
    if (t < set.birth) throw OutOfRange("evolve_set: t must be >= birth time");
    EvolvingSet out;
    out.birth = set.birth;
    out.fiber_arcs.resize(set.fiber_arcs.size());
    for (std::size_t j = 0; j < set.fiber_arcs.size(); ++j) {
        for (const Arc& a : set.fiber_arcs[j]) {
            if (a.half_width >= PI) {
                out.fiber_arcs[j].push_back(a);  // full circle is invariant
                continue;
            }
            double lo_t = integrate_lifted(field, a.lo(), j, set.birth, t);
            double hi_t = integrate_lifted(field, a.hi(), j, set.birth, t);
            // per-fiber flows are monotone circle maps: hi stays ahead of lo
            Arc moved;
            moved.half_width = std::min(PI, 0.5 * (hi_t - lo_t));
            moved.center = wrap_angle(0.5 * (lo_t + hi_t));
            out.fiber_arcs[j].push_back(moved);
        }
    }
    return out;
}

std::optional<Arc> projection_hull(const EvolvingSet& set) {
    std::vector<Arc> arcs;
    for (const auto& fa : set.fiber_arcs)
        for (const Arc& a : fa) {
            if (a.half_width >= PI) return std::nullopt;
            arcs.push_back(a);
        }
    if (arcs.empty()) return std::nullopt;
    // the hull is the complement of the largest uncovered gap
    std::vector<std::pair<double, double>> intervals;  // unrolled over 2 periods
    for (const Arc& a : arcs) {
        double lo = wrap_angle(a.center - a.half_width);
        intervals.emplace_back(lo, lo + 2.0 * a.half_width);
        intervals.emplace_back(lo + TWO_PI, lo + 2.0 * a.half_width + TWO_PI);
    }
    std::sort(intervals.begin(), intervals.end());
    double best_gap = 0.0, gap_end = intervals.front().first;
    double cover_hi = intervals.front().second;
    double gap_hull_lo = 0.0;
    bool found = false;
    for (std::size_t i = 1; i < intervals.size(); ++i) {
        if (intervals[i].first > cover_hi) {
            double gap = intervals[i].first - cover_hi;
            if (gap > best_gap) {
                best_gap = gap;
                gap_end = intervals[i].first;
                gap_hull_lo = gap_end;
                found = true;
            }
        }
        cover_hi = std::max(cover_hi, intervals[i].second);
    }
    (void)gap_end;
    if (!found || best_gap <= 0.0) return std::nullopt;  // arcs cover the circle
    double hull_len = TWO_PI - best_gap;
    Arc hull;
    hull.center = wrap_angle(gap_hull_lo + 0.5 * hull_len);
    hull.half_width = 0.5 * hull_len;
    return hull;
}

double min_pair_cosine_value(const EvolvingSet& set) {
    std::vector<Arc> arcs;
    for (const auto& fa : set.fiber_arcs)
        for (const Arc& a : fa) {
            if (a.half_width >= PI / 2) return -1.0;  // contains an antipodal pair
            arcs.push_back(a);
        }
    if (arcs.empty()) return 1.0;
    double max_dist = 0.0;
    for (std::size_t p = 0; p < arcs.size() && max_dist < PI; ++p) {
        for (std::size_t q = p; q < arcs.size(); ++q) {
            const Arc& a = arcs[p];
            const Arc& b = arcs[q];
            // if the antipode band of a meets b, the distance reaches pi
            double gap = circle_dist(wrap_angle(a.center + PI), b.center);
            if (gap <= a.half_width + b.half_width) {
                max_dist = PI;
                break;
            }
            for (double x : {a.lo(), a.hi()})
                for (double y : {b.lo(), b.hi()})
                    max_dist = std::max(max_dist, circle_dist(x, y));
        }
    }
    return std::cos(max_dist);
}

double f2_over_set(const KineticState& state, const EvolvingSet& set) {
    const double dth = state.dtheta();
    double total = 0.0;
    for (std::size_t j = 0; j < state.grid.size() && j < set.fiber_arcs.size(); ++j) {
        const double* hj = state.fiber(j);
        double acc = 0.0;
        for (int i = 0; i < state.n_theta; ++i) {
            double overlap = 0.0;
            for (const Arc& a : set.fiber_arcs[j])
                overlap += cell_arc_overlap(i * dth, dth, a);
            acc += hj[i] * hj[i] * std::min(overlap, dth);
        }
        total += state.grid.weights[j] * state.grid.density(j) * acc;
    }
    return total;
}

double set_mass(const KineticState& state, const EvolvingSet& set) {
    const double dth = state.dtheta();
    double total = 0.0;
    for (std::size_t j = 0; j < state.grid.size() && j < set.fiber_arcs.size(); ++j) {
        const double* hj = state.fiber(j);
        double acc = 0.0;
        for (int i = 0; i < state.n_theta; ++i) {
            double overlap = 0.0;
            for (const Arc& a : set.fiber_arcs[j])
                overlap += cell_arc_overlap(i * dth, dth, a);
            acc += hj[i] * std::min(overlap, dth);
        }
        total += state.grid.weights[j] * acc;
    }
    return total;
}

namespace {

double sup_cosine(const EvolvingSet& set, double phi) {
    double best = -1.0;
    for (const auto& fa : set.fiber_arcs) {
        for (const Arc& a : fa) {
            double d = circle_dist(a.center, phi);
            if (d <= a.half_width)
                best = 1.0;
            else
                best = std::max(best, std::cos(d - a.half_width));
        }
    }
    return best;
}

}  // namespace

SlidingNormResult sliding_square_norm(const KineticTrajectory& traj,
                                      const EvolvingSet& set, double t,
                                      double tol_scale) {
    SlidingNormResult res;
    res.report.name = "gl2_sliding_norm";
    FlowField field = FlowField::from_trajectory(traj);

    std::vector<double> ts, f2s, sups, Rs;
    for (std::size_t k = 0; k < traj.snapshot_times.size(); ++k) {
        double s = traj.snapshot_times[k];
        if (s < set.birth - 0.5 * traj.dt || s > t + 0.5 * traj.dt) continue;
        EvolvingSet at_s = evolve_set(field, set, std::max(s, set.birth));
        ts.push_back(s);
        f2s.push_back(f2_over_set(traj.snapshots[k], at_s));
        std::size_t step = traj.step_index_at(s);
        sups.push_back(sup_cosine(at_s, traj.phi_at_step(step)));
        Rs.push_back(traj.R[step]);
    }
    if (ts.size() < 2) {
        res.report.skipped = true;
        res.report.skip_reason = "fewer than two snapshots in [birth, t]";
        if (!f2s.empty()) res.value = f2s.back();
        return res;
    }
    res.value = f2s.back();

    double f2_max = 0.0;
    for (double v : traj.f2_total_series) f2_max = std::max(f2_max, v);
    const double K = traj.params.K;
    const double dth = TWO_PI / traj.n_theta;
    res.report.tol_note =
        "tol_scale*K*max f2_total*(5 dtheta + K dt_fd): boundary-cell quadrature "
        "plus snapshot differencing";
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        double ds = ts[k + 1] - ts[k];
        double fd = (f2s[k + 1] - f2s[k]) / ds;
        double rhs = K * Rs[k] * sups[k] * f2s[k];
        res.report.tol = tol_scale * K * f2_max * (5.0 * dth + K * ds);
        res.report.add(ts[k], rhs - fd);
    }
    res.report.floor = K * f2_max * dth;
    return res;
}

PairCosineResult min_pair_cosine(const KineticTrajectory& traj, const EvolvingSet& set,
                                 double t, std::optional<double> sigma, double tol) {
    PairCosineResult res;
    res.report.name = "attractor_pair_cosine";
    res.report.tol = tol;
    res.report.tol_note = "absolute slack on 1 - P_bar";
    FlowField field = FlowField::from_trajectory(traj);

    std::size_t k0 = traj.snapshot_index_at(set.birth);
    auto hull = projection_hull(set);
    if (!hull) {
        res.report.skipped = true;
        res.report.skip_reason = "projection covers the circle";
        return res;
    }
    double m = set_mass(traj.snapshots[k0], set);
    double p = min_pair_cosine_value(set);
    double sig = sigma.value_or(m * p - (1.0 - m));
    const double K = traj.params.K;
    const double W = traj.params.W;
    res.report.notes.push_back("m=" + std::to_string(m) + " p=" + std::to_string(p) +
                               " sigma=" + std::to_string(sig));
    if (!(m * p - (1.0 - m) >= sig) || sig <= 0.0) {
        res.report.skipped = true;
        res.report.skip_reason = "entry hypothesis m p - (1-m) >= sigma fails";
        return res;
    }
    if (!(W * W / (K * K) <= (1.0 - p) * sig * sig / 4.0 + 1e-15)) {
        res.report.skipped = true;
        res.report.skip_reason = "hypothesis W^2/K^2 <= (1-p) sigma^2/4 fails";
        return res;
    }

    for (std::size_t k = k0; k < traj.snapshot_times.size(); ++k) {
        double s = traj.snapshot_times[k];
        if (s < set.birth || s > t + 0.5 * traj.dt) continue;
        EvolvingSet at_s = evolve_set(field, set, s);
        double pbar = min_pair_cosine_value(at_s);
        res.times.push_back(s);
        res.p_bar_series.push_back(pbar);
        double bound = std::max((1.0 - p) * std::exp(-K * sig * (s - set.birth) / 4.0),
                                4.0 * W * W / (sig * sig * K * K));
        res.report.add(s, bound - (1.0 - pbar));
    }
    if (!res.p_bar_series.empty()) res.p_bar = res.p_bar_series.back();
    return res;
}

EvolvingSet arc_neighborhood(const EvolvingSet& set, double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw ConfigError("arc_neighborhood: eps must lie in (0, 1)");
    auto hull = projection_hull(set);
    if (!hull) throw ConfigError("arc_neighborhood: projection covers the circle");
    double delta = std::acos(1.0 - eps);
    EvolvingSet out;
    out.birth = set.birth;
    out.fiber_arcs.resize(set.fiber_arcs.size());
    if (delta < hull->half_width) return out;  // no point sees all of the set
    Arc grown;
    grown.center = hull->center;
    grown.half_width = std::min(PI, delta - hull->half_width);
    for (auto& fa : out.fiber_arcs) fa.push_back(grown);
    return out;
}

}  // namespace kuramoto::flow
