#include "kuramoto/io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace kuramoto::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_diagnostics_csv(const std::string& path, const KineticTrajectory& traj,
                           std::uint64_t config_hash) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    char head[64];
    std::snprintf(head, sizeof(head), "# config_hash=%016llx version=1",
                  static_cast<unsigned long long>(config_hash));
    out << head << "\n";
    out << "t,R,phi,Rdot,I,dIdt_formula,f2_total,f2_chi_minus,W2g_to_eq\n";
    const double dt = traj.dt;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        double rdot;
        if (k == 0)
            rdot = (traj.R[1] - traj.R[0]) / dt;
        else if (k + 1 == traj.times.size())
            rdot = (traj.R[k] - traj.R[k - 1]) / dt;
        else
            rdot = (traj.R[k + 1] - traj.R[k - 1]) / (2 * dt);
        out << fmt(traj.times[k]) << ',' << fmt(traj.R[k]) << ','
            << fmt(traj.phi_at_step(k)) << ',' << fmt(rdot) << ','
            << fmt(traj.dissipation_series[k]) << ','
            << fmt(traj.dissipation_rate_series[k]) << ','
            << fmt(traj.f2_total_series[k]) << ',' << fmt(traj.f2_chi_minus_series[k])
            << ',' << fmt(traj.w2g_to_eq_series[k]) << "\n";
    }
}

KineticTrajectory read_diagnostics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    KineticTrajectory traj;
    std::string line;
    double phi_prev = 0.0, phi_lift = 0.0;
    bool started = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 't') continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() < 9) throw ConfigError("diagnostics.csv: short row");
        traj.times.push_back(row[0]);
        traj.R.push_back(row[1]);
        double phi = row[2];
        if (!started) {
            phi_lift = phi;
            started = true;
        } else {
            phi_lift += wrap_signed(phi - phi_prev);
        }
        phi_prev = phi;
        traj.phi_unwrapped.push_back(phi_lift);
        traj.dissipation_series.push_back(row[4]);
        traj.dissipation_rate_series.push_back(row[5]);
        traj.f2_total_series.push_back(row[6]);
        traj.f2_chi_minus_series.push_back(row[7]);
        traj.w2g_to_eq_series.push_back(row[8]);
    }
    if (traj.times.size() >= 2) traj.dt = traj.times[1] - traj.times[0];
    return traj;
}

namespace {
constexpr char SNAP_MAGIC[4] = {'K', 'S', 'N', 'P'};
constexpr std::uint32_t SNAP_VERSION = 1;
}  // namespace

void write_snapshot(const std::string& path, const KineticState& state, double K,
                    std::uint64_t config_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out.write(SNAP_MAGIC, 4);
    auto put = [&](const void* p, std::size_t n) {
        out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    };
    std::uint32_t version = SNAP_VERSION;
    put(&version, 4);
    put(&config_hash, 8);
    std::int32_t n_theta = state.n_theta;
    std::int32_t n_omega = static_cast<std::int32_t>(state.grid.size());
    put(&n_theta, 4);
    put(&n_omega, 4);
    double W = state.grid.max_abs_node();
    put(&W, 8);
    put(&K, 8);
    put(&state.time, 8);
    put(state.grid.nodes.data(), 8 * state.grid.size());
    put(state.grid.weights.data(), 8 * state.grid.size());
    put(&state.grid.spacing, 8);
    put(state.h.data(), 8 * state.h.size());
}

KineticState read_snapshot(const std::string& path, double* K_out,
                           std::uint64_t* hash_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, SNAP_MAGIC, 4) != 0)
        throw ConfigError(path + ": not a snapshot file");
    auto get = [&](void* p, std::size_t n) {
        in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in) throw ConfigError(path + ": truncated snapshot");
    };
    std::uint32_t version;
    get(&version, 4);
    if (version != SNAP_VERSION) throw ConfigError(path + ": unsupported version");
    std::uint64_t hash;
    get(&hash, 8);
    if (hash_out) *hash_out = hash;
    std::int32_t n_theta, n_omega;
    get(&n_theta, 4);
    get(&n_omega, 4);
    double W, K;
    get(&W, 8);
    get(&K, 8);
    if (K_out) *K_out = K;
    KineticState st;
    get(&st.time, 8);
    st.n_theta = n_theta;
    st.grid.nodes.resize(n_omega);
    st.grid.weights.resize(n_omega);
    get(st.grid.nodes.data(), 8 * n_omega);
    get(st.grid.weights.data(), 8 * n_omega);
    get(&st.grid.spacing, 8);
    st.h.resize(static_cast<std::size_t>(n_omega) * n_theta);
    get(st.h.data(), 8 * st.h.size());
    return st;
}

void write_run(const std::string& dir, const KineticTrajectory& traj,
               std::uint64_t config_hash, const std::string& config_text,
               double wallclock_s) {
    fs::create_directories(fs::path(dir) / "snapshots");
    write_diagnostics_csv((fs::path(dir) / "diagnostics.csv").string(), traj, config_hash);
    json inventory = json::array();
    inventory.push_back("diagnostics.csv");
    for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
        char name[48];
        std::snprintf(name, sizeof(name), "snapshots/snap_%06zu.bin", s);
        write_snapshot((fs::path(dir) / name).string(), traj.snapshots[s],
                       traj.params.K, config_hash);
        inventory.push_back(name);
    }
    json manifest;
    char hash_text[20];
    std::snprintf(hash_text, sizeof(hash_text), "%016llx",
                  static_cast<unsigned long long>(config_hash));
    manifest["config_hash"] = hash_text;
    manifest["tool_version"] = "1.0.0";
    manifest["wallclock_s"] = wallclock_s;
    manifest["files"] = inventory;
    manifest["params"] = {{"K", traj.params.K},
                          {"W", traj.params.W},
                          {"n_theta", traj.n_theta},
                          {"n_omega", traj.grid.size()},
                          {"dt", traj.dt},
                          {"snapshot_stride", traj.snapshot_stride}};
    std::ofstream mf(fs::path(dir) / "manifest.json");
    mf << manifest.dump(2) << "\n";
    std::ofstream cf(fs::path(dir) / "config.json");
    cf << config_text << "\n";
}

KineticTrajectory read_run(const std::string& dir) {
    std::ifstream mf(fs::path(dir) / "manifest.json");
    if (!mf) throw ConfigError("missing manifest.json in " + dir);
    json manifest = json::parse(mf);
    KineticTrajectory traj = read_diagnostics_csv((fs::path(dir) / "diagnostics.csv").string());
    traj.params.K = manifest["params"]["K"].get<double>();
    traj.params.W = manifest["params"]["W"].get<double>();
    traj.n_theta = manifest["params"]["n_theta"].get<int>();
    traj.snapshot_stride = manifest["params"]["snapshot_stride"].get<int>();
    for (const auto& f : manifest["files"]) {
        std::string name = f.get<std::string>();
        if (name.rfind("snapshots/", 0) != 0) continue;
        auto st = read_snapshot((fs::path(dir) / name).string());
        traj.snapshot_times.push_back(st.time);
        traj.snapshots.push_back(std::move(st));
    }
    if (!traj.snapshots.empty()) traj.grid = traj.snapshots.front().grid;
    return traj;
}

std::string reports_to_json(const std::vector<InequalityReport>& reports,
                            std::uint64_t config_hash, bool include_series) {
    json j;
    char hash_text[20];
    std::snprintf(hash_text, sizeof(hash_text), "%016llx",
                  static_cast<unsigned long long>(config_hash));
    j["config_hash"] = hash_text;
    json arr = json::array();
    int n_fail = 0, n_skip = 0;
    for (const auto& rep : reports) {
        json r;
        r["name"] = rep.name;
        r["pass"] = rep.pass();
        r["skipped"] = rep.skipped;
        if (rep.skipped) r["skip_reason"] = rep.skip_reason;
        r["tol"] = rep.tol;
        r["tol_note"] = rep.tol_note;
        r["floor"] = rep.floor;
        r["min_margin"] = rep.margins.empty() ? 0.0 : rep.min_margin();
        r["notes"] = rep.notes;
        if (include_series) {
            r["times"] = rep.times;
            r["margins"] = rep.margins;
        }
        if (!rep.pass()) ++n_fail;
        if (rep.skipped) ++n_skip;
        arr.push_back(r);
    }
    j["checks"] = arr;
    j["summary"] = {{"total", reports.size()}, {"failed", n_fail}, {"skipped", n_skip}};
    return j.dump(2);
}

std::string subdivision_to_json(const analysis::SubdivisionReport& sub,
                                std::uint64_t config_hash) {
    json j;
    char hash_text[20];
    std::snprintf(hash_text, sizeof(hash_text), "%016llx",
                  static_cast<unsigned long long>(config_hash));
    j["config_hash"] = hash_text;
    j["K"] = sub.K;
    j["R0"] = sub.R0;
    j["lambda"] = sub.lambda;
    j["q_threshold"] = sub.q_threshold;
    j["k_star"] = sub.k_star;
    j["k0"] = sub.k0;
    j["t0"] = std::isfinite(sub.t0) ? json(sub.t0) : json();
    j["r_times"] = sub.r_times;
    j["R_levels"] = sub.R_levels;
    j["g_count"] = sub.g_count;
    j["b_count"] = sub.b_count;
    j["mu_k"] = sub.mu_k;
    j["d_k"] = sub.d_k;
    j["delta_k"] = sub.delta_k;
    j["D_k"] = sub.D_k;
    j["F_entry"] = sub.F_entry;
    j["T0_candidate"] = sub.T0_candidate;
    j["hypo_subd_ok"] = sub.hypo_subd_ok;
    json ivs = json::array();
    for (const auto& iv : sub.intervals)
        ivs.push_back({{"t_begin", iv.t_begin},
                       {"t_end", iv.t_end},
                       {"t_tilde", iv.t_tilde},
                       {"level", iv.level},
                       {"type", iv.good ? "G" : "B"},
                       {"terminal", iv.terminal}});
    j["intervals"] = ivs;
    return j.dump(2);
}

void write_concentration_csv(const std::string& path, const mc::ConcentrationReport& rep,
                             std::uint64_t config_hash) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    char head[64];
    std::snprintf(head, sizeof(head), "# config_hash=%016llx version=1",
                  static_cast<unsigned long long>(config_hash));
    out << head << "\n";
    out << "N,eps,exceed_freq,trials\n";
    for (std::size_t ni = 0; ni < rep.Ns.size(); ++ni)
        for (std::size_t ei = 0; ei < rep.eps_grid.size(); ++ei)
            out << rep.Ns[ni] << ',' << fmt(rep.eps_grid[ei]) << ','
                << fmt(rep.exceed_freq[ni][ei]) << ',' << rep.trials << "\n";
}

void write_mass_diameter_csv(const std::string& path, const mc::MassDiameterReport& rep,
                             std::uint64_t config_hash) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    char head[64];
    std::snprintf(head, sizeof(head), "# config_hash=%016llx version=1",
                  static_cast<unsigned long long>(config_hash));
    out << head << "\n";
    out << "trial,s,t,mass,diam,passM,passD\n";
    for (const auto& row : rep.rows)
        out << row.trial << ',' << fmt(row.s) << ',' << fmt(row.t) << ','
            << fmt(row.mass) << ',' << fmt(row.diam) << ',' << (row.pass_mass ? 1 : 0)
            << ',' << (row.pass_diam ? 1 : 0) << "\n";
}

void read_series_csv(const std::string& path, std::vector<double>& t,
                     std::vector<double>& R) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::string line;
    t.clear();
    R.clear();
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) continue;
        try {
            double tv = std::stod(a);
            double rv = std::stod(b);
            t.push_back(tv);
            R.push_back(rv);
        } catch (...) {
            continue;  // header row
        }
    }
    if (t.size() < 3) throw ConfigError(path + ": needs at least 3 samples");
}

}  // namespace kuramoto::io
