#include "kuramoto/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace kuramoto::cfg {

using nlohmann::json;

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config field " + where + "." + key + ": " + e.what());
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig c;
    if (j.contains("model")) {
        get_if(j["model"], "K", c.model.K, "model");
        get_if(j["model"], "W", c.model.W, "model");
    }
    if (j.contains("initial")) {
        const auto& ji = j["initial"];
        get_if(ji, "family", c.initial.family, "initial");
        get_if(ji, "center", c.initial.center, "initial");
        get_if(ji, "concentration", c.initial.concentration, "initial");
        get_if(ji, "centers", c.initial.centers, "initial");
        get_if(ji, "weights", c.initial.weights, "initial");
        get_if(ji, "widths", c.initial.widths, "initial");
        get_if(ji, "path", c.initial.path, "initial");
    }
    if (j.contains("grids")) {
        const auto& jg = j["grids"];
        get_if(jg, "n_theta", c.n_theta, "grids");
        get_if(jg, "n_omega", c.n_omega, "grids");
        get_if(jg, "dt", c.dt, "grids");
        get_if(jg, "t_end", c.t_end, "grids");
        get_if(jg, "snapshot_stride", c.snapshot_stride, "grids");
    }
    if (j.contains("particle")) {
        const auto& jp = j["particle"];
        get_if(jp, "N", c.particle_N, "particle");
        get_if(jp, "seed", c.seed, "particle");
        get_if(jp, "trials", c.trials, "particle");
    }
    if (j.contains("analysis")) {
        const auto& ja = j["analysis"];
        get_if(ja, "checks", c.checks, "analysis");
        get_if(ja, "tol_scale", c.constants.tol_scale, "analysis");
        get_if(ja, "alpha", c.alpha, "analysis");
        get_if(ja, "beta", c.beta, "analysis");
        get_if(ja, "delta0", c.delta0, "analysis");
        get_if(ja, "q_threshold", c.q_threshold, "analysis");
        if (ja.contains("lambda") && !ja["lambda"].is_null())
            c.lambda = ja["lambda"].get<double>();
        if (ja.contains("constants")) {
            const auto& jc = ja["constants"];
            get_if(jc, "c_dis", c.constants.c_dis, "analysis.constants");
            get_if(jc, "c_disr", c.constants.c_disr, "analysis.constants");
            get_if(jc, "c_phidot", c.constants.c_phidot, "analysis.constants");
            get_if(jc, "c_lateral", c.constants.c_lateral, "analysis.constants");
            get_if(jc, "c_inst", c.constants.c_inst, "analysis.constants");
            get_if(jc, "c_wtransport", c.constants.c_wtransport, "analysis.constants");
            get_if(jc, "gain_cali_c", c.constants.gain_cali_c, "analysis.constants");
            get_if(jc, "gain_vs_loss_cali_c", c.constants.gain_vs_loss_cali_c,
                   "analysis.constants");
            get_if(jc, "decrease_cali_c", c.constants.decrease_cali_c,
                   "analysis.constants");
            get_if(jc, "t0_mult", c.constants.t0_mult, "analysis.constants");
            get_if(jc, "glen_mult", c.constants.glen_mult, "analysis.constants");
            get_if(jc, "l2_transient_q", c.constants.l2_transient_q,
                   "analysis.constants");
            get_if(jc, "t0_select_qprime", c.constants.t0_select_qprime,
                   "analysis.constants");
            get_if(jc, "convexity_t0_mult", c.constants.convexity_t0_mult,
                   "analysis.constants");
        }
    }
    if (j.contains("concentration")) {
        const auto& jc = j["concentration"];
        get_if(jc, "Ns", c.conc_Ns, "concentration");
        get_if(jc, "trials", c.conc_trials, "concentration");
        get_if(jc, "eps_grid", c.eps_grid, "concentration");
        get_if(jc, "window", c.window, "concentration");
        get_if(jc, "quant_n_theta", c.quant_n_theta, "concentration");
        get_if(jc, "quant_n_omega", c.quant_n_omega, "concentration");
    }
    if (j.contains("output")) get_if(j["output"], "dir", c.out_dir, "output");
    c.validate();
    return c;
}

std::string ExperimentConfig::to_json_text() const {
    json j;
    j["model"] = {{"K", model.K}, {"W", model.W}};
    json ji = {{"family", initial.family},
               {"center", initial.center},
               {"concentration", initial.concentration}};
    if (!initial.centers.empty()) ji["centers"] = initial.centers;
    if (!initial.weights.empty()) ji["weights"] = initial.weights;
    if (!initial.widths.empty()) ji["widths"] = initial.widths;
    if (!initial.path.empty()) ji["path"] = initial.path;
    j["initial"] = ji;
    j["grids"] = {{"n_theta", n_theta},
                  {"n_omega", n_omega},
                  {"dt", dt},
                  {"t_end", t_end},
                  {"snapshot_stride", snapshot_stride}};
    j["particle"] = {{"N", particle_N}, {"seed", seed}, {"trials", trials}};
    json ja = {{"tol_scale", constants.tol_scale},
               {"alpha", alpha},
               {"beta", beta},
               {"delta0", delta0},
               {"q_threshold", q_threshold}};
    if (lambda) ja["lambda"] = *lambda;
    if (!checks.empty()) ja["checks"] = checks;
    ja["constants"] = {{"c_dis", constants.c_dis},
                       {"c_disr", constants.c_disr},
                       {"c_phidot", constants.c_phidot},
                       {"c_lateral", constants.c_lateral},
                       {"c_inst", constants.c_inst},
                       {"c_wtransport", constants.c_wtransport},
                       {"gain_cali_c", constants.gain_cali_c},
                       {"gain_vs_loss_cali_c", constants.gain_vs_loss_cali_c},
                       {"decrease_cali_c", constants.decrease_cali_c},
                       {"t0_mult", constants.t0_mult},
                       {"glen_mult", constants.glen_mult},
                       {"l2_transient_q", constants.l2_transient_q},
                       {"t0_select_qprime", constants.t0_select_qprime},
                       {"convexity_t0_mult", constants.convexity_t0_mult}};
    j["analysis"] = ja;
    j["concentration"] = {{"Ns", conc_Ns},
                          {"trials", conc_trials},
                          {"eps_grid", eps_grid},
                          {"window", window},
                          {"quant_n_theta", quant_n_theta},
                          {"quant_n_omega", quant_n_omega}};
    j["output"] = {{"dir", out_dir}};
    return j.dump(2);
}

std::uint64_t ExperimentConfig::hash() const {
    // FNV-1a over the canonical serialization; the output directory is not
    // part of the scientific configuration, so reruns into different
    // directories hash identically.
    ExperimentConfig canon = *this;
    canon.out_dir = "";
    std::string text = canon.to_json_text();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

double ExperimentConfig::effective_dt() const {
    if (dt > 0.0) return dt;
    double dtheta = TWO_PI / n_theta;
    return 0.4 * dtheta / (model.W + model.K);
}

FrequencyGrid ExperimentConfig::build_grid() const {
    return uniform_frequency_grid(model.W, n_omega);
}

KineticState ExperimentConfig::build_initial_state() const {
    FrequencyGrid g = build_grid();
    if (initial.family == "uniform") return make_uniform_state(g, n_theta);
    if (initial.family == "vonmises_bump")
        return make_vonmises_state(g, n_theta, initial.center, initial.concentration);
    if (initial.family == "two_bump") {
        if (initial.centers.size() != 2 || initial.weights.size() != 2 ||
            initial.widths.size() != 2)
            throw ConfigError("initial.two_bump needs centers/weights/widths of size 2");
        auto kappa = [](double w) { return 1.0 / (w * w); };
        return make_two_bump_state(g, n_theta, initial.centers[0], initial.centers[1],
                                   initial.weights[0], initial.weights[1],
                                   kappa(initial.widths[0]), kappa(initial.widths[1]));
    }
    throw ConfigError("initial.family: unknown family '" + initial.family +
                      "' (from_file is handled by the caller)");
}

void ExperimentConfig::validate() const {
    model.validate();
    if (n_theta < 4) throw ConfigError("grids.n_theta: must be >= 4");
    if (n_omega < 1) throw ConfigError("grids.n_omega: must be >= 1");
    if (t_end < 0.0) throw ConfigError("grids.t_end: must be >= 0");
    if (dt < 0.0) throw ConfigError("grids.dt: must be >= 0 (0 selects the CFL step)");
    if (snapshot_stride < 1) throw ConfigError("grids.snapshot_stride: must be >= 1");
    if (particle_N < 1) throw ConfigError("particle.N: must be >= 1");
    if (trials < 0 || conc_trials < 0) throw ConfigError("trials: must be >= 0");
    if (!(alpha > 0.0 && alpha < PI / 2)) throw ConfigError("analysis.alpha: in (0, pi/2)");
    if (!(delta0 > 0.0)) throw ConfigError("analysis.delta0: must be > 0");
}

int thread_count_from_env() {
    const char* env = std::getenv("KURAMOTO_THREADS");
    if (!env) return 1;
    int n = std::atoi(env);
    return n >= 1 ? n : 1;
}

}  // namespace kuramoto::cfg
