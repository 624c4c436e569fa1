#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kuramoto/analysis.hpp"
#include "kuramoto/kinetic.hpp"

namespace kuramoto::cfg {

struct InitialSpec {
    std::string family = "vonmises_bump";  // vonmises_bump | two_bump | uniform | from_file
    double center = 1.0;
    double concentration = 2.0;
    std::vector<double> centers;  // two_bump
    std::vector<double> weights;
    std::vector<double> widths;   // angular widths; kappa = 1/width^2
    std::string path;             // from_file: snapshot to load
};

struct ExperimentConfig {
    ModelParams model{10.0, 0.1};
    InitialSpec initial;

    int n_theta = 256;
    int n_omega = 17;
    double dt = 0.0;  // 0 = choose from the CFL bound
    double t_end = 3.0;
    int snapshot_stride = 10;

    int particle_N = 500;
    std::uint64_t seed = 42;
    int trials = 20;

    std::vector<std::string> checks;  // empty = all
    analysis::AnalysisConstants constants;
    double alpha = analysis::ALPHA_DEFAULT;
    double beta = analysis::BETA_DEFAULT;
    double delta0 = 0.5;
    std::optional<double> lambda;  // default 1 - R0/240
    double q_threshold = analysis::Q_THRESHOLD_DEFAULT;

    std::vector<int> conc_Ns{50, 200, 800};
    int conc_trials = 50;
    std::vector<double> eps_grid;
    double window = 1.0;
    int quant_n_theta = 64;
    int quant_n_omega = 9;

    std::string out_dir = "out";

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
    std::uint64_t hash() const;

    double effective_dt() const;
    KineticState build_initial_state() const;
    FrequencyGrid build_grid() const;
    void validate() const;
};

int thread_count_from_env();  // KURAMOTO_THREADS, default 1

}  // namespace kuramoto::cfg
