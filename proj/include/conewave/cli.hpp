#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace conewave {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidInput = 2;
inline constexpr int kExitNumericalFailure = 3;

struct ExperimentConfig {
    std::string degree_matrix_path;
    double lambda = 1.0;
    double eps = 0.05;
    double eta = 1e-3;
    double delta = 0.0;  // noisy-mode perturbation norm bound
    int k = 1;
    long long N = 2000;
    long long roots = 500;
    long long n = 100000;       // wave sample size for sampled reports
    long long n_wave = 4000;    // xi comparison sample size
    std::uint64_t seed = 1;
    std::string out_path;       // empty = stdout
    std::string format = "csv"; // csv | json
    std::string mode = "window";  // window | noisy
    // density grid
    double grid_min = -3.0;
    double grid_max = 3.0;
    double grid_step = 0.01;
    // entropy sweep
    double eta_start = 1.0;
    double eta_min = 1e-6;
    int k_max = 2;
};

int run_validate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int run_density(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int run_compare(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int run_entropy(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

// Applies out_path: writes to the file when set, otherwise to standard output.
int dispatch_with_output(const ExperimentConfig& cfg,
                         int (*runner)(const ExperimentConfig&, std::ostream&, std::ostream&),
                         std::ostream& console_out, std::ostream& console_err);

}  // namespace conewave
