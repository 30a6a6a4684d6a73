#include <iostream>

#include <CLI11.hpp>

#include "conewave/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Green's functions, configuration-model eigenvectors and Gaussian-wave "
                 "statistics on trees of finite cone type"};
    app.require_subcommand(1);

    conewave::ExperimentConfig cfg;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--degree-matrix", cfg.degree_matrix_path,
                        "JSON file with fields k and d (row-major k*k array)")
            ->required();
        sub->add_option("--out", cfg.out_path, "output file (default stdout)");
        sub->add_option("--format", cfg.format, "csv or json");
        sub->add_option("--seed", cfg.seed, "64-bit master seed");
    };

    CLI::App* validate = app.add_subcommand("validate", "check the degree-matrix conditions");
    add_common(validate);

    CLI::App* density = app.add_subcommand("density", "spectral density scan (CSV)");
    add_common(density);
    density->add_option("--grid-min", cfg.grid_min, "scan start");
    density->add_option("--grid-max", cfg.grid_max, "scan end");
    density->add_option("--grid-step", cfg.grid_step, "scan step");

    CLI::App* compare = app.add_subcommand(
        "compare", "sample graph -> eigenvector -> local statistics -> Xi_k report (JSON)");
    add_common(compare);
    compare->add_option("--lambda", cfg.lambda, "window center");
    compare->add_option("--eps", cfg.eps, "window half width");
    compare->add_option("--k", cfg.k, "ball radius for local statistics");
    compare->add_option("--n", cfg.N, "graph size N");
    compare->add_option("--roots", cfg.roots, "number of root samples");
    compare->add_option("--n-wave", cfg.n_wave, "wave sample count for the comparison");
    compare->add_option("--mode", cfg.mode, "window or noisy");
    compare->add_option("--delta", cfg.delta, "perturbation norm for noisy mode");

    CLI::App* entropy = app.add_subcommand("entropy", "gaussian delta_k sweep over eta (CSV)");
    add_common(entropy);
    entropy->add_option("--lambda", cfg.lambda, "energy");
    entropy->add_option("--eta", cfg.eta_start, "sweep start");
    entropy->add_option("--eta-min", cfg.eta_min, "sweep end");
    entropy->add_option("--k", cfg.k_max, "maximum level k");

    CLI11_PARSE(app, argc, argv);

    using Runner = int (*)(const conewave::ExperimentConfig&, std::ostream&, std::ostream&);
    Runner runner = nullptr;
    if (validate->parsed()) runner = conewave::run_validate;
    if (density->parsed()) runner = conewave::run_density;
    if (compare->parsed()) runner = conewave::run_compare;
    if (entropy->parsed()) runner = conewave::run_entropy;
    return conewave::dispatch_with_output(cfg, runner, std::cout, std::cerr);
}
