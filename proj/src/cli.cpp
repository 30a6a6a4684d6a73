#include "conewave/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "conewave/io.hpp"
#include "conewave/seeds.hpp"
#include "conewave/stats.hpp"
#include "conewave/wave.hpp"

namespace conewave {

namespace {

std::vector<double> make_grid(double lo, double hi, double step) {
    std::vector<double> g;
    long long n = std::llround((hi - lo) / step);
    for (long long i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
    return g;
}

const char* flag_name(ScanFlag f) {
    switch (f) {
        case ScanFlag::Outside: return "outside";
        case ScanFlag::Regular: return "regular";
        case ScanFlag::Suspect: return "suspect";
    }
    return "?";
}

}  // namespace

int run_validate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    DegreeMatrix d;
    try {
        d = load_degree_matrix(cfg.degree_matrix_path);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    ValidationReport rep = validate(d);
    json j;
    j["valid"] = rep.valid;
    j["failures"] = json::array();
    for (const auto& f : rep.failures)
        j["failures"].push_back({{"condition", f.condition}, {"detail", f.detail}});
    if (rep.valid) {
        auto q = type_fractions(d);
        json qs = json::array();
        for (const auto& r : q.q)
            qs.push_back({{"num", r.numerator()}, {"den", r.denominator()}});
        j["type_fractions"] = qs;
    }
    out << j.dump(2) << "\n";
    return rep.valid ? kExitOk : kExitInvalidInput;
}

int run_density(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    DegreeMatrix d;
    try {
        d = load_degree_matrix(cfg.degree_matrix_path);
        if (!validate(d).valid) throw std::invalid_argument("invalid degree matrix");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    try {
        auto grid = make_grid(cfg.grid_min, cfg.grid_max, cfg.grid_step);
        SpectralScan scan = spectral_scan(d, grid);
        out << std::setprecision(17);
        out << "lambda,re_m,im_m,rho,flag\n";
        for (const auto& p : scan.points)
            out << p.lambda << "," << p.m.real() << "," << p.m.imag() << "," << p.rho << ","
                << flag_name(p.flag) << "\n";
        err << "# integral_rho " << scan.integral_rho << ", suspects:";
        for (double s : scan.suspects) err << " " << s;
        err << "\n";
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumericalFailure;
    }
    return kExitOk;
}

int run_compare(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    DegreeMatrix d;
    try {
        d = load_degree_matrix(cfg.degree_matrix_path);
        if (!validate(d).valid) throw std::invalid_argument("invalid degree matrix");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    try {
        TypeFractions q = type_fractions(d);
        json j;
        j["lambda"] = cfg.lambda;
        j["eps"] = cfg.eps;
        j["k"] = cfg.k;
        j["N"] = cfg.N;
        j["seed"] = cfg.seed;
        j["mode"] = cfg.mode;

        // Warn when the window brushes a quotient (block-constant) eigenvalue.
        QuotientSpectrum qs = quotient_spectrum(d);
        for (int i = 0; i < qs.eigenvalues.size(); ++i)
            if (std::abs(qs.eigenvalues(i) - cfg.lambda) <= cfg.eps)
                j["warnings"].push_back("window touches quotient eigenvalue " +
                                        std::to_string(qs.eigenvalues(i)));

        ContinuationResult cont = continue_to_real_axis(d, cfg.lambda);
        if (!cont.converged || cont.blowup)
            throw std::runtime_error("lambda flagged as a D_d suspect");

        TypedGraph g = sample_graph(d, cfg.N, derive_seed(cfg.seed, "graph"));
        SpectralData sd = eigendecompose(g);
        std::mt19937_64 rng_f = make_rng(cfg.seed, "eigvec");
        Eigen::VectorXd f;
        if (cfg.mode == "noisy") {
            Eigen::VectorXd v;
            const Eigen::VectorXd* vp = nullptr;
            if (cfg.delta > 0) {
                std::mt19937_64 rng_v = make_rng(cfg.seed, "perturb");
                std::normal_distribution<double> gauss(0.0, 1.0);
                v.resize(g.N);
                for (long long x = 0; x < g.N; ++x) v(x) = gauss(rng_v);
                v *= cfg.delta / v.norm();
                vp = &v;
            }
            f = noisy_almost_eigenvector(sd, cfg.lambda, cfg.eps, rng_f, vp);
        } else {
            f = window_eigenvector(sd, cfg.lambda, cfg.eps, rng_f);
        }
        j["window_count"] =
            static_cast<long long>(spectral_window(sd, cfg.lambda, cfg.eps).size());

        EmpiricalProcess proc =
            local_statistics(g, f, d, cfg.k, cfg.roots, derive_seed(cfg.seed, "roots"));
        j["skip_rate"] = proc.skip_rate();

        std::vector<WaveModel> wave;
        for (int t = 0; t < d.k; ++t)
            wave.push_back(
                wave_covariance(d, cfg.lambda, build_ball(d, BallShape::vertex_ball(t, cfg.k)),
                                &cont));
        j["var_im_m"] = wave[0].var_im_m;

        // Per-type distance-1 covariance ratios against both predictions.
        json ratios = json::array();
        for (int t = 0; t < d.k; ++t) {
            if (proc.by_type[t].empty() || cfg.k < 1) continue;
            const TreeBall& ball = wave[t].ball;
            double num = 0.0, den = 0.0;
            long long cnt = 0;
            for (const auto& x : proc.by_type[t]) {
                den += x(0) * x(0);
                for (int v = 0; v < ball.size(); ++v)
                    if (ball.depth[v] == 1) {
                        num += x(0) * x(v);
                        ++cnt;
                    }
            }
            double empirical = (num / static_cast<double>(cnt)) /
                               (den / static_cast<double>(proc.by_type[t].size()));
            double greens = 0.0;
            int nb = 0;
            for (int v = 0; v < ball.size(); ++v)
                if (ball.depth[v] == 1) {
                    greens += wave[t].sigma_raw(0, v) / wave[t].sigma_raw(0, 0);
                    ++nb;
                }
            greens /= nb;
            json r{{"type", t}, {"empirical", empirical}, {"greens", greens}};
            if (d.k == 2 && d(0, 0) == 0 && d(1, 1) == 0) {
                long long d1 = d.row_sum(t), d2 = d.row_sum(1 - t);
                r["transfer"] = biregular_transfer_ratio(d1, d2, cfg.lambda, 1);
            }
            j["covariance_ratios"] = ratios;  // placeholder ordering
            ratios.push_back(r);
        }
        j["covariance_ratios"] = ratios;

        std::mt19937_64 rng_w = make_rng(cfg.seed, "wave");
        XiOptions xopts;
        xopts.n_wave = cfg.n_wave;
        DistanceReport rep = xi_k(proc.by_type, wave, q, rng_w, xopts);
        j["xi"] = rep.xi;
        j["sigma_argmin"] = rep.sigma_argmin;
        j["d_lp_bracket"] = {rep.d_lp_lower, rep.d_lp_upper};
        j["n_wave_used"] = rep.n_wave_used;

        // Matched-size self-distance calibration: wave against wave with the
        // process's per-type sample counts.
        {
            std::vector<std::vector<Eigen::VectorXd>> surrogate(d.k);
            double scale = 1.0 / std::sqrt(wave[0].var_im_m);
            std::mt19937_64 rng_c = make_rng(cfg.seed, "calibration");
            for (int t = 0; t < d.k; ++t) {
                Eigen::MatrixXd S = sample_wave_factor(
                    wave[t], rng_c, static_cast<long long>(proc.by_type[t].size()));
                for (long long r = 0; r < S.rows(); ++r)
                    surrogate[t].push_back(scale * S.row(r).transpose());
            }
            DistanceReport cal = xi_k(surrogate, wave, q, rng_c, xopts);
            j["calibration_xi"] = cal.xi;
            j["calibration_sigma"] = cal.sigma_argmin;
        }

        out << j.dump(2) << "\n";
    } catch (const EmptyWindow& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumericalFailure;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumericalFailure;
    }
    return kExitOk;
}

int run_entropy(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    DegreeMatrix d;
    try {
        d = load_degree_matrix(cfg.degree_matrix_path);
        if (!validate(d).valid) throw std::invalid_argument("invalid degree matrix");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    try {
        ContinuationResult cont = continue_to_real_axis(d, cfg.lambda);
        if (!cont.converged || cont.blowup)
            throw std::runtime_error("lambda flagged as a D_d suspect");
        out << std::setprecision(17);
        out << "eta,k,delta_eta,delta_direct\n";
        for (double eta = cfg.eta_start; eta >= cfg.eta_min * (1.0 - 1e-12); eta *= 0.25) {
            for (int k = 0; k <= cfg.k_max; ++k) {
                GaussianDeltaReport rep = gaussian_delta_k(d, cfg.lambda, eta, k, &cont);
                out << eta << "," << k << "," << rep.delta_eta << "," << rep.delta_direct
                    << "\n";
            }
        }
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumericalFailure;
    }
    return kExitOk;
}

int dispatch_with_output(const ExperimentConfig& cfg,
                         int (*runner)(const ExperimentConfig&, std::ostream&, std::ostream&),
                         std::ostream& console_out, std::ostream& console_err) {
    if (cfg.out_path.empty()) return runner(cfg, console_out, console_err);
    std::ofstream f(cfg.out_path);
    if (!f) {
        console_err << "error: cannot open output file " << cfg.out_path << "\n";
        return kExitInvalidInput;
    }
    return runner(cfg, f, console_err);
}

}  // namespace conewave
