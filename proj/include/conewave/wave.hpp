#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "conewave/cover.hpp"
#include "conewave/degmat.hpp"
#include "conewave/greens.hpp"

namespace conewave {

// Second-order data of the Gaussian wave on a ball: covariance
// Sigma = lim_{eta->0} Im G restricted to the ball, with the eigenvector
// constraints projected out exactly and a rank-|boundary| spectral square
// root for sampling.
struct WaveModel {
    TreeBall ball;
    double lambda = 0.0;
    Eigen::MatrixXd sigma;       // cleaned covariance
    Eigen::MatrixXd sigma_raw;   // straight lim Im G before projection
    double var_im_m = 0.0;       // Var[Psi] = Im m(lambda)
    Eigen::MatrixXd factor;      // dim x rank, factor * factor^T = sigma
    int rank = 0;
    double factor_error = 0.0;   // ||factor factor^T - sigma||_max
};

WaveModel wave_covariance(const DegreeMatrix& d, double lambda, const TreeBall& ball,
                          const ContinuationResult* precomputed = nullptr);

// n independent factor samples, rows = samples.
Eigen::MatrixXd sample_wave_factor(const WaveModel& wm, std::mt19937_64& rng, long long n);

struct PushforwardOptions {
    double tail_tol = 1e-3;   // allowed relative Ward tail in truncation mode
    int max_radius = 24;      // truncation-mode radius cap
    bool closure = true;      // sum the far field exactly per cone
    bool zero_noise = false;  // degenerate stream: all xi = 0
};

struct PushforwardResult {
    Eigen::MatrixXd samples;      // rows = samples, columns = ball coordinates
    int radius = 0;               // ambient radius of explicit noise
    double tail_rel = 0.0;        // relative Ward mass beyond the ambient ball
    bool closure_used = false;
    double ward_residual = 0.0;   // |eta * total mass - Im G_uu| / Im G_uu, max over ball
    Eigen::MatrixXd target;       // Im G^{lambda+i eta} on the ball (the exact covariance)
};

// Samples of the resolvent-filtered noise field
//   X = sqrt(2 eta) Re( sum_x xi_x G(lambda + i eta)_x ),  xi_x iid CN(0,1),
// restricted to the ball.  Noise is explicit on an ambient ball of radius R;
// beyond it the per-cone aggregate is itself Gaussian with variance given by
// the Ward mass recursion, so closure mode is exact for any eta.  Truncation
// mode drops the far field and requires the Ward tail below tail_tol,
// growing R up to max_radius before giving up.
PushforwardResult sample_wave_pushforward(const DegreeMatrix& d, double lambda, double eta,
                                          const TreeBall& ball, std::mt19937_64& rng,
                                          long long n, const PushforwardOptions& opts = {});

}  // namespace conewave
