#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "conewave/cover.hpp"
#include "conewave/degmat.hpp"

namespace conewave {

using Complex = std::complex<double>;

// Solution of the cone fixed point at spectral parameter z:
//   g(i,j) = ( -z - sum_l c_ijl g(j,l) )^{-1},   c_ijl = d(j,l) - [l==i],
// where g(i,j) is the Green's function at a type-j vertex whose type-i
// neighbor has been removed.  root_diag[t] = G_oo for a type-t root.
struct ConeGreens {
    Complex z{0.0, 0.0};
    int k = 0;
    std::vector<Complex> g;          // k*k, row-major (parent, vertex); valid iff d>0
    std::vector<Complex> root_diag;  // per type
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    bool extrapolated = false;  // true for eta->0 limits

    Complex gval(int parent_type, int vertex_type) const {
        return g[static_cast<size_t>(parent_type) * k + vertex_type];
    }
};

struct SolveOptions {
    double tol = 1e-13;
    double damping = 0.5;
    int max_damped = 4000;
    int max_newton = 60;
};

// Damped iteration with Newton refinement; warm start optional.
ConeGreens solve_fixed_point(const DegreeMatrix& d, Complex z, const SolveOptions& opts = {},
                             const ConeGreens* warm = nullptr);

struct ContinuationOptions {
    double eta_start = 1.0;
    double eta_min = 1e-7;
    double ratio = 0.5;
    double blowup_threshold = 1e4;
    SolveOptions solve;
};

struct ContinuationResult {
    ConeGreens limit;             // extrapolated to eta -> 0, z = lambda
    ConeGreens last;              // solution at the smallest converged eta
    std::vector<double> etas;     // schedule that converged
    bool converged = false;       // whole schedule converged
    bool blowup = false;          // |g| exceeded the threshold
    double min_im_g = 0.0;        // at the final eta
    double max_abs_g = 0.0;
};

// Geometric eta schedule with warm starts; limit estimated by quadratic
// extrapolation through the last three eta values.
ContinuationResult continue_to_real_axis(const DegreeMatrix& d, double lambda,
                                         const ContinuationOptions& opts = {});

// Green's matrix restricted to a ball.  Diagonal entries come from each
// vertex's cone decomposition, off-diagonal entries from the path product
//   G_xy = G_xx * prod_m ( -g(type(x_{m-1}), type(x_m)) ).
struct BallGreens {
    Complex z{0.0, 0.0};
    Eigen::MatrixXcd G;
    Eigen::MatrixXd imG;
    double symmetry_error = 0.0;
};

BallGreens ball_greens(const DegreeMatrix& d, const ConeGreens& cg, const TreeBall& ball);

// m(z) = sum_i q_i G_oo^{(type i)}.
Complex stieltjes_value(const DegreeMatrix& d, const ConeGreens& cg);

enum class ScanFlag { Outside, Regular, Suspect };

struct ScanPoint {
    double lambda = 0.0;
    Complex m{0.0, 0.0};
    double rho = 0.0;  // Im m / pi
    ScanFlag flag = ScanFlag::Outside;
    double max_abs_g = 0.0;
    double min_im_g = 0.0;
    bool converged = false;
};

struct ScanThresholds {
    double density_floor = 1e-6;   // Im m below this counts as outside the spectrum
    double blowup = 1e4;           // |g| above this flags a suspect
    double im_collapse = 1e-12;    // Im g below this while Im m is positive flags a suspect
};

struct SpectralScan {
    std::vector<ScanPoint> points;
    std::vector<double> suspects;
    double integral_rho = 0.0;  // trapezoid over the grid
};

SpectralScan spectral_scan(const DegreeMatrix& d, const std::vector<double>& grid,
                           const ScanThresholds& thresholds = {},
                           const ContinuationOptions& copts = {});

// Residuals of the exact Green's-function identities, evaluated two ways:
// on a dense resolvent of a finite truncated tree (exact linear algebra,
// residuals at rounding level) and on cone-derived infinite-tree values
// (compared against a deep finite truncation).
struct IdentitySuiteReport {
    // finite dense resolvent
    double dense_schur = 0.0;
    double dense_walk = 0.0;
    double dense_factor = 0.0;
    double dense_ward = 0.0;
    double dense_reexpansion = 0.0;
    // cone-derived values
    double cone_walk = 0.0;
    double cone_factor = 0.0;
    double cone_ward = 0.0;
    double cone_reexpansion = 0.0;
    double cone_vs_dense_ball = 0.0;  // ball entries vs depth-`deep_depth` truncation
    double max_dense() const;
};

struct IdentitySuiteOptions {
    int dense_vertex_budget = 600;
    int deep_depth = 24;
    int ball_radius = 2;
};

IdentitySuiteReport identity_suite(const DegreeMatrix& d, Complex z,
                                   const IdentitySuiteOptions& opts = {});

// Product of |g| along a type path a_0 -> a_1 -> ... -> a_t with a_t == a_0.
// Requires lambda in the spectrum away from suspects and at least one vertex
// of degree >= 3 on the path; throws std::invalid_argument otherwise.
struct PathProduct {
    double product = 0.0;
    double margin = 0.0;  // 1 - product
};

PathProduct path_coefficient_check(const DegreeMatrix& d, const ContinuationResult& cont,
                                   const std::vector<int>& type_path);

// Predicted E[psi_o psi_i]/E[psi_o^2] at distance `dist` on the (d1,d2)
// biregular tree, from the sphere-sum transfer recurrence divided by the
// sphere size.  The root has degree d1.
double biregular_transfer_ratio(long long d1, long long d2, double lambda, int dist);

// Ward masses per cone: sigma2(i,j) = sum over vertices x of an (i,j) cone of
// |path product of (-g) from the cone root to x|^2, the closed form of the
// Ward tail.  Solves the linear system sigma2 = 1 + B sigma2; returns a k*k
// row-major vector (zero on absent edges).  Finite only for Im z > 0.
std::vector<double> cone_ward_masses(const DegreeMatrix& d, const ConeGreens& cg);

}  // namespace conewave
