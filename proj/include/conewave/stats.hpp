#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conewave/cover.hpp"
#include "conewave/degmat.hpp"
#include "conewave/wave.hpp"

namespace conewave {

// Orthonormal basis of the orthogonal complement of the constraint span
// { lambda delta_u - sum_{v ~ u} delta_v : u interior }.  Its dimension is
// |boundary| whenever the constraints are independent, which the tree
// structure guarantees.
struct ProjectionBasis {
    Eigen::MatrixXd chi;      // |ball| x |boundary|, orthonormal columns
    double orth_error = 0.0;
    double constraint_error = 0.0;  // max |chi^T c| over constraint vectors
};

ProjectionBasis pi_basis(const TreeBall& ball, double lambda);

// Finite atomic measure; atoms with different tags live in disjoint
// components of the metric space (non-isomorphic ball shapes).
struct EmpiricalMeasure {
    struct Atom {
        int tag = 0;
        Eigen::VectorXd x;
        long long mass = 1;
    };
    std::vector<Atom> atoms;
    long long total = 0;

    static EmpiricalMeasure from_samples(const std::vector<Eigen::VectorXd>& xs, int tag = 0,
                                         long long mass_per_atom = 1);
    void append(const std::vector<Eigen::VectorXd>& xs, int tag, long long mass_per_atom);
};

struct LPResult {
    double lower = 0.0;
    double upper = 0.0;
    bool exact = false;  // breakpoint scan (exact) vs bracketing search
    double value() const { return upper; }
};

// Levy-Prokhorov distance between atomic measures.  For each epsilon the
// worst Borel set is a union of atoms and max_A [P(A) - Q(A^eps)] is a
// min-cut on the bipartite graph with edges where the distance is < eps
// (strict, matching the open blow-up).  Small instances are solved exactly
// by a scan over distance breakpoints; large ones by a bracketing search.
// The symmetric version (max over both orientations) is returned; for
// probability measures the two orientations agree.
LPResult levy_prokhorov(const EmpiricalMeasure& P, const EmpiricalMeasure& Q,
                        double bracket_tol = 1e-9);

// Max over atom subsets of P(A) - Q(A^eps), flow-computed; exposed for the
// brute-force cross-check.
double lp_worst_deficiency(const EmpiricalMeasure& P, const EmpiricalMeasure& Q, double eps);

struct XiOptions {
    int sigma_grid = 9;
    double sigma_tol = 1e-3;   // golden-section width in sigma
    long long n_wave = 4000;   // rounded up to an exact q-multiple
};

struct DistanceReport {
    double xi = 0.0;
    double sigma_argmin = 0.0;
    double d_lp_lower = 0.0;
    double d_lp_upper = 0.0;
    std::vector<std::pair<double, double>> sigma_curve;  // (sigma, d_LP)
    long long n_wave_used = 0;
};

// Xi_k: infimum over sigma in [0, Var(Psi)^{-1/2}] of d_LP between the
// process and sigma-scaled wave samples; wave samples are drawn once and
// rescaled.  Process samples are stratified by root type with exact q
// weights; wave sample counts are exactly proportional to q.
DistanceReport xi_k(const std::vector<std::vector<Eigen::VectorXd>>& process_by_type,
                    const std::vector<WaveModel>& wave_by_type, const TypeFractions& q,
                    std::mt19937_64& rng, const XiOptions& opts = {});

struct DiscEntropy {
    double plugin = 0.0;
    double miller_madow = 0.0;
    double se = 0.0;  // asymptotic multinomial standard error of the plug-in
    long long occupied_cells = 0;
    double avg_per_cell = 0.0;
    bool low_sample_warning = false;
};

// Shannon entropy of the cell distribution of (1/a) floor(a <x, chi_j>).
// The reference decomposition H = |boundary| log a + D + o(1) means the
// log a terms cancel in the star/edge difference.
DiscEntropy discretized_entropy(const std::vector<Eigen::VectorXd>& samples,
                                const Eigen::MatrixXd& chi, double a);

struct KnnEntropy {
    double value = 0.0;
    double se = 0.0;  // 5-fold subsampling
};

// Kozachenko-Leonenko differential entropy with k-th nearest neighbors.
KnnEntropy differential_entropy_knn(const std::vector<Eigen::VectorXd>& points, int k = 4);

enum class EntropyMethod { Discretized, Knn };

// Star and edge ball samples of one labeling, the input of the entropy
// functional at level k.
struct DeltaSamples {
    int k = 0;
    std::vector<std::vector<Eigen::VectorXd>> stars;  // per root type, shape B_k(C_o)
    std::vector<std::pair<std::pair<int, int>, std::vector<Eigen::VectorXd>>> edges;
};

struct EntropyReport {
    double delta = 0.0;
    double se = 0.0;
    struct Component {
        std::string name;
        double H = 0.0;
        double se = 0.0;
        long long n = 0;
        long long cells = 0;
        bool warn = false;
    };
    std::vector<Component> components;
    EntropyMethod method = EntropyMethod::Discretized;
    double a = 8.0;
};

// Delta_k = E_o[H(star)] - (1/2) sum_{i~o} H(edge) with exact q weights over
// root types; entropies on pi_basis coordinates.
EntropyReport delta_k_estimate(const DegreeMatrix& d, double lambda, const DeltaSamples& samples,
                               EntropyMethod method, double a = 8.0);

struct GaussianDeltaReport {
    double delta_eta = 0.0;     // Delta_k(mu^eta), the log-det difference form
    double delta_direct = 0.0;  // plain Gaussian Delta_k of the eta->0 wave
    double boundary_combo = 0.0;  // E_o[|dB_k(C)| - (1/2) sum |dB_k(e)|], must be 0
    double eta = 0.0;
    int k = 0;
};

// Deterministic Delta_k(mu^eta) by log-determinants:
//   (1/2) E_o[logdet S0_P - logdet M_P]_star - (1/4) E_o[sum_i (...)]_edges
// with S0 = lim Im G, M = Im G^{lambda+i eta}, both restricted to pi_basis.
GaussianDeltaReport gaussian_delta_k(const DegreeMatrix& d, double lambda, double eta, int k,
                                     const ContinuationResult* precomputed = nullptr);

}  // namespace conewave
