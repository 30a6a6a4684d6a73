#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "conewave/cover.hpp"
#include "conewave/degmat.hpp"

namespace conewave {

struct TypedGraph {
    long long N = 0;
    std::vector<int> types;
    std::vector<std::pair<int, int>> edges;  // u <= v sorted; repeats encode multi-edges
    std::vector<std::vector<int>> adj;       // with multiplicity; loops appear twice
    bool simple = false;
    int retries = 0;  // rejection count in simple mode
    Eigen::MatrixXd adjacency_matrix() const;
};

enum class SampleMode { SimpleReject, AllowMulti };

struct RejectionBudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Uniform configuration-model sample: independent uniform matchings of the
// half-edges of every type pair.  SimpleReject resamples until the result has
// no loops or parallel edges.
TypedGraph sample_graph(const DegreeMatrix& d, long long N, std::uint64_t seed,
                        SampleMode mode = SampleMode::SimpleReject, int max_retries = 20000);

struct ConfigCount {
    boost::multiprecision::cpp_rational formula;  // symmetry-weighted multigraph count
    boost::multiprecision::cpp_int raw_matchings; // plain count of half-edge matchings
};

// Exact counts:
//   formula = prod_i M(d_ii q_i N)/(d_ii!)^{q_i N}
//           * prod_{i<j} (d_ij q_i N)! / ((d_ij!)^{q_i N} (d_ji!)^{q_j N})
// with M(m) = (m-1)!! the number of perfect matchings of m half-edges.
ConfigCount count_configurations(const DegreeMatrix& d, long long N);

struct SpectralData {
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;  // columns
    double max_residual = 0.0;     // ||A psi - lambda psi|| / ||A||
    double max_orthogonality = 0.0;
};

SpectralData eigendecompose(const TypedGraph& g, long long max_n = 4000);

struct EmptyWindow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Indices of eigenvalues inside [lambda - eps, lambda + eps].
std::vector<int> spectral_window(const SpectralData& sd, double lambda, double eps);

// f = sqrt(N) psi_i for a uniformly chosen eigenvalue in the window.
Eigen::VectorXd window_eigenvector(const SpectralData& sd, double lambda, double eps,
                                   std::mt19937_64& rng);

// sqrt(N) (psi~ + v) with psi~ = |W|^{-1/2} sum_{i in W} g_i psi_i, g_i iid N(0,1).
Eigen::VectorXd noisy_almost_eigenvector(const SpectralData& sd, double lambda, double eps,
                                         std::mt19937_64& rng,
                                         const Eigen::VectorXd* v = nullptr);

// Weighted samples of ball labelings in canonical coordinates, stratified by
// root type.  Weights within a type are uniform; the type itself carries the
// exact fraction q_i in downstream expectations.
struct EmpiricalProcess {
    BallShape shape;  // shape family; root types vary per stratum
    std::vector<std::vector<Eigen::VectorXd>> by_type;
    std::vector<long long> attempts;  // per type, including skipped
    std::vector<long long> skipped;   // cycle flags per type
    double skip_rate() const;
};

// n_roots root draws stratified proportionally to q (at least one per type);
// cyclic neighborhoods are skipped and counted.
EmpiricalProcess local_statistics(const TypedGraph& g, const Eigen::VectorXd& f,
                                  const DegreeMatrix& d, int radius, long long n_roots,
                                  std::uint64_t seed);

// Edge-ball samples for every unordered type pair with d(i,j) > 0.
struct EdgeProcess {
    int radius = 0;
    // keyed by (min(i,j), max(i,j)) -> samples in canonical edge-ball coordinates
    std::vector<std::pair<std::pair<int, int>, std::vector<Eigen::VectorXd>>> by_pair;
    long long skipped = 0;
    long long attempts = 0;
};

EdgeProcess local_edge_statistics(const TypedGraph& g, const Eigen::VectorXd& f,
                                  const DegreeMatrix& d, int radius, long long n_edges_per_pair,
                                  std::uint64_t seed);

struct QuotientSpectrum {
    Eigen::VectorXd eigenvalues;  // of the k x k quotient, ascending
    Eigen::MatrixXd vectors;      // right eigenvectors of d (block-constant lift values)
};

// Eigenpairs of the quotient matrix d acting on block-constant functions;
// computed through the symmetrized conjugate diag(sqrt q) d diag(sqrt q)^{-1}.
QuotientSpectrum quotient_spectrum(const DegreeMatrix& d);

struct K4Check {
    bool is_lift = false;
    double residual = 0.0;  // max |(A v + v)_x|, exact integer arithmetic
    bool exact = false;
};

// Verifies the planted eigenvector (3 on fiber 0, -1 elsewhere, eigenvalue -1)
// on a lift of K4.
K4Check k4_planted_check(const TypedGraph& g);
Eigen::VectorXd k4_planted_vector(const TypedGraph& g);

// View a typed graph as a single-type graph with regular degree (all types 0).
// Requires every vertex to have the same total degree.
TypedGraph retype_single(const TypedGraph& g);

}  // namespace conewave
