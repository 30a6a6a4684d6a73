#pragma once

#include <boost/rational.hpp>
#include <string>
#include <vector>

namespace conewave {

using Rational = boost::rational<long long>;

// k x k integer matrix d, entry d(i,j) = number of edges a type-i vertex
// sends to type-j vertices.
struct DegreeMatrix {
    int k = 0;
    std::vector<long long> entries;  // row-major k*k

    DegreeMatrix() = default;
    DegreeMatrix(int k_, std::vector<long long> e) : k(k_), entries(std::move(e)) {}

    long long operator()(int i, int j) const { return entries[static_cast<size_t>(i) * k + j]; }
    long long row_sum(int i) const {
        long long s = 0;
        for (int j = 0; j < k; ++j) s += (*this)(i, j);
        return s;
    }
};

// Convenience constructors for the models used throughout the tests.
DegreeMatrix regular_matrix(long long d);                    // [[d]]
DegreeMatrix biregular_matrix(long long d1, long long d2);   // [[0,d1],[d2,0]]
DegreeMatrix k4_matrix();                                    // adjacency of K4, 4 types

struct ConditionFailure {
    int condition = 0;        // 1..4 as in the defining conditions
    std::string detail;       // witness indices and values
};

struct ValidationReport {
    bool valid = false;
    std::vector<ConditionFailure> failures;
};

// Checks the four expanding-degree-matrix conditions:
//   1. support symmetry        d_ij > 0 => d_ji > 0
//   2. ratio consistency       (d_ij/d_ji)(d_jl/d_lj) = (d_il/d_li), exact rationals
//   3. irreducible support digraph
//   4. max_i row_sum >= 3 and min_i row_sum >= 2
// Invalid input yields a report with witnesses, never an exception.
ValidationReport validate(const DegreeMatrix& d);

struct TypeFractions {
    std::vector<Rational> q;  // positive, sums to 1, q_i d_ij = q_j d_ji on support
    std::vector<double> q_double() const;
    // Smallest L > 0 such that q_i * L is an integer for every i.
    long long denominator_lcm() const;
};

// Unique normalized solution of q_i/q_j = d_ji/d_ij over the support.
// Requires a valid matrix; throws std::invalid_argument otherwise.
TypeFractions type_fractions(const DegreeMatrix& d);

namespace detail {
// Same computation for matrices satisfying only the consistency conditions
// (support symmetry, ratios, irreducibility); the counting formula does not
// need the growth condition.
TypeFractions type_fractions_relaxed(const DegreeMatrix& d);
}  // namespace detail

struct FeasibleCounts {
    bool feasible = false;
    std::vector<long long> counts;  // |V_i| = q_i N when feasible
    long long next_feasible = 0;    // smallest feasible N' >= N when infeasible
    std::string reason;
};

// N is feasible iff every q_i N is integral and every within-type half-edge
// count d_ii q_i N is even.
FeasibleCounts feasible_counts(const DegreeMatrix& d, long long N);

}  // namespace conewave
