#pragma once

// Independent oracles used by the test suites: brute-force re-derivations
// kept deliberately separate from the library implementations they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include "conewave/degmat.hpp"
#include "conewave/stats.hpp"

namespace oracles {

// Brute-force check of the four expanding-degree-matrix conditions.
inline bool brute_force_valid(const conewave::DegreeMatrix& d) {
    const int k = d.k;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (d(i, j) > 0 && d(j, i) == 0) return false;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            for (int l = 0; l < k; ++l) {
                if (d(j, i) == 0 || d(l, j) == 0 || d(l, i) == 0) continue;
                if (d(i, j) == 0 || d(j, l) == 0 || d(i, l) == 0) return false;
                // cross-multiplied integer identity
                if (d(i, j) * d(j, l) * d(l, i) != d(j, i) * d(l, j) * d(i, l)) return false;
            }
    // reachability from every vertex (matrix power closure)
    std::vector<std::vector<bool>> r(k, std::vector<bool>(k, false));
    for (int i = 0; i < k; ++i) r[i][i] = true;
    for (int step = 0; step < k; ++step)
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                if (d(i, j) > 0)
                    for (int s = 0; s < k; ++s)
                        if (r[s][i]) r[s][j] = true;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (!r[i][j]) return false;
    long long mx = 0, mn = std::numeric_limits<long long>::max();
    for (int i = 0; i < k; ++i) {
        mx = std::max(mx, d.row_sum(i));
        mn = std::min(mn, d.row_sum(i));
    }
    return mx >= 3 && mn >= 2;
}

// Brute-force Levy-Prokhorov for atomic measures: the same breakpoint scan
// as the library, but with max_A [P(A) - Q(A^eps)] enumerated over all 2^n
// atom subsets instead of a flow.
inline double brute_force_lp(const conewave::EmpiricalMeasure& P,
                             const conewave::EmpiricalMeasure& Q) {
    const size_t nP = P.atoms.size(), nQ = Q.atoms.size();
    const double TP = static_cast<double>(P.total), TQ = static_cast<double>(Q.total);
    std::vector<std::vector<double>> dist(nP, std::vector<double>(nQ));
    std::vector<double> ds{0.0};
    for (size_t a = 0; a < nP; ++a)
        for (size_t b = 0; b < nQ; ++b) {
            dist[a][b] = P.atoms[a].tag == Q.atoms[b].tag
                             ? (P.atoms[a].x - Q.atoms[b].x).norm()
                             : std::numeric_limits<double>::infinity();
            if (std::isfinite(dist[a][b])) ds.push_back(dist[a][b]);
        }
    std::sort(ds.begin(), ds.end());
    ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
    ds.push_back(std::numeric_limits<double>::infinity());

    auto worst = [&](double eps) {
        // max over subsets A of P-atoms of P(A) - Q(A^eps), both orientations.
        double best = 0.0;
        for (size_t mask = 1; mask < (1u << nP); ++mask) {
            double p = 0.0, q = 0.0;
            for (size_t a = 0; a < nP; ++a)
                if (mask & (1u << a)) p += static_cast<double>(P.atoms[a].mass) / TP;
            for (size_t b = 0; b < nQ; ++b) {
                bool close = false;
                for (size_t a = 0; a < nP && !close; ++a)
                    if ((mask & (1u << a)) && dist[a][b] < eps) close = true;
                if (close) q += static_cast<double>(Q.atoms[b].mass) / TQ;
            }
            best = std::max(best, p - q);
        }
        for (size_t mask = 1; mask < (1u << nQ); ++mask) {
            double p = 0.0, q = 0.0;
            for (size_t b = 0; b < nQ; ++b)
                if (mask & (1u << b)) q += static_cast<double>(Q.atoms[b].mass) / TQ;
            for (size_t a = 0; a < nP; ++a) {
                bool close = false;
                for (size_t b = 0; b < nQ && !close; ++b)
                    if ((mask & (1u << b)) && dist[a][b] < eps) close = true;
                if (close) p += static_cast<double>(P.atoms[a].mass) / TP;
            }
            best = std::max(best, q - p);
        }
        return best;
    };

    for (size_t m = 0; m + 1 < ds.size(); ++m) {
        double eps_in = std::nextafter(ds[m], std::numeric_limits<double>::max());
        double req = worst(eps_in);
        if (req <= ds[m + 1]) return std::max(req, ds[m]);
    }
    return 1.0;
}

// All half-edge matchings of a tiny configuration model, as multisets of
// edges; returns (edge multiset -> number of matchings).
using EdgeMultiset = std::vector<std::pair<int, int>>;

inline void enumerate_within(std::vector<int>& stubs, EdgeMultiset& acc,
                             std::map<EdgeMultiset, long long>& out,
                             const std::vector<EdgeMultiset>& cross_part);

// Enumerates matchings for a 2-type cross pair or a single within-type set.
// For the tiny instances used in tests we only need: all perfect matchings of
// one within-type stub list, or all bijections between two stub lists.
inline void all_within_matchings(std::vector<int> stubs,
                                 std::map<EdgeMultiset, long long>& out) {
    struct Rec {
        static void go(std::vector<int>& s, EdgeMultiset& acc,
                       std::map<EdgeMultiset, long long>& out) {
            if (s.empty()) {
                EdgeMultiset key = acc;
                std::sort(key.begin(), key.end());
                ++out[key];
                return;
            }
            int first = s.front();
            for (size_t j = 1; j < s.size(); ++j) {
                std::vector<int> rest;
                for (size_t t = 1; t < s.size(); ++t)
                    if (t != j) rest.push_back(s[t]);
                acc.emplace_back(std::min(first, s[j]), std::max(first, s[j]));
                go(rest, acc, out);
                acc.pop_back();
            }
        }
    };
    EdgeMultiset acc;
    Rec::go(stubs, acc, out);
}

inline void all_cross_matchings(const std::vector<int>& a, const std::vector<int>& b,
                                std::map<EdgeMultiset, long long>& out) {
    // Half-edges are distinguishable: permute stub positions, not vertex ids.
    std::vector<size_t> perm(b.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
        EdgeMultiset key;
        for (size_t i = 0; i < a.size(); ++i) {
            int u = a[i], v = b[perm[i]];
            key.emplace_back(std::min(u, v), std::max(u, v));
        }
        std::sort(key.begin(), key.end());
        ++out[key];
    } while (std::next_permutation(perm.begin(), perm.end()));
}

inline double chi_square_pvalue(double stat, int dof) {
    boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, stat));
}

// Entrywise empirical covariance and its MC standard errors.
struct CovarianceEstimate {
    Eigen::MatrixXd cov;
    Eigen::MatrixXd se;
};

inline CovarianceEstimate empirical_covariance(const Eigen::MatrixXd& samples) {
    const long long n = samples.rows();
    const int m = static_cast<int>(samples.cols());
    CovarianceEstimate out;
    out.cov = samples.transpose() * samples / static_cast<double>(n);
    out.se.resize(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double mean = out.cov(i, j);
            double var = 0.0;
            for (long long s = 0; s < n; ++s) {
                double v = samples(s, i) * samples(s, j) - mean;
                var += v * v;
            }
            out.se(i, j) = std::sqrt(var / static_cast<double>(n - 1) / static_cast<double>(n));
        }
    return out;
}

}  // namespace oracles
