#include "conewave/degmat.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace conewave {

DegreeMatrix regular_matrix(long long d) { return DegreeMatrix(1, {d}); }

DegreeMatrix biregular_matrix(long long d1, long long d2) {
    return DegreeMatrix(2, {0, d1, d2, 0});
}

DegreeMatrix k4_matrix() {
    return DegreeMatrix(4, {0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0});
}

ValidationReport validate(const DegreeMatrix& d) {
    ValidationReport rep;
    const int k = d.k;
    auto fail = [&rep](int cond, const std::string& msg) {
        rep.failures.push_back({cond, msg});
    };

    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (d(i, j) > 0 && d(j, i) == 0) {
                std::ostringstream os;
                os << "d(" << i << "," << j << ")=" << d(i, j) << " but d(" << j << "," << i
                   << ")=0";
                fail(1, os.str());
            }

    // Ratio consistency over all triples, exact rational arithmetic.
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            for (int l = 0; l < k; ++l) {
                if (d(j, i) == 0 || d(l, j) == 0 || d(l, i) == 0) continue;
                if (d(i, j) == 0 || d(j, l) == 0 || d(i, l) == 0) continue;
                Rational lhs = Rational(d(i, j), d(j, i)) * Rational(d(j, l), d(l, j));
                Rational rhs = Rational(d(i, l), d(l, i));
                if (lhs != rhs) {
                    std::ostringstream os;
                    os << "triple (" << i << "," << j << "," << l << ")";
                    fail(2, os.str());
                }
            }

    // Irreducibility: every type reaches every other in the support digraph.
    {
        std::vector<std::vector<bool>> reach(k, std::vector<bool>(k, false));
        for (int i = 0; i < k; ++i) {
            reach[i][i] = true;
            std::vector<int> stack{i};
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                for (int v = 0; v < k; ++v)
                    if (d(u, v) > 0 && !reach[i][v]) {
                        reach[i][v] = true;
                        stack.push_back(v);
                    }
            }
        }
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                if (!reach[i][j]) {
                    std::ostringstream os;
                    os << "type " << j << " unreachable from " << i;
                    fail(3, os.str());
                }
    }

    long long maxrow = 0, minrow = d.k > 0 ? d.row_sum(0) : 0;
    for (int i = 0; i < k; ++i) {
        maxrow = std::max(maxrow, d.row_sum(i));
        minrow = std::min(minrow, d.row_sum(i));
    }
    if (maxrow < 3) fail(4, "max row sum " + std::to_string(maxrow) + " < 3");
    if (minrow < 2) fail(4, "min row sum " + std::to_string(minrow) + " < 2");

    rep.valid = rep.failures.empty();
    return rep;
}

std::vector<double> TypeFractions::q_double() const {
    std::vector<double> out;
    out.reserve(q.size());
    for (const auto& r : q) out.push_back(boost::rational_cast<double>(r));
    return out;
}

long long TypeFractions::denominator_lcm() const {
    long long l = 1;
    for (const auto& r : q) l = std::lcm(l, r.denominator());
    return l;
}

namespace {

TypeFractions type_fractions_impl(const DegreeMatrix& d);

}  // namespace

TypeFractions type_fractions(const DegreeMatrix& d) {
    if (!validate(d).valid) throw std::invalid_argument("type_fractions: invalid degree matrix");
    return type_fractions_impl(d);
}

TypeFractions detail::type_fractions_relaxed(const DegreeMatrix& d) {
    auto rep = validate(d);
    for (const auto& f : rep.failures)
        if (f.condition != 4)
            throw std::invalid_argument("type_fractions_relaxed: inconsistent degree matrix");
    return type_fractions_impl(d);
}

namespace {

TypeFractions type_fractions_impl(const DegreeMatrix& d) {
    const int k = d.k;
    // BFS the support graph assigning relative weights w_i with w_i/w_j = d_ji/d_ij.
    std::vector<Rational> w(k, Rational(0));
    w[0] = Rational(1);
    std::vector<int> queue{0};
    std::vector<bool> seen(k, false);
    seen[0] = true;
    while (!queue.empty()) {
        int u = queue.back();
        queue.pop_back();
        for (int v = 0; v < k; ++v) {
            if (d(u, v) == 0) continue;
            Rational wv = w[u] * Rational(d(u, v), d(v, u));
            if (!seen[v]) {
                w[v] = wv;
                seen[v] = true;
                queue.push_back(v);
            } else if (w[v] != wv) {
                // Cannot happen for a valid matrix (condition 2).
                throw std::logic_error("type_fractions: inconsistent ratios");
            }
        }
    }
    Rational total(0);
    for (const auto& x : w) total += x;
    TypeFractions tf;
    tf.q.reserve(k);
    for (const auto& x : w) tf.q.push_back(x / total);
    return tf;
}

}  // namespace

FeasibleCounts feasible_counts(const DegreeMatrix& d, long long N) {
    TypeFractions tf = type_fractions(d);
    const long long L = tf.denominator_lcm();

    auto counts_for = [&](long long n) {
        std::vector<long long> c;
        c.reserve(tf.q.size());
        for (const auto& qi : tf.q)
            c.push_back(boost::rational_cast<long long>(qi * Rational(n)));
        return c;
    };
    auto is_feasible = [&](long long n) -> bool {
        if (n <= 0 || n % L != 0) return false;
        auto c = counts_for(n);
        for (size_t i = 0; i < c.size(); ++i)
            if ((d(static_cast<int>(i), static_cast<int>(i)) * c[i]) % 2 != 0) return false;
        return true;
    };

    FeasibleCounts out;
    if (is_feasible(N)) {
        out.feasible = true;
        out.counts = counts_for(N);
        return out;
    }
    out.feasible = false;
    long long n = (N + L - 1) / L * L;
    while (!is_feasible(n)) n += L;
    out.next_feasible = n;
    if (N % L != 0)
        out.reason = "q_i N not integral (N must be a multiple of " + std::to_string(L) + ")";
    else
        out.reason = "odd within-type half-edge count";
    return out;
}

}  // namespace conewave
