#include "conewave/graphgen.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "conewave/seeds.hpp"

namespace conewave {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

Eigen::MatrixXd TypedGraph::adjacency_matrix() const {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
    for (auto [u, v] : edges) {
        if (u == v) {
            A(u, u) += 2.0;  // a loop contributes 2 to the diagonal walk count
        } else {
            A(u, v) += 1.0;
            A(v, u) += 1.0;
        }
    }
    return A;
}

namespace {

TypedGraph sample_once(const DegreeMatrix& d, const std::vector<long long>& counts, long long N,
                       std::mt19937_64& rng) {
    TypedGraph g;
    g.N = N;
    g.types.resize(N);
    std::vector<long long> offset(d.k + 1, 0);
    for (int t = 0; t < d.k; ++t) offset[t + 1] = offset[t] + counts[t];
    for (int t = 0; t < d.k; ++t)
        for (long long v = offset[t]; v < offset[t + 1]; ++v) g.types[v] = t;

    auto stubs_of = [&](int t, int toward) {
        std::vector<int> stubs;
        stubs.reserve(counts[t] * d(t, toward));
        for (long long v = offset[t]; v < offset[t + 1]; ++v)
            for (long long s = 0; s < d(t, toward); ++s) stubs.push_back(static_cast<int>(v));
        return stubs;
    };

    for (int i = 0; i < d.k; ++i) {
        // Within-type pairs: uniform perfect matching of the d_ii half-edges.
        if (d(i, i) > 0) {
            auto stubs = stubs_of(i, i);
            std::shuffle(stubs.begin(), stubs.end(), rng);
            for (size_t s = 0; s + 1 < stubs.size(); s += 2) {
                int u = stubs[s], v = stubs[s + 1];
                g.edges.emplace_back(std::min(u, v), std::max(u, v));
            }
        }
        // Cross pairs: uniform bijection between the two stub lists.
        for (int j = i + 1; j < d.k; ++j) {
            if (d(i, j) == 0) continue;
            auto a = stubs_of(i, j);
            auto b = stubs_of(j, i);
            std::shuffle(b.begin(), b.end(), rng);
            for (size_t s = 0; s < a.size(); ++s)
                g.edges.emplace_back(std::min(a[s], b[s]), std::max(a[s], b[s]));
        }
    }
    std::sort(g.edges.begin(), g.edges.end());

    g.simple = true;
    for (size_t e = 0; e < g.edges.size(); ++e) {
        if (g.edges[e].first == g.edges[e].second ||
            (e > 0 && g.edges[e] == g.edges[e - 1])) {
            g.simple = false;
            break;
        }
    }
    g.adj.assign(N, {});
    for (auto [u, v] : g.edges) {
        g.adj[u].push_back(v);
        if (u != v) g.adj[v].push_back(u);
        else g.adj[u].push_back(v);
    }
    return g;
}

}  // namespace

TypedGraph sample_graph(const DegreeMatrix& d, long long N, std::uint64_t seed, SampleMode mode,
                        int max_retries) {
    auto fc = feasible_counts(d, N);
    if (!fc.feasible)
        throw std::invalid_argument("sample_graph: infeasible N (" + fc.reason +
                                    "), next feasible N = " + std::to_string(fc.next_feasible));
    std::mt19937_64 rng(derive_seed(seed, "sample_graph"));
    for (int attempt = 0;; ++attempt) {
        TypedGraph g = sample_once(d, fc.counts, N, rng);
        g.retries = attempt;
        if (mode == SampleMode::AllowMulti || g.simple) return g;
        if (attempt >= max_retries)
            throw RejectionBudgetExceeded("sample_graph: no simple graph after " +
                                          std::to_string(attempt) + " tries");
    }
}

namespace {

cpp_int factorial(long long n) {
    cpp_int f = 1;
    for (long long i = 2; i <= n; ++i) f *= i;
    return f;
}

cpp_int matchings(long long m) {  // (m-1)!! pairings of m points, m even
    cpp_int f = 1;
    for (long long i = m - 1; i > 1; i -= 2) f *= i;
    return f;
}

cpp_int ipow(const cpp_int& b, long long e) {
    cpp_int r = 1;
    for (long long i = 0; i < e; ++i) r *= b;
    return r;
}

}  // namespace

ConfigCount count_configurations(const DegreeMatrix& d, long long N) {
    // The counting formula needs only the consistency conditions, not growth.
    TypeFractions tf = detail::type_fractions_relaxed(d);
    std::vector<long long> counts;
    for (const auto& qi : tf.q) {
        Rational c = qi * Rational(N);
        if (c.denominator() != 1)
            throw std::invalid_argument("count_configurations: q_i N not integral");
        counts.push_back(boost::rational_cast<long long>(c));
    }
    for (size_t i = 0; i < counts.size(); ++i)
        if ((d(static_cast<int>(i), static_cast<int>(i)) * counts[i]) % 2 != 0)
            throw std::invalid_argument("count_configurations: odd within-type half-edges");
    ConfigCount out;
    out.formula = 1;
    out.raw_matchings = 1;
    for (int i = 0; i < d.k; ++i) {
        long long ci = counts[i];
        if (d(i, i) > 0) {
            cpp_int m = matchings(d(i, i) * ci);
            out.raw_matchings *= m;
            out.formula *= cpp_rational(m, ipow(factorial(d(i, i)), ci));
        }
        for (int j = i + 1; j < d.k; ++j) {
            if (d(i, j) == 0) continue;
            cpp_int m = factorial(d(i, j) * ci);
            out.raw_matchings *= m;
            out.formula *= cpp_rational(
                m, ipow(factorial(d(i, j)), ci) * ipow(factorial(d(j, i)), counts[j]));
        }
    }
    return out;
}

SpectralData eigendecompose(const TypedGraph& g, long long max_n) {
    if (g.N > max_n)
        throw std::invalid_argument("eigendecompose: N exceeds the dense-solve bound");
    Eigen::MatrixXd A = g.adjacency_matrix();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecompose: solver failed");
    SpectralData sd;
    sd.eigenvalues = es.eigenvalues();
    sd.eigenvectors = es.eigenvectors();
    double anorm = sd.eigenvalues.cwiseAbs().maxCoeff();
    Eigen::MatrixXd R = A * sd.eigenvectors - sd.eigenvectors * sd.eigenvalues.asDiagonal();
    sd.max_residual = R.colwise().norm().maxCoeff() / std::max(anorm, 1.0);
    Eigen::MatrixXd Q = sd.eigenvectors.transpose() * sd.eigenvectors -
                        Eigen::MatrixXd::Identity(g.N, g.N);
    sd.max_orthogonality = Q.cwiseAbs().maxCoeff();
    return sd;
}

std::vector<int> spectral_window(const SpectralData& sd, double lambda, double eps) {
    std::vector<int> w;
    for (int i = 0; i < sd.eigenvalues.size(); ++i)
        if (sd.eigenvalues(i) >= lambda - eps && sd.eigenvalues(i) <= lambda + eps)
            w.push_back(i);
    return w;
}

Eigen::VectorXd window_eigenvector(const SpectralData& sd, double lambda, double eps,
                                   std::mt19937_64& rng) {
    auto w = spectral_window(sd, lambda, eps);
    if (w.empty()) throw EmptyWindow("window_eigenvector: empty spectral window");
    std::uniform_int_distribution<size_t> pick(0, w.size() - 1);
    int i = w[pick(rng)];
    double n = static_cast<double>(sd.eigenvalues.size());
    return std::sqrt(n) * sd.eigenvectors.col(i);
}

Eigen::VectorXd noisy_almost_eigenvector(const SpectralData& sd, double lambda, double eps,
                                         std::mt19937_64& rng, const Eigen::VectorXd* v) {
    auto w = spectral_window(sd, lambda, eps);
    if (w.empty()) throw EmptyWindow("noisy_almost_eigenvector: empty spectral window");
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(sd.eigenvectors.rows());
    for (int i : w) psi += gauss(rng) * sd.eigenvectors.col(i);
    psi /= std::sqrt(static_cast<double>(w.size()));
    if (v) psi += *v;
    double n = static_cast<double>(sd.eigenvalues.size());
    return std::sqrt(n) * psi;
}

double EmpiricalProcess::skip_rate() const {
    long long att = 0, sk = 0;
    for (size_t t = 0; t < attempts.size(); ++t) {
        att += attempts[t];
        sk += skipped[t];
    }
    return att == 0 ? 0.0 : static_cast<double>(sk) / static_cast<double>(att);
}

EmpiricalProcess local_statistics(const TypedGraph& g, const Eigen::VectorXd& f,
                                  const DegreeMatrix& d, int radius, long long n_roots,
                                  std::uint64_t seed) {
    EmpiricalProcess out;
    out.shape = BallShape::vertex_ball(0, radius);
    out.by_type.resize(d.k);
    out.attempts.assign(d.k, 0);
    out.skipped.assign(d.k, 0);
    auto q = type_fractions(d).q_double();
    std::vector<std::vector<int>> by_type(d.k);
    for (long long v = 0; v < g.N; ++v) by_type[g.types[v]].push_back(static_cast<int>(v));
    std::mt19937_64 rng(derive_seed(seed, "local_statistics"));
    for (int t = 0; t < d.k; ++t) {
        long long n_t = std::max<long long>(1, std::llround(q[t] * static_cast<double>(n_roots)));
        std::uniform_int_distribution<size_t> pick(0, by_type[t].size() - 1);
        for (long long s = 0; s < n_t; ++s) {
            ++out.attempts[t];
            int root = by_type[t][pick(rng)];
            auto lb = local_ball_from_graph(g.adj, g.types, d, root,
                                            BallShape::vertex_ball(t, radius), rng());
            if (!lb) {
                ++out.skipped[t];
                continue;
            }
            Eigen::VectorXd x(lb->ball.size());
            for (int v = 0; v < lb->ball.size(); ++v) x(v) = f(lb->graph_vertex[v]);
            out.by_type[t].push_back(std::move(x));
        }
    }
    return out;
}

EdgeProcess local_edge_statistics(const TypedGraph& g, const Eigen::VectorXd& f,
                                  const DegreeMatrix& d, int radius, long long n_edges_per_pair,
                                  std::uint64_t seed) {
    EdgeProcess out;
    out.radius = radius;
    std::mt19937_64 rng(derive_seed(seed, "local_edge_statistics"));
    // Bucket graph edges by unordered type pair.
    std::vector<std::vector<std::pair<int, int>>> buckets;
    std::vector<std::pair<int, int>> keys;
    for (int i = 0; i < d.k; ++i)
        for (int j = i; j < d.k; ++j)
            if (d(i, j) > 0) {
                keys.emplace_back(i, j);
                buckets.emplace_back();
            }
    auto key_index = [&](int a, int b) {
        auto kk = std::minmax(a, b);
        for (size_t s = 0; s < keys.size(); ++s)
            if (keys[s] == std::make_pair(kk.first, kk.second)) return s;
        throw std::logic_error("unexpected edge type");
    };
    for (auto [u, v] : g.edges)
        buckets[key_index(g.types[u], g.types[v])].emplace_back(u, v);

    for (size_t s = 0; s < keys.size(); ++s) {
        std::vector<Eigen::VectorXd> samples;
        if (!buckets[s].empty()) {
            std::uniform_int_distribution<size_t> pick(0, buckets[s].size() - 1);
            for (long long n = 0; n < n_edges_per_pair; ++n) {
                ++out.attempts;
                auto [u, v] = buckets[s][pick(rng)];
                // Orientation: canonical root is the min-type side; equal types
                // are oriented at random (the target law is exchangeable).
                int o = u, i = v;
                if (g.types[u] > g.types[v]) std::swap(o, i);
                if (g.types[u] == g.types[v] && (rng() & 1)) std::swap(o, i);
                auto lb = local_ball_from_graph(
                    g.adj, g.types, d, o,
                    BallShape::ball_of_edge(g.types[o], g.types[i], radius), rng(), i);
                if (!lb) {
                    ++out.skipped;
                    continue;
                }
                Eigen::VectorXd x(lb->ball.size());
                for (int w = 0; w < lb->ball.size(); ++w) x(w) = f(lb->graph_vertex[w]);
                samples.push_back(std::move(x));
            }
        }
        out.by_pair.emplace_back(keys[s], std::move(samples));
    }
    return out;
}

QuotientSpectrum quotient_spectrum(const DegreeMatrix& d) {
    auto q = type_fractions(d).q_double();
    Eigen::MatrixXd S(d.k, d.k);
    for (int i = 0; i < d.k; ++i)
        for (int j = 0; j < d.k; ++j)
            S(i, j) = std::sqrt(q[i] / q[j]) * static_cast<double>(d(i, j));
    // S is symmetric because q_i d_ij = q_j d_ji.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
    QuotientSpectrum out;
    out.eigenvalues = es.eigenvalues();
    out.vectors.resize(d.k, d.k);
    for (int c = 0; c < d.k; ++c)
        for (int i = 0; i < d.k; ++i)
            out.vectors(i, c) = es.eigenvectors()(i, c) / std::sqrt(q[i]);
    return out;
}

Eigen::VectorXd k4_planted_vector(const TypedGraph& g) {
    Eigen::VectorXd v(g.N);
    for (long long x = 0; x < g.N; ++x) v(x) = g.types[x] == 0 ? 3.0 : -1.0;
    return v;
}

K4Check k4_planted_check(const TypedGraph& g) {
    K4Check out;
    // A K4 lift: 4 types, every vertex with exactly one neighbor per other type.
    int maxt = 0;
    for (long long v = 0; v < g.N; ++v) maxt = std::max(maxt, g.types[v]);
    if (maxt != 3) return out;
    for (long long v = 0; v < g.N; ++v) {
        std::vector<int> cnt(4, 0);
        for (int w : g.adj[v]) ++cnt[g.types[w]];
        if (cnt[g.types[v]] != 0) return out;
        for (int t = 0; t < 4; ++t)
            if (t != g.types[v] && cnt[t] != 1) return out;
    }
    out.is_lift = true;
    // Exact integer check of A v = -v for v = 3 on fiber 0, -1 elsewhere.
    long long worst = 0;
    for (long long x = 0; x < g.N; ++x) {
        long long acc = 0;
        for (int w : g.adj[x]) acc += (g.types[w] == 0 ? 3 : -1);
        long long vx = (g.types[x] == 0 ? 3 : -1);
        worst = std::max(worst, std::llabs(acc + vx));
    }
    out.residual = static_cast<double>(worst);
    out.exact = worst == 0;
    return out;
}

TypedGraph retype_single(const TypedGraph& g) {
    long long deg = g.adj.empty() ? 0 : static_cast<long long>(g.adj[0].size());
    for (const auto& a : g.adj)
        if (static_cast<long long>(a.size()) != deg)
            throw std::invalid_argument("retype_single: graph is not regular");
    TypedGraph out = g;
    std::fill(out.types.begin(), out.types.end(), 0);
    return out;
}

}  // namespace conewave
