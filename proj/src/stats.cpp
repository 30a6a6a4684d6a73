#include "conewave/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <boost/math/special_functions/digamma.hpp>

namespace conewave {

ProjectionBasis pi_basis(const TreeBall& ball, double lambda) {
    const int n = ball.size();
    auto interior = ball.interior();
    ProjectionBasis pb;
    if (interior.empty()) {
        pb.chi = Eigen::MatrixXd::Identity(n, n);
        return pb;
    }
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, static_cast<int>(interior.size()));
    for (size_t c = 0; c < interior.size(); ++c) {
        int u = interior[c];
        C(u, c) = lambda;
        for (int v : ball.neighbors(u)) C(v, c) -= 1.0;
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(C);
    Eigen::MatrixXd Q = qr.householderQ();
    pb.chi = Q.rightCols(n - static_cast<int>(interior.size()));
    pb.orth_error = (pb.chi.transpose() * pb.chi -
                     Eigen::MatrixXd::Identity(pb.chi.cols(), pb.chi.cols()))
                        .cwiseAbs()
                        .maxCoeff();
    pb.constraint_error = (pb.chi.transpose() * C).cwiseAbs().maxCoeff();
    return pb;
}

EmpiricalMeasure EmpiricalMeasure::from_samples(const std::vector<Eigen::VectorXd>& xs, int tag,
                                                long long mass_per_atom) {
    EmpiricalMeasure m;
    m.append(xs, tag, mass_per_atom);
    return m;
}

void EmpiricalMeasure::append(const std::vector<Eigen::VectorXd>& xs, int tag,
                              long long mass_per_atom) {
    for (const auto& x : xs) {
        atoms.push_back({tag, x, mass_per_atom});
        total += mass_per_atom;
    }
}

namespace {

// ---------------------------------------------------------------- Dinic ----
struct Dinic {
    struct Edge {
        int to;
        long long cap;
        int rev;
    };
    std::vector<std::vector<Edge>> g;
    std::vector<int> level, iter;
    explicit Dinic(int n) : g(n), level(n), iter(n) {}
    void add_edge(int from, int to, long long cap) {
        g[from].push_back({to, cap, static_cast<int>(g[to].size())});
        g[to].push_back({from, 0, static_cast<int>(g[from].size()) - 1});
    }
    bool bfs(int s, int t) {
        std::fill(level.begin(), level.end(), -1);
        std::vector<int> q{s};
        level[s] = 0;
        for (size_t h = 0; h < q.size(); ++h) {
            int v = q[h];
            for (const auto& e : g[v])
                if (e.cap > 0 && level[e.to] < 0) {
                    level[e.to] = level[v] + 1;
                    q.push_back(e.to);
                }
        }
        return level[t] >= 0;
    }
    long long dfs(int v, int t, long long f) {
        if (v == t) return f;
        for (int& i = iter[v]; i < static_cast<int>(g[v].size()); ++i) {
            Edge& e = g[v][i];
            if (e.cap > 0 && level[v] < level[e.to]) {
                long long d = dfs(e.to, t, std::min(f, e.cap));
                if (d > 0) {
                    e.cap -= d;
                    g[e.to][e.rev].cap += d;
                    return d;
                }
            }
        }
        return 0;
    }
    long long max_flow(int s, int t) {
        long long flow = 0;
        while (bfs(s, t)) {
            std::fill(iter.begin(), iter.end(), 0);
            long long f;
            while ((f = dfs(s, t, std::numeric_limits<long long>::max())) > 0) flow += f;
        }
        return flow;
    }
};

// Pair distances grouped by tag; entries only for same-tag pairs.
struct PairTable {
    const EmpiricalMeasure* P;
    const EmpiricalMeasure* Q;
    std::vector<float> cache;  // row-major nP x nQ, +inf across tags
    bool cached = false;

    PairTable(const EmpiricalMeasure& p, const EmpiricalMeasure& q, size_t budget) : P(&p), Q(&q) {
        size_t pairs = p.atoms.size() * q.atoms.size();
        if (pairs <= budget) {
            cache.resize(pairs);
            for (size_t a = 0; a < p.atoms.size(); ++a)
                for (size_t b = 0; b < q.atoms.size(); ++b)
                    cache[a * q.atoms.size() + b] = static_cast<float>(dist(a, b));
            cached = true;
        }
    }
    double dist(size_t a, size_t b) const {
        const auto& pa = P->atoms[a];
        const auto& qb = Q->atoms[b];
        if (pa.tag != qb.tag) return std::numeric_limits<double>::infinity();
        return (pa.x - qb.x).norm();
    }
    double get(size_t a, size_t b) const {
        return cached ? static_cast<double>(cache[a * Q->atoms.size() + b]) : dist(a, b);
    }
};

// Max flow between atoms through edges with distance strictly below eps.
long long flow_below(const PairTable& T, const std::vector<long long>& pmass,
                     const std::vector<long long>& qmass, double eps) {
    const int nP = static_cast<int>(pmass.size());
    const int nQ = static_cast<int>(qmass.size());
    Dinic din(nP + nQ + 2);
    const int src = nP + nQ, snk = nP + nQ + 1;
    for (int a = 0; a < nP; ++a) din.add_edge(src, a, pmass[a]);
    for (int b = 0; b < nQ; ++b) din.add_edge(nP + b, snk, qmass[b]);
    for (int a = 0; a < nP; ++a)
        for (int b = 0; b < nQ; ++b)
            if (T.get(a, b) < eps)
                din.add_edge(a, nP + b, std::numeric_limits<long long>::max() / 4);
    return din.max_flow(src, snk);
}

long long lcm_ll(long long a, long long b) {
    return a / std::gcd(a, b) * b;
}

// Consolidate coincident atoms (exact coordinate equality) to keep discrete
// laws small for the flow.
EmpiricalMeasure dedup(const EmpiricalMeasure& m) {
    std::vector<size_t> order(m.atoms.size());
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](size_t a, size_t b) {
        const auto& A = m.atoms[a];
        const auto& B = m.atoms[b];
        if (A.tag != B.tag) return A.tag < B.tag;
        if (A.x.size() != B.x.size()) return A.x.size() < B.x.size();
        for (int i = 0; i < A.x.size(); ++i)
            if (A.x(i) != B.x(i)) return A.x(i) < B.x(i);
        return false;
    };
    auto equal = [&](size_t a, size_t b) { return !less(a, b) && !less(b, a); };
    std::sort(order.begin(), order.end(), less);
    EmpiricalMeasure out;
    for (size_t i = 0; i < order.size();) {
        size_t j = i;
        long long mass = 0;
        while (j < order.size() && equal(order[i], order[j])) mass += m.atoms[order[j++]].mass;
        out.atoms.push_back({m.atoms[order[i]].tag, m.atoms[order[i]].x, mass});
        out.total += mass;
        i = j;
    }
    return out;
}

}  // namespace

double lp_worst_deficiency(const EmpiricalMeasure& P, const EmpiricalMeasure& Q, double eps) {
    EmpiricalMeasure Pd = dedup(P), Qd = dedup(Q);
    long long common = lcm_ll(Pd.total, Qd.total);
    std::vector<long long> pm, qm;
    for (auto& a : Pd.atoms) pm.push_back(a.mass * (common / Pd.total));
    for (auto& b : Qd.atoms) qm.push_back(b.mass * (common / Qd.total));
    PairTable T(Pd, Qd, 1u << 24);
    long long F = flow_below(T, pm, qm, eps);
    return static_cast<double>(common - F) / static_cast<double>(common);
}

LPResult levy_prokhorov(const EmpiricalMeasure& Pin, const EmpiricalMeasure& Qin,
                        double bracket_tol) {
    if (Pin.atoms.empty() || Qin.atoms.empty())
        throw std::invalid_argument("levy_prokhorov: empty measure");
    for (const auto& a : Pin.atoms)
        for (const auto& b : Qin.atoms)
            if (a.tag == b.tag && a.x.size() != b.x.size())
                throw std::invalid_argument("levy_prokhorov: dimension mismatch within a tag");

    EmpiricalMeasure P = dedup(Pin), Q = dedup(Qin);
    long long common = lcm_ll(P.total, Q.total);
    std::vector<long long> pm, qm;
    for (auto& a : P.atoms) pm.push_back(a.mass * (common / P.total));
    for (auto& b : Q.atoms) qm.push_back(b.mass * (common / Q.total));
    const double T = static_cast<double>(common);

    const size_t pairs = P.atoms.size() * Q.atoms.size();
    PairTable table(P, Q, 3u * (1u << 23));  // cache up to ~25M pairs

    // The one-sided Prokhorov condition at eps reads F(eps) >= T (1 - eps);
    // max-flow through this bipartite network is orientation-symmetric, so
    // the symmetric distance needs a single flow per eps.
    auto feasible = [&](double eps) {
        long long F = flow_below(table, pm, qm, eps);
        return static_cast<double>(common - F) <= eps * T;
    };

    LPResult out;
    if (pairs <= 200000) {
        // Exact breakpoint scan: F is constant on (d_m, d_{m+1}], so the
        // distance is max(req_m, d_m) at the first m with req_m <= d_{m+1},
        // req_m = 1 - F_m / T.
        std::vector<double> ds;
        ds.reserve(pairs + 2);
        ds.push_back(0.0);
        for (size_t a = 0; a < P.atoms.size(); ++a)
            for (size_t b = 0; b < Q.atoms.size(); ++b) {
                double v = table.get(a, b);
                if (std::isfinite(v)) ds.push_back(v);
            }
        std::sort(ds.begin(), ds.end());
        ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
        ds.push_back(std::numeric_limits<double>::infinity());
        auto req_at = [&](size_t m) {
            // edges with dist <= ds[m], i.e. dist < anything in (ds[m], ds[m+1]]
            long long F = flow_below(table, pm, qm,
                                     std::nextafter(ds[m], std::numeric_limits<double>::max()));
            return static_cast<double>(common - F) / T;
        };
        size_t lo = 0, hi = ds.size() - 2, first = ds.size() - 2;
        while (lo <= hi) {
            size_t mid = (lo + hi) / 2;
            if (req_at(mid) <= ds[mid + 1]) {
                first = mid;
                if (mid == 0) break;
                hi = mid - 1;
            } else {
                lo = mid + 1;
            }
        }
        double req = req_at(first);
        double val = std::max(req, ds[first]);
        out.lower = out.upper = val;
        out.exact = true;
        return out;
    }

    // Bracketing search: grow eps until feasible, then bisect.
    double hi = 1.0 / 64.0;
    double lo = 0.0;
    while (!feasible(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 2.0) break;  // d_LP <= 1 always; 2.0 is a safe ceiling
    }
    for (int it = 0; it < 80 && hi - lo > bracket_tol; ++it) {
        double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            hi = mid;
        else
            lo = mid;
    }
    out.lower = lo;
    out.upper = hi;
    out.exact = false;
    return out;
}

DistanceReport xi_k(const std::vector<std::vector<Eigen::VectorXd>>& process_by_type,
                    const std::vector<WaveModel>& wave_by_type, const TypeFractions& q,
                    std::mt19937_64& rng, const XiOptions& opts) {
    const int k = static_cast<int>(q.q.size());
    bool any = false;
    for (const auto& v : process_by_type) any = any || !v.empty();
    if (!any) throw std::invalid_argument("xi_k: empty process");

    // Exact q masses: scale_P * q_t / n_t must be integral.
    long long scale_p = 1;
    bool overflow = false;
    for (int t = 0; t < k; ++t) {
        if (process_by_type[t].empty()) continue;
        long long bt = q.q[t].denominator() * static_cast<long long>(process_by_type[t].size());
        if (scale_p > (1LL << 50) / bt * std::gcd(scale_p, bt)) {
            overflow = true;
            break;
        }
        scale_p = lcm_ll(scale_p, bt);
    }
    EmpiricalMeasure P;
    for (int t = 0; t < k; ++t) {
        if (process_by_type[t].empty()) continue;
        long long mass =
            overflow ? std::llround(1e12 * boost::rational_cast<double>(q.q[t]) /
                                    static_cast<double>(process_by_type[t].size()))
                     : scale_p * q.q[t].numerator() /
                           (q.q[t].denominator() *
                            static_cast<long long>(process_by_type[t].size()));
        P.append(process_by_type[t], t, mass);
    }

    // Wave counts exactly proportional to q.
    long long L = q.denominator_lcm();
    long long n_wave = (opts.n_wave + L - 1) / L * L;
    std::vector<std::vector<Eigen::VectorXd>> wave_samples(k);
    for (int t = 0; t < k; ++t) {
        long long w_t = boost::rational_cast<long long>(q.q[t] * Rational(n_wave));
        Eigen::MatrixXd S = sample_wave_factor(wave_by_type[t], rng, w_t);
        wave_samples[t].reserve(w_t);
        for (long long r = 0; r < w_t; ++r) wave_samples[t].push_back(S.row(r).transpose());
    }

    double sigma_max = 1.0 / std::sqrt(wave_by_type[0].var_im_m);
    auto dlp_at = [&](double sigma) {
        EmpiricalMeasure Qm;
        for (int t = 0; t < k; ++t) {
            std::vector<Eigen::VectorXd> scaled;
            scaled.reserve(wave_samples[t].size());
            for (const auto& x : wave_samples[t]) scaled.push_back(sigma * x);
            Qm.append(scaled, t, 1);
        }
        return levy_prokhorov(P, Qm, 1e-6);
    };

    DistanceReport rep;
    rep.n_wave_used = n_wave;
    double best = std::numeric_limits<double>::infinity();
    double best_sigma = 0.0;
    int best_idx = 0;
    for (int s = 0; s < opts.sigma_grid; ++s) {
        double sigma = sigma_max * static_cast<double>(s) / (opts.sigma_grid - 1);
        LPResult r = dlp_at(sigma);
        rep.sigma_curve.emplace_back(sigma, r.value());
        if (r.value() < best) {
            best = r.value();
            best_sigma = sigma;
            best_idx = s;
        }
    }
    // Golden-section refinement between the neighbors of the best grid point.
    double lo = sigma_max * static_cast<double>(std::max(0, best_idx - 1)) / (opts.sigma_grid - 1);
    double hi = sigma_max *
                static_cast<double>(std::min(opts.sigma_grid - 1, best_idx + 1)) /
                (opts.sigma_grid - 1);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = dlp_at(x1).value(), f2 = dlp_at(x2).value();
    while (hi - lo > opts.sigma_tol) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = dlp_at(x1).value();
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = dlp_at(x2).value();
        }
        if (std::min(f1, f2) < best) {
            best = std::min(f1, f2);
            best_sigma = f1 < f2 ? x1 : x2;
        }
    }
    LPResult fin = dlp_at(best_sigma);
    rep.xi = std::min(best, fin.value());
    rep.sigma_argmin = best_sigma;
    rep.d_lp_lower = fin.lower;
    rep.d_lp_upper = fin.upper;
    return rep;
}

DiscEntropy discretized_entropy(const std::vector<Eigen::VectorXd>& samples,
                                const Eigen::MatrixXd& chi, double a) {
    if (a <= 0) throw std::invalid_argument("discretized_entropy: a must be positive");
    if (samples.empty()) throw std::invalid_argument("discretized_entropy: no samples");
    const int m = static_cast<int>(chi.cols());
    struct VecHash {
        size_t operator()(const std::vector<long long>& v) const {
            size_t h = 1469598103934665603ULL;
            for (long long x : v) {
                h ^= static_cast<size_t>(x);
                h *= 1099511628211ULL;
            }
            return h;
        }
    };
    std::unordered_map<std::vector<long long>, long long, VecHash> cells;
    std::vector<long long> key(m);
    for (const auto& s : samples) {
        Eigen::VectorXd y = chi.transpose() * s;
        for (int j = 0; j < m; ++j) key[j] = static_cast<long long>(std::floor(a * y(j)));
        ++cells[key];
    }
    const double n = static_cast<double>(samples.size());
    DiscEntropy out;
    double sum_sq = 0.0;
    for (const auto& [cell, cnt] : cells) {
        double p = static_cast<double>(cnt) / n;
        out.plugin -= p * std::log(p);
        sum_sq += p * std::log(p) * std::log(p);
    }
    out.occupied_cells = static_cast<long long>(cells.size());
    out.miller_madow = out.plugin + (static_cast<double>(out.occupied_cells) - 1.0) / (2.0 * n);
    out.se = std::sqrt(std::max(0.0, sum_sq - out.plugin * out.plugin) / n);
    out.avg_per_cell = n / static_cast<double>(out.occupied_cells);
    out.low_sample_warning = out.avg_per_cell < 10.0;
    return out;
}

namespace {

// Minimal KD-tree for k-th nearest neighbor queries.
class KdTree {
  public:
    explicit KdTree(const std::vector<Eigen::VectorXd>& pts) : pts_(pts) {
        idx_.resize(pts.size());
        std::iota(idx_.begin(), idx_.end(), 0);
        if (!pts.empty()) build(0, pts.size(), 0);
    }

    // Distance to the k-th nearest neighbor of pts[self], self excluded.
    double kth_distance(size_t self, int k) const {
        std::vector<double> best(k, std::numeric_limits<double>::infinity());
        query(0, idx_.size(), 0, self, best);
        return std::sqrt(best.back());
    }

  private:
    const std::vector<Eigen::VectorXd>& pts_;
    std::vector<size_t> idx_;

    void build(size_t lo, size_t hi, int depth) {
        if (hi - lo <= 1) return;
        size_t mid = (lo + hi) / 2;
        int dim = depth % pts_[0].size();
        std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                         [&](size_t a, size_t b) { return pts_[a](dim) < pts_[b](dim); });
        build(lo, mid, depth + 1);
        build(mid + 1, hi, depth + 1);
    }

    void query(size_t lo, size_t hi, int depth, size_t self, std::vector<double>& best) const {
        if (lo >= hi) return;
        size_t mid = (lo + hi) / 2;
        size_t p = idx_[mid];
        if (p != self) {
            double d2 = (pts_[p] - pts_[self]).squaredNorm();
            if (d2 < best.back()) {
                best.back() = d2;
                for (size_t i = best.size() - 1; i > 0 && best[i] < best[i - 1]; --i)
                    std::swap(best[i], best[i - 1]);
            }
        }
        if (hi - lo == 1) return;
        int dim = depth % pts_[0].size();
        double diff = pts_[self](dim) - pts_[p](dim);
        if (diff < 0) {
            query(lo, mid, depth + 1, self, best);
            if (diff * diff < best.back()) query(mid + 1, hi, depth + 1, self, best);
        } else {
            query(mid + 1, hi, depth + 1, self, best);
            if (diff * diff < best.back()) query(lo, mid, depth + 1, self, best);
        }
    }
};

double knn_entropy_raw(const std::vector<Eigen::VectorXd>& pts, int k) {
    const size_t n = pts.size();
    const int m = static_cast<int>(pts[0].size());
    KdTree tree(pts);
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double r = tree.kth_distance(i, k);
        acc += std::log(std::max(r, 1e-300));
    }
    double log_vm = 0.5 * m * std::log(M_PI) - std::lgamma(0.5 * m + 1.0);
    return boost::math::digamma(static_cast<double>(n)) - boost::math::digamma(static_cast<double>(k)) +
           log_vm + static_cast<double>(m) / static_cast<double>(n) * acc;
}

}  // namespace

KnnEntropy differential_entropy_knn(const std::vector<Eigen::VectorXd>& points, int k) {
    if (points.size() < 100)
        throw std::invalid_argument("differential_entropy_knn: needs at least 100 samples");
    KnnEntropy out;
    out.value = knn_entropy_raw(points, k);
    const int folds = 5;
    std::vector<double> h(folds);
    for (int f = 0; f < folds; ++f) {
        std::vector<Eigen::VectorXd> sub;
        for (size_t i = f; i < points.size(); i += folds) sub.push_back(points[i]);
        h[f] = knn_entropy_raw(sub, k);
    }
    double mean = std::accumulate(h.begin(), h.end(), 0.0) / folds;
    double var = 0.0;
    for (double x : h) var += (x - mean) * (x - mean);
    var /= (folds - 1);
    out.se = std::sqrt(var / folds);
    return out;
}

EntropyReport delta_k_estimate(const DegreeMatrix& d, double lambda, const DeltaSamples& samples,
                               EntropyMethod method, double a) {
    TypeFractions tf = type_fractions(d);
    auto q = tf.q_double();
    EntropyReport rep;
    rep.method = method;
    rep.a = a;

    auto component_entropy = [&](const std::vector<Eigen::VectorXd>& xs, const TreeBall& ball,
                                 const std::string& name) {
        ProjectionBasis pb = pi_basis(ball, lambda);
        EntropyReport::Component comp;
        comp.name = name;
        comp.n = static_cast<long long>(xs.size());
        if (method == EntropyMethod::Discretized) {
            DiscEntropy de = discretized_entropy(xs, pb.chi, a);
            comp.H = de.miller_madow;
            comp.se = de.se;
            comp.cells = de.occupied_cells;
            comp.warn = de.low_sample_warning;
        } else {
            std::vector<Eigen::VectorXd> proj;
            proj.reserve(xs.size());
            for (const auto& x : xs) proj.push_back(pb.chi.transpose() * x);
            KnnEntropy ke = differential_entropy_knn(proj);
            comp.H = ke.value;
            comp.se = ke.se;
        }
        rep.components.push_back(comp);
        return comp;
    };

    double delta = 0.0, var = 0.0;
    for (int t = 0; t < d.k; ++t) {
        if (samples.stars[t].empty())
            throw std::invalid_argument("delta_k_estimate: missing star samples for a type");
        TreeBall ball = build_ball(d, BallShape::ball_of_star(t, samples.k));
        auto comp = component_entropy(samples.stars[t], ball, "star_t" + std::to_string(t));
        delta += q[t] * comp.H;
        var += q[t] * q[t] * comp.se * comp.se;
    }
    for (const auto& [key, xs] : samples.edges) {
        auto [i, j] = key;
        if (xs.empty()) throw std::invalid_argument("delta_k_estimate: missing edge samples");
        TreeBall ball = build_ball(d, BallShape::ball_of_edge(i, j, samples.k));
        auto comp = component_entropy(
            xs, ball, "edge_t" + std::to_string(i) + "_t" + std::to_string(j));
        // Ordered-pair weight: q_i d_ij (+ q_j d_ji when i != j, which is equal).
        double w = 0.5 * q[i] * static_cast<double>(d(i, j));
        if (i != j) w += 0.5 * q[j] * static_cast<double>(d(j, i));
        delta -= w * comp.H;
        var += w * w * comp.se * comp.se;
    }
    rep.delta = delta;
    rep.se = std::sqrt(var);
    return rep;
}

GaussianDeltaReport gaussian_delta_k(const DegreeMatrix& d, double lambda, double eta, int k,
                                     const ContinuationResult* precomputed) {
    ContinuationResult local;
    const ContinuationResult* cont = precomputed;
    if (!cont) {
        local = continue_to_real_axis(d, lambda);
        cont = &local;
    }
    if (!cont->converged || cont->blowup)
        throw std::invalid_argument("gaussian_delta_k: lambda is a D_d suspect");
    ConeGreens cg_eta = solve_fixed_point(d, Complex(lambda, eta), {}, &cont->last);
    if (!cg_eta.converged)
        throw std::runtime_error("gaussian_delta_k: fixed point failed at eta");

    TypeFractions tf = type_fractions(d);
    auto q = tf.q_double();

    auto logdet_pair = [&](const TreeBall& ball) {
        ProjectionBasis pb = pi_basis(ball, lambda);
        Eigen::MatrixXd S0 =
            pb.chi.transpose() * ball_greens(d, cont->limit, ball).imG * pb.chi;
        Eigen::MatrixXd M = pb.chi.transpose() * ball_greens(d, cg_eta, ball).imG * pb.chi;
        auto logdet = [](const Eigen::MatrixXd& A) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
            double ld = 0.0;
            for (int i = 0; i < es.eigenvalues().size(); ++i) {
                if (es.eigenvalues()(i) <= 0.0)
                    throw std::runtime_error("gaussian_delta_k: singular projected matrix");
                ld += std::log(es.eigenvalues()(i));
            }
            return ld;
        };
        struct {
            double ld0, ldm;
            int m;
        } out{logdet(S0), logdet(M), static_cast<int>(pb.chi.cols())};
        return out;
    };

    GaussianDeltaReport rep;
    rep.eta = eta;
    rep.k = k;
    const double log2pie = std::log(2.0 * M_PI * M_E);
    for (int t = 0; t < d.k; ++t) {
        TreeBall star = build_ball(d, BallShape::ball_of_star(t, k));
        auto s = logdet_pair(star);
        rep.delta_eta += q[t] * 0.5 * (s.ld0 - s.ldm);
        rep.delta_direct += q[t] * (0.5 * s.m * log2pie + 0.5 * s.ld0);
        rep.boundary_combo += q[t] * s.m;
        for (int j = 0; j < d.k; ++j) {
            if (d(t, j) == 0) continue;
            TreeBall edge = build_ball(d, BallShape::ball_of_edge(t, j, k));
            auto e = logdet_pair(edge);
            double w = q[t] * static_cast<double>(d(t, j));
            rep.delta_eta -= 0.25 * w * (e.ld0 - e.ldm);
            rep.delta_direct -= 0.5 * w * (0.5 * e.m * log2pie + 0.5 * e.ld0);
            rep.boundary_combo -= 0.5 * w * e.m;
        }
    }
    return rep;
}

}  // namespace conewave
