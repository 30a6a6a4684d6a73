#include "conewave/finite_tree.hpp"

#include <algorithm>
#include <stdexcept>

namespace conewave {

FiniteTreeOracle::FiniteTreeOracle(const DegreeMatrix& d, int depth, Complex z)
    : d_(d), depth_(depth), z_(z) {
    const int k = d.k;
    g_.assign(depth, std::vector<Complex>(static_cast<size_t>(k) * k, Complex(0, 0)));
    // Leaves at depth D have no children: g_{D-1 -> D} = -1/z.
    for (int r = depth - 1; r >= 0; --r) {
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                if (d(i, j) == 0) continue;
                Complex acc = -z;
                if (r + 1 < depth) {
                    for (int l = 0; l < k; ++l) {
                        long long c = d(j, l) - (l == i ? 1 : 0);
                        if (c > 0) acc -= static_cast<double>(c) * g_[r + 1][static_cast<size_t>(j) * k + l];
                    }
                }
                g_[r][static_cast<size_t>(i) * k + j] = 1.0 / acc;
            }
    }
    root_diag_.resize(k);
    for (int t = 0; t < k; ++t) root_diag_[t] = diag_at(t, 0, -1);
}

Complex FiniteTreeOracle::g(int r, int parent_type, int vertex_type) const {
    return g_[r][static_cast<size_t>(parent_type) * d_.k + vertex_type];
}

Complex FiniteTreeOracle::diag_at(int type, int depth, int parent_type) const {
    // Full diagonal entry of a vertex at the given depth: the cone toward the
    // parent is the whole rest of the tree, so this helper is only exact for
    // the root (parent_type < 0).  It is all the ball_matrix needs.
    if (parent_type >= 0) throw std::logic_error("diag_at: only root diagonals supported");
    Complex acc = -z_;
    if (depth < depth_)
        for (int l = 0; l < d_.k; ++l)
            if (d_(type, l) > 0)
                acc -= static_cast<double>(d_(type, l)) * g_[depth][static_cast<size_t>(type) * d_.k + l];
    return 1.0 / acc;
}

Complex FiniteTreeOracle::root_diag(int root_type) const { return root_diag_[root_type]; }

Eigen::MatrixXcd FiniteTreeOracle::ball_matrix(const TreeBall& ball) const {
    if (ball.shape.kind != BallShape::Kind::VertexBall)
        throw std::invalid_argument("ball_matrix: vertex balls only");
    if (ball.shape.radius >= depth_)
        throw std::invalid_argument("ball_matrix: ball deeper than the truncated tree");
    const int n = ball.size();
    const int k = d_.k;
    // Downward cone of a child c (parent at depth[c]-1).
    auto down = [&](int parent, int c) {
        return g_[ball.depth[c] - 1][static_cast<size_t>(ball.types[parent]) * k + ball.types[c]];
    };
    // up[v]: Green's entry at v's parent with v removed.  The parent's other
    // neighbors are its remaining tree children plus its own upward cone.
    std::vector<Complex> up(n, Complex(0, 0));
    for (int v = 0; v < n; ++v) {
        if (ball.parents[v] < 0) continue;
        int p = ball.parents[v];
        Complex acc = -z_;
        for (int c : ball.children[p])
            if (c != v) acc -= down(p, c);
        if (ball.parents[p] >= 0) acc -= up[p];
        up[v] = 1.0 / acc;
    }
    Eigen::MatrixXcd G(n, n);
    for (int x = 0; x < n; ++x) {
        int t = ball.types[x];
        int ptype = ball.parents[x] >= 0 ? ball.types[ball.parents[x]] : -1;
        Complex acc = -z_;
        // All tree children, whether or not the ball contains them: the slot
        // counts are forced by the types, the values by the vertex depth.
        for (int l = 0; l < k; ++l) {
            long long c = d_(t, l) - (l == ptype ? 1 : 0);
            if (c > 0)
                acc -= static_cast<double>(c) *
                       g_[ball.depth[x]][static_cast<size_t>(t) * k + l];
        }
        if (ball.parents[x] >= 0) acc -= up[x];
        G(x, x) = 1.0 / acc;
    }
    // Off-diagonal entries via the walk factorization G_xy = G_xx * prod(-g_step):
    // each step multiplies by the cone entry of the far vertex with the near
    // vertex removed (down() for descending steps, up[] for ascending ones).
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (x == y) continue;
            auto pth = ball.path(x, y);
            Complex val = G(x, x);
            for (size_t m = 1; m < pth.size(); ++m) {
                int a = pth[m - 1], b = pth[m];
                Complex step = (ball.parents[b] == a) ? down(a, b) : up[a];
                val *= -step;
            }
            G(x, y) = val;
        }
    return G;
}

Complex FiniteTreeOracle::stieltjes(const DegreeMatrix& d) const {
    TypeFractions tf = type_fractions(d);
    auto q = tf.q_double();
    Complex m(0, 0);
    for (int t = 0; t < d.k; ++t) m += q[t] * root_diag_[t];
    return m;
}

DenseTruncatedTree dense_truncated_tree(const DegreeMatrix& d, int root_type, int depth) {
    DenseTruncatedTree out;
    out.tree = build_ball(d, BallShape::vertex_ball(root_type, depth));
    const int n = out.tree.size();
    out.adjacency = Eigen::MatrixXd::Zero(n, n);
    for (int v = 0; v < n; ++v)
        if (out.tree.parents[v] >= 0) {
            out.adjacency(v, out.tree.parents[v]) = 1.0;
            out.adjacency(out.tree.parents[v], v) = 1.0;
        }
    return out;
}

int oracle_depth_for(double eta, int floor_depth, int cap) {
    if (eta <= 0) return cap;
    double needed = 24.0 / eta;
    if (needed > static_cast<double>(cap)) return cap;
    return std::max(floor_depth, static_cast<int>(needed) + 1);
}

int depth_for_budget(const DegreeMatrix& d, int root_type, int vertex_budget) {
    int depth = 0;
    long long total = 1;
    // Frontier counts per (parent_type, vertex_type) cone.
    std::vector<long long> frontier(static_cast<size_t>(d.k) * d.k, 0);
    bool first = true;
    while (true) {
        std::vector<long long> next(static_cast<size_t>(d.k) * d.k, 0);
        long long added = 0;
        if (first) {
            for (int l = 0; l < d.k; ++l)
                if (d(root_type, l) > 0) {
                    next[static_cast<size_t>(root_type) * d.k + l] += d(root_type, l);
                    added += d(root_type, l);
                }
            first = false;
        } else {
            for (int i = 0; i < d.k; ++i)
                for (int j = 0; j < d.k; ++j) {
                    long long cnt = frontier[static_cast<size_t>(i) * d.k + j];
                    if (cnt == 0) continue;
                    for (int l = 0; l < d.k; ++l) {
                        long long c = d(j, l) - (l == i ? 1 : 0);
                        if (c > 0) {
                            next[static_cast<size_t>(j) * d.k + l] += cnt * c;
                            added += cnt * c;
                        }
                    }
                }
        }
        if (total + added > vertex_budget || added == 0) break;
        total += added;
        frontier = std::move(next);
        ++depth;
    }
    return depth;
}

}  // namespace conewave
