#include "conewave/cover.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "conewave/seeds.hpp"

namespace conewave {

std::vector<ConeType> cone_types(const DegreeMatrix& d) {
    std::vector<ConeType> out;
    for (int i = 0; i < d.k; ++i)
        for (int j = 0; j < d.k; ++j) {
            if (d(i, j) == 0) continue;
            ConeType ct;
            ct.parent_type = i;
            ct.vertex_type = j;
            ct.child_counts.resize(d.k);
            for (int l = 0; l < d.k; ++l) ct.child_counts[l] = d(j, l) - (l == i ? 1 : 0);
            out.push_back(std::move(ct));
        }
    return out;
}

bool TreeBall::is_boundary(int v) const { return depth[v] == shape.radius; }

std::vector<int> TreeBall::interior() const {
    std::vector<int> out;
    for (int v = 0; v < size(); ++v)
        if (!is_boundary(v)) out.push_back(v);
    return out;
}

std::vector<int> TreeBall::neighbors(int v) const {
    std::vector<int> out;
    if (parents[v] >= 0) out.push_back(parents[v]);
    for (int c : children[v]) out.push_back(c);
    return out;
}

std::vector<int> TreeBall::path(int x, int y) const {
    std::vector<int> up_x{x}, up_y{y};
    auto ancestors = [&](std::vector<int>& chain) {
        while (parents[chain.back()] >= 0) chain.push_back(parents[chain.back()]);
    };
    ancestors(up_x);
    ancestors(up_y);
    // Trim the common tail above the LCA.
    while (up_x.size() > 1 && up_y.size() > 1 &&
           up_x[up_x.size() - 2] == up_y[up_y.size() - 2]) {
        up_x.pop_back();
        up_y.pop_back();
    }
    if (up_x.back() != up_y.back()) {
        // Different root chains can only meet through the edge 0-1 of an edge ball.
        // parents[] already links them, so this cannot happen.
        throw std::logic_error("TreeBall::path: disconnected vertices");
    }
    std::vector<int> out(up_x.begin(), up_x.end());
    for (auto it = up_y.rbegin() + 1; it != up_y.rend(); ++it) out.push_back(*it);
    return out;
}

namespace {

struct PendingChild {
    int parent;  // ball index
    int type;
};

// Child type slots for a vertex of type `t` entered from `parent_type`
// (parent_type < 0 for a root with no excluded neighbor).
std::vector<int> child_slots(const DegreeMatrix& d, int t, int parent_type) {
    std::vector<int> slots;
    for (int l = 0; l < d.k; ++l) {
        long long c = d(t, l) - (l == parent_type ? 1 : 0);
        for (long long m = 0; m < c; ++m) slots.push_back(l);
    }
    return slots;
}

}  // namespace

TreeBall build_ball(const DegreeMatrix& d, BallShape shape) {
    TreeBall b;
    b.shape = shape;
    auto add_vertex = [&b](int type, int parent, int dep) {
        b.types.push_back(type);
        b.parents.push_back(parent);
        b.children.emplace_back();
        b.depth.push_back(dep);
        if (parent >= 0) b.children[parent].push_back(static_cast<int>(b.types.size()) - 1);
        return static_cast<int>(b.types.size()) - 1;
    };

    std::vector<int> frontier;
    if (shape.kind == BallShape::Kind::VertexBall) {
        frontier.push_back(add_vertex(shape.root_type, -1, 0));
    } else {
        if (d(shape.root_type, shape.other_type) == 0)
            throw std::invalid_argument("build_ball: no edge between requested types");
        int o = add_vertex(shape.root_type, -1, 0);
        int i = add_vertex(shape.other_type, o, 0);
        frontier = {o, i};
    }

    // Level-by-level growth; children of each vertex in increasing type order.
    for (int level = 0; level < shape.radius; ++level) {
        std::vector<int> next;
        for (int v : frontier) {
            int excluded;
            if (b.parents[v] >= 0)
                excluded = b.types[b.parents[v]];
            else if (shape.kind == BallShape::Kind::EdgeBall)
                excluded = b.types[1 - v];  // roots 0 and 1 exclude each other
            else
                excluded = -1;
            for (int t : child_slots(d, b.types[v], excluded))
                next.push_back(add_vertex(t, v, level + 1));
        }
        frontier = std::move(next);
    }

    for (int v = 0; v < b.size(); ++v)
        if (b.depth[v] == shape.radius) b.boundary.push_back(v);
    return b;
}

std::optional<LocalBall> local_ball_from_graph(const std::vector<std::vector<int>>& adj,
                                               const std::vector<int>& vertex_types,
                                               const DegreeMatrix& d, int root, BallShape shape,
                                               std::uint64_t tie_break_seed, int edge_neighbor) {
    std::mt19937_64 rng(splitmix64(tie_break_seed));
    LocalBall out;
    TreeBall& b = out.ball;
    b.shape = shape;
    shape.root_type = vertex_types[root];

    std::vector<char> visited(adj.size(), 0);
    auto add_vertex = [&](int gv, int parent, int dep) {
        b.types.push_back(vertex_types[gv]);
        b.parents.push_back(parent);
        b.children.emplace_back();
        b.depth.push_back(dep);
        out.graph_vertex.push_back(gv);
        if (parent >= 0) b.children[parent].push_back(static_cast<int>(b.types.size()) - 1);
        visited[gv] = 1;
        return static_cast<int>(b.types.size()) - 1;
    };

    std::vector<int> frontier;
    if (shape.kind == BallShape::Kind::VertexBall) {
        b.shape.root_type = vertex_types[root];
        frontier.push_back(add_vertex(root, -1, 0));
    } else {
        if (edge_neighbor < 0) throw std::invalid_argument("edge shape needs a neighbor");
        b.shape.root_type = vertex_types[root];
        b.shape.other_type = vertex_types[edge_neighbor];
        int o = add_vertex(root, -1, 0);
        add_vertex(edge_neighbor, o, 0);
        frontier = {o, 1};
    }

    for (int level = 0; level < shape.radius; ++level) {
        std::vector<int> next;
        for (int v : frontier) {
            int gv = out.graph_vertex[v];
            // Graph children: all neighbors minus one copy of the parent edge.
            std::vector<int> gchildren(adj[gv].begin(), adj[gv].end());
            int parent_gv = -1;
            if (b.parents[v] >= 0)
                parent_gv = out.graph_vertex[b.parents[v]];
            else if (shape.kind == BallShape::Kind::EdgeBall)
                parent_gv = out.graph_vertex[1 - v];
            if (parent_gv >= 0) {
                auto it = std::find(gchildren.begin(), gchildren.end(), parent_gv);
                if (it == gchildren.end()) throw std::logic_error("parent edge missing");
                gchildren.erase(it);
            }
            // Any revisit (cross edge, parallel edge, loop) means a cycle.
            for (int c : gchildren)
                if (visited[c]) return std::nullopt;
            {
                auto sorted = gchildren;
                std::sort(sorted.begin(), sorted.end());
                if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                    return std::nullopt;  // parallel edges below
            }
            // Randomized order within equal-type groups, groups in type order.
            std::shuffle(gchildren.begin(), gchildren.end(), rng);
            std::stable_sort(gchildren.begin(), gchildren.end(),
                             [&](int a, int c) { return vertex_types[a] < vertex_types[c]; });
            for (int c : gchildren) next.push_back(add_vertex(c, v, level + 1));
        }
        frontier = std::move(next);
    }

    for (int v = 0; v < b.size(); ++v)
        if (b.depth[v] == shape.radius) b.boundary.push_back(v);

    // The induced subgraph must be exactly the BFS tree: any extra edge inside
    // the ball (frontier-frontier edges, parallel edges, loops) is a cycle.
    for (int v = 0; v < b.size(); ++v) {
        int gv = out.graph_vertex[v];
        long long inside = 0;
        for (int w : adj[gv]) inside += visited[w] ? 1 : 0;
        long long tree_deg = static_cast<long long>(b.children[v].size());
        if (b.parents[v] >= 0) ++tree_deg;
        if (inside != tree_deg) return std::nullopt;
    }

    // Shape consistency against the degree matrix (types must force the counts).
    (void)d;
    return out;
}

}  // namespace conewave
