#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "conewave/degmat.hpp"

namespace conewave {

// Cone determined by a directed edge: parent of type `parent_type`, cone root
// of type `vertex_type`.  child_counts[l] = d(vertex_type, l) - [l == parent_type].
struct ConeType {
    int parent_type = 0;
    int vertex_type = 0;
    std::vector<long long> child_counts;
    long long total_children() const {
        long long s = 0;
        for (long long c : child_counts) s += c;
        return s;
    }
};

// One ConeType per ordered pair with d(i,j) > 0.
std::vector<ConeType> cone_types(const DegreeMatrix& d);

// Finite truncations of the universal cover.  Two families cover all shapes
// used here:
//   VertexBall(t, r): ball of radius r around a type-t vertex.
//     r = 1 is the star C_o; B_k(C_o) is VertexBall(t, k+1).
//   EdgeBall(t1, t2, r): ball of radius r around an edge (o of type t1,
//     i of type t2).  r = 0 is the bare edge e_oi.
struct BallShape {
    enum class Kind { VertexBall, EdgeBall };
    Kind kind = Kind::VertexBall;
    int root_type = 0;
    int other_type = 0;  // EdgeBall only
    int radius = 0;

    static BallShape vertex_ball(int t, int r) { return {Kind::VertexBall, t, 0, r}; }
    static BallShape star(int t) { return vertex_ball(t, 1); }
    static BallShape ball_of_star(int t, int k) { return vertex_ball(t, k + 1); }
    static BallShape edge(int t1, int t2) { return {Kind::EdgeBall, t1, t2, 0}; }
    static BallShape ball_of_edge(int t1, int t2, int k) { return {Kind::EdgeBall, t1, t2, k}; }
};

// Canonical coordinates: vertices are stored in BFS order from the root set,
// children of each vertex grouped in increasing type order.  Two isomorphic
// balls therefore get identical orderings up to permutations of equal-type
// siblings, which is exactly the invariance of the target laws.
struct TreeBall {
    BallShape shape;
    std::vector<int> types;
    std::vector<int> parents;  // -1 for the primary root; for an edge ball vertex 1 has parent 0
    std::vector<std::vector<int>> children;
    std::vector<int> depth;     // distance to the root set
    std::vector<int> boundary;  // vertices adjacent to the rest of the infinite tree
    int size() const { return static_cast<int>(types.size()); }
    bool is_boundary(int v) const;
    std::vector<int> interior() const;
    // Tree neighbours inside the ball (parent + children).
    std::vector<int> neighbors(int v) const;
    // Vertex path between two ball vertices, endpoints included.
    std::vector<int> path(int x, int y) const;
};

// Throws std::invalid_argument for an edge shape with d(t1,t2) == 0.
TreeBall build_ball(const DegreeMatrix& d, BallShape shape);

// Extraction of a canonical tree ball from a finite graph around a root
// (or a root edge for edge shapes).  Returns nullopt when the neighborhood
// contains a cycle (including parallel edges and self-loops).  Sibling
// assignment among equal-type children is randomized by tie_break_seed.
struct LocalBall {
    TreeBall ball;
    std::vector<int> graph_vertex;  // ball index -> graph vertex
};

std::optional<LocalBall> local_ball_from_graph(const std::vector<std::vector<int>>& adj,
                                               const std::vector<int>& vertex_types,
                                               const DegreeMatrix& d, int root, BallShape shape,
                                               std::uint64_t tie_break_seed,
                                               int edge_neighbor = -1);

}  // namespace conewave
