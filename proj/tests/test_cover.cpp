#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "conewave/cover.hpp"
#include "conewave/degmat.hpp"
#include "conewave/graphgen.hpp"

using namespace conewave;

TEST_CASE("cone types of the regular tree") {
    auto cones = cone_types(regular_matrix(5));
    REQUIRE(cones.size() == 1);
    CHECK(cones[0].child_counts == std::vector<long long>{4});
}

TEST_CASE("cone types of biregular (3,2) follow c_l = d_jl - [l==i]") {
    auto cones = cone_types(biregular_matrix(3, 2));
    REQUIRE(cones.size() == 2);
    // (0,1): into a type-1 vertex (degree 2) from its type-0 neighbor.
    CHECK(cones[0].parent_type == 0);
    CHECK(cones[0].vertex_type == 1);
    CHECK(cones[0].child_counts == std::vector<long long>{1, 0});
    // (1,0): into a type-0 vertex (degree 3) from its type-1 neighbor.
    CHECK(cones[1].child_counts == std::vector<long long>{0, 2});
    for (auto& c : cones) CHECK(c.total_children() >= 1);
}

TEST_CASE("K4 has 12 cones with two children each") {
    auto cones = cone_types(k4_matrix());
    REQUIRE(cones.size() == 12);
    for (auto& c : cones) CHECK(c.total_children() == 2);
}

TEST_CASE("ball of radius 1 in the 5-regular tree") {
    TreeBall b = build_ball(regular_matrix(5), BallShape::vertex_ball(0, 1));
    CHECK(b.size() == 6);
    CHECK(b.boundary.size() == 5);
    // The star's boundary is its leaves: the center has no neighbor outside.
    TreeBall star = build_ball(regular_matrix(5), BallShape::star(0));
    CHECK(star.boundary.size() == 5);
    CHECK_FALSE(star.is_boundary(0));
}

TEST_CASE("ball growth matches the cone recursion") {
    // Biregular (3,2), root type 0: levels 1, 3, 3, 6, 6, 12...
    DegreeMatrix d = biregular_matrix(3, 2);
    TreeBall b2 = build_ball(d, BallShape::vertex_ball(0, 2));
    CHECK(b2.size() == 7);
    CHECK(b2.boundary.size() == 3);
    // n_{r+1} = sum over sphere r of (deg - 1)
    for (int r = 1; r <= 4; ++r) {
        TreeBall lo = build_ball(d, BallShape::vertex_ball(0, r));
        TreeBall hi = build_ball(d, BallShape::vertex_ball(0, r + 1));
        long long expected = 0;
        for (int v : lo.boundary) expected += d.row_sum(lo.types[v]) - 1;
        CHECK(static_cast<long long>(hi.boundary.size()) == expected);
    }
}

TEST_CASE("edge balls around both orientations") {
    DegreeMatrix d = biregular_matrix(3, 2);
    TreeBall e = build_ball(d, BallShape::edge(0, 1));
    CHECK(e.size() == 2);
    CHECK(e.boundary.size() == 2);
    TreeBall be = build_ball(d, BallShape::ball_of_edge(0, 1, 1));
    // o (deg 3) contributes 2 extra children, i (deg 2) contributes 1.
    CHECK(be.size() == 5);
    CHECK(be.boundary.size() == 3);
    CHECK_THROWS_AS(build_ball(d, BallShape::edge(0, 0)), std::invalid_argument);
}

TEST_CASE("boundary count identity for the star and edge balls") {
    // Pointwise for a single type; q-weighted over root types in general.
    DegreeMatrix d3 = regular_matrix(3);
    for (int k = 0; k <= 2; ++k) {
        TreeBall star = build_ball(d3, BallShape::ball_of_star(0, k));
        TreeBall edge = build_ball(d3, BallShape::ball_of_edge(0, 0, k));
        CHECK(2 * star.boundary.size() == 3 * edge.boundary.size());
    }
    DegreeMatrix d32 = biregular_matrix(3, 2);
    auto q = type_fractions(d32);
    for (int k = 0; k <= 2; ++k) {
        Rational star_side(0), edge_side(0);
        for (int t = 0; t < 2; ++t) {
            TreeBall star = build_ball(d32, BallShape::ball_of_star(t, k));
            star_side += q.q[t] * static_cast<long long>(star.boundary.size());
            for (int j = 0; j < 2; ++j) {
                if (d32(t, j) == 0) continue;
                TreeBall edge = build_ball(d32, BallShape::ball_of_edge(t, j, k));
                edge_side +=
                    q.q[t] * d32(t, j) * Rational(static_cast<long long>(edge.boundary.size()), 2);
            }
        }
        CHECK(star_side == edge_side);
    }
}

TEST_CASE("local ball extraction flags cycles") {
    // Triangle
    std::vector<std::vector<int>> adj{{1, 2}, {0, 2}, {0, 1}};
    std::vector<int> types{0, 0, 0};
    DegreeMatrix d(1, {2});  // placeholder, not used by the walker
    auto lb = local_ball_from_graph(adj, types, d, 0, BallShape::vertex_ball(0, 1), 7);
    CHECK_FALSE(lb.has_value());
    // Parallel edge
    std::vector<std::vector<int>> adj2{{1, 1}, {0, 0}};
    auto lb2 = local_ball_from_graph(adj2, {0, 0}, d, 0, BallShape::vertex_ball(0, 1), 7);
    CHECK_FALSE(lb2.has_value());
}

TEST_CASE("local ball extraction matches the canonical ball on trees") {
    // A finite piece of the 3-regular tree (depth 2 around vertex 0).
    DegreeMatrix d = regular_matrix(3);
    TreeBall proto = build_ball(d, BallShape::vertex_ball(0, 2));
    std::vector<std::vector<int>> adj(proto.size());
    for (int v = 0; v < proto.size(); ++v)
        if (proto.parents[v] >= 0) {
            adj[v].push_back(proto.parents[v]);
            adj[proto.parents[v]].push_back(v);
        }
    std::vector<int> types(proto.size(), 0);
    auto lb = local_ball_from_graph(adj, types, d, 0, BallShape::vertex_ball(0, 2), 11);
    REQUIRE(lb.has_value());
    CHECK(lb->ball.size() == proto.size());
    CHECK(lb->ball.types == proto.types);
    CHECK(lb->ball.parents == proto.parents);
    CHECK(lb->ball.boundary == proto.boundary);
}

TEST_CASE("cycle skip rate is small at desk scale") {
    DegreeMatrix d = biregular_matrix(3, 2);
    TypedGraph g = sample_graph(d, 1000, 4242);
    long long skipped = 0, total = 0;
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 400; ++trial) {
        int root = static_cast<int>(rng() % g.N);
        auto lb = local_ball_from_graph(g.adj, g.types, d, root,
                                        BallShape::vertex_ball(g.types[root], 2), rng());
        ++total;
        if (!lb) ++skipped;
    }
    CHECK(static_cast<double>(skipped) / static_cast<double>(total) < 0.05);
}

TEST_CASE("tree ball paths run through the common ancestor") {
    DegreeMatrix d = regular_matrix(3);
    TreeBall b = build_ball(d, BallShape::vertex_ball(0, 2));
    // two grandchildren under different children
    int c1 = b.children[0][0], c2 = b.children[0][1];
    int g1 = b.children[c1][0], g2 = b.children[c2][0];
    auto p = b.path(g1, g2);
    CHECK(p == std::vector<int>{g1, c1, 0, c2, g2});
}
