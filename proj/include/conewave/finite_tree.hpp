#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "conewave/cover.hpp"
#include "conewave/degmat.hpp"
#include "conewave/greens.hpp"

namespace conewave {

// Exact Green's function of the depth-D truncation of the universal cover,
// used as an independent oracle for the infinite-tree fixed point.  The
// truncated tree is type-regular, so its resolvent entries near the root
// depend only on types and depths: the leaf-up elimination collapses to a
// depth-indexed recursion
//   g_r(i,j) = ( -z - sum_l c_ijl g_{r+1}(j,l) )^{-1},  g_D = -1/z at the leaves,
// which is plain finite linear algebra (no fixed point, no iteration).
class FiniteTreeOracle {
  public:
    FiniteTreeOracle(const DegreeMatrix& d, int depth, Complex z);

    Complex z() const { return z_; }
    int depth() const { return depth_; }

    // Cone value at tree depth r: vertex at depth r+1 ... parent at depth r.
    // g(r, i, j) is the Green's entry of a type-j vertex at depth r+1 with its
    // depth-r, type-i parent removed.
    Complex g(int r, int parent_type, int vertex_type) const;

    // Diagonal entry at the root of the truncated tree.
    Complex root_diag(int root_type) const;

    // Green's entries between ball vertices near the root, via depth-aware
    // path products (exact identities of the finite matrix, validated against
    // direct inversion in the tests).  The ball must be a vertex ball.
    Eigen::MatrixXcd ball_matrix(const TreeBall& ball) const;

    // Stieltjes transform at the root, q-weighted over root types.
    Complex stieltjes(const DegreeMatrix& d) const;

  private:
    DegreeMatrix d_;
    int depth_;
    Complex z_;
    std::vector<std::vector<Complex>> g_;  // g_[r][i*k+j], r = 0..depth-1
    std::vector<Complex> root_diag_;
    Complex diag_at(int type, int depth, int parent_type) const;
};

// Dense adjacency of the depth-D truncated tree together with the vertex
// bookkeeping needed to compare against FiniteTreeOracle and to evaluate
// identities on a raw resolvent.
struct DenseTruncatedTree {
    TreeBall tree;  // vertex ball of radius D
    Eigen::MatrixXd adjacency;
};

DenseTruncatedTree dense_truncated_tree(const DegreeMatrix& d, int root_type, int depth);

// Largest depth whose truncated tree has at most `vertex_budget` vertices.
int depth_for_budget(const DegreeMatrix& d, int root_type, int vertex_budget);

// Depth needed for the truncation transient to damp out at spectral width
// eta.  Inside the band the leaf boundary condition relaxes like
// (1 - c*eta)^depth, so the depth must scale like 1/eta.
int oracle_depth_for(double eta, int floor_depth = 24, int cap = 400000);

}  // namespace conewave
