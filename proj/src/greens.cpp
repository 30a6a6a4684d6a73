#include "conewave/greens.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/LU>

#include "conewave/finite_tree.hpp"

namespace conewave {

namespace {

// Directed support edges (i, j) with d(i,j) > 0, in row-major order.
std::vector<std::pair<int, int>> support_edges(const DegreeMatrix& d) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < d.k; ++i)
        for (int j = 0; j < d.k; ++j)
            if (d(i, j) > 0) e.emplace_back(i, j);
    return e;
}

// One application of the cone map F(g)_ij = 1/(-z - sum_l c_ijl g_jl).
void apply_map(const DegreeMatrix& d, const std::vector<std::pair<int, int>>& edges, Complex z,
               const std::vector<Complex>& g, std::vector<Complex>& out) {
    const int k = d.k;
    for (auto [i, j] : edges) {
        Complex acc = -z;
        for (int l = 0; l < k; ++l) {
            long long c = d(j, l) - (l == i ? 1 : 0);
            if (c > 0) acc -= static_cast<double>(c) * g[static_cast<size_t>(j) * k + l];
        }
        out[static_cast<size_t>(i) * k + j] = 1.0 / acc;
    }
}

double residual_of(const std::vector<std::pair<int, int>>& edges, int k,
                   const std::vector<Complex>& g, const std::vector<Complex>& fg) {
    double r = 0.0;
    for (auto [i, j] : edges)
        r = std::max(r, std::abs(g[static_cast<size_t>(i) * k + j] -
                                 fg[static_cast<size_t>(i) * k + j]));
    return r;
}

void fill_root_diag(const DegreeMatrix& d, Complex z, ConeGreens& cg) {
    cg.root_diag.resize(d.k);
    for (int t = 0; t < d.k; ++t) {
        Complex acc = -z;
        for (int l = 0; l < d.k; ++l)
            if (d(t, l) > 0) acc -= static_cast<double>(d(t, l)) * cg.gval(t, l);
        cg.root_diag[t] = 1.0 / acc;
    }
}

}  // namespace

ConeGreens solve_fixed_point(const DegreeMatrix& d, Complex z, const SolveOptions& opts,
                             const ConeGreens* warm) {
    const int k = d.k;
    auto edges = support_edges(d);
    ConeGreens cg;
    cg.z = z;
    cg.k = k;
    cg.g.assign(static_cast<size_t>(k) * k, Complex(0, 0));
    if (warm && warm->k == k)
        cg.g = warm->g;
    else
        for (auto [i, j] : edges) cg.g[static_cast<size_t>(i) * k + j] = 1.0 / (-z);

    std::vector<Complex> fg(cg.g.size());
    // Damped sweep; contraction is strong away from the real axis.
    int it = 0;
    double res = 0.0;
    for (; it < opts.max_damped; ++it) {
        apply_map(d, edges, z, cg.g, fg);
        res = residual_of(edges, k, cg.g, fg);
        for (auto [i, j] : edges) {
            size_t idx = static_cast<size_t>(i) * k + j;
            cg.g[idx] = (1.0 - opts.damping) * cg.g[idx] + opts.damping * fg[idx];
        }
        if (res < opts.tol) break;
        // Hand over to Newton once the iterate is in the basin.
        if (it > 30 && res < 1e-2) break;
    }

    // Newton on R(g) = g - F(g); J = I - dF, dF[(ij),(jl)] = c_ijl F_ij^2.
    const int m = static_cast<int>(edges.size());
    std::vector<int> index(static_cast<size_t>(k) * k, -1);
    for (int e = 0; e < m; ++e)
        index[static_cast<size_t>(edges[e].first) * k + edges[e].second] = e;
    for (int nit = 0; nit < opts.max_newton; ++nit) {
        apply_map(d, edges, z, cg.g, fg);
        res = residual_of(edges, k, cg.g, fg);
        if (res < opts.tol) break;
        Eigen::MatrixXcd J = Eigen::MatrixXcd::Identity(m, m);
        Eigen::VectorXcd R(m);
        for (int e = 0; e < m; ++e) {
            auto [i, j] = edges[e];
            size_t idx = static_cast<size_t>(i) * k + j;
            R(e) = cg.g[idx] - fg[idx];
            Complex f2 = fg[idx] * fg[idx];
            for (int l = 0; l < k; ++l) {
                long long c = d(j, l) - (l == i ? 1 : 0);
                if (c <= 0) continue;
                int e2 = index[static_cast<size_t>(j) * k + l];
                J(e, e2) -= static_cast<double>(c) * f2;
            }
        }
        Eigen::VectorXcd step = J.partialPivLu().solve(R);
        // Backtrack if the step overshoots the basin.
        double scale = 1.0;
        std::vector<Complex> trial = cg.g;
        for (int bt = 0; bt < 30; ++bt) {
            for (int e = 0; e < m; ++e) {
                auto [i, j] = edges[e];
                trial[static_cast<size_t>(i) * k + j] =
                    cg.g[static_cast<size_t>(i) * k + j] - scale * step(e);
            }
            apply_map(d, edges, z, trial, fg);
            if (residual_of(edges, k, trial, fg) < res || scale < 1e-6) break;
            scale *= 0.5;
        }
        cg.g = trial;
        ++it;
    }
    apply_map(d, edges, z, cg.g, fg);
    cg.residual = residual_of(edges, k, cg.g, fg);
    cg.iterations = it;
    cg.converged = cg.residual < std::max(opts.tol, 1e-12);
    fill_root_diag(d, z, cg);
    return cg;
}

ContinuationResult continue_to_real_axis(const DegreeMatrix& d, double lambda,
                                         const ContinuationOptions& opts) {
    ContinuationResult out;
    std::vector<double> etas;
    for (double eta = opts.eta_start; eta >= opts.eta_min * (1.0 - 1e-12); eta *= opts.ratio)
        etas.push_back(eta);

    ConeGreens cur;
    std::vector<std::pair<double, ConeGreens>> trail;
    bool have = false;
    for (double eta : etas) {
        ConeGreens next = solve_fixed_point(d, Complex(lambda, eta), opts.solve,
                                            have ? &cur : nullptr);
        if (!next.converged) {
            out.converged = false;
            break;
        }
        double mx = 0.0;
        for (auto& v : next.g) mx = std::max(mx, std::abs(v));
        out.max_abs_g = std::max(out.max_abs_g, mx);
        cur = next;
        have = true;
        out.etas.push_back(eta);
        trail.emplace_back(eta, cur);
        if (mx > opts.blowup_threshold) {
            out.blowup = true;
            break;
        }
        if (trail.size() > 3) trail.erase(trail.begin());
    }
    out.converged = have && out.etas.size() == etas.size() && !out.blowup;
    if (!have) {
        out.last = ConeGreens{};
        out.last.k = d.k;
        return out;
    }
    out.last = cur;
    out.min_im_g = 1e300;
    const int k = d.k;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (d(i, j) > 0) out.min_im_g = std::min(out.min_im_g, cur.gval(i, j).imag());

    // Quadratic extrapolation in eta through the last three converged values.
    out.limit = cur;
    out.limit.z = Complex(lambda, 0.0);
    out.limit.extrapolated = true;
    if (trail.size() >= 3) {
        auto extrap = [&](auto getter) {
            double x0 = trail[0].first, x1 = trail[1].first, x2 = trail[2].first;
            Complex y0 = getter(trail[0].second), y1 = getter(trail[1].second),
                    y2 = getter(trail[2].second);
            // Lagrange at eta = 0.
            Complex l0 = y0 * (x1 * x2) / ((x0 - x1) * (x0 - x2));
            Complex l1 = y1 * (x0 * x2) / ((x1 - x0) * (x1 - x2));
            Complex l2 = y2 * (x0 * x1) / ((x2 - x0) * (x2 - x1));
            return l0 + l1 + l2;
        };
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                if (d(i, j) == 0) continue;
                size_t idx = static_cast<size_t>(i) * k + j;
                out.limit.g[idx] = extrap([idx](const ConeGreens& c) { return c.g[idx]; });
            }
        for (int t = 0; t < k; ++t)
            out.limit.root_diag[t] =
                extrap([t](const ConeGreens& c) { return c.root_diag[t]; });
    }
    return out;
}

BallGreens ball_greens(const DegreeMatrix& d, const ConeGreens& cg, const TreeBall& ball) {
    const int n = ball.size();
    BallGreens bg;
    bg.z = cg.z;
    bg.G.resize(n, n);
    for (int x = 0; x < n; ++x) bg.G(x, x) = cg.root_diag[ball.types[x]];
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (x == y) continue;
            auto pth = ball.path(x, y);
            Complex val = bg.G(x, x);
            for (size_t m = 1; m < pth.size(); ++m)
                val *= -cg.gval(ball.types[pth[m - 1]], ball.types[pth[m]]);
            bg.G(x, y) = val;
        }
    bg.symmetry_error = (bg.G - bg.G.transpose()).cwiseAbs().maxCoeff();
    bg.imG = bg.G.imag();
    bg.imG = 0.5 * (bg.imG + bg.imG.transpose()).eval();
    return bg;
}

Complex stieltjes_value(const DegreeMatrix& d, const ConeGreens& cg) {
    auto q = type_fractions(d).q_double();
    Complex m(0, 0);
    for (int t = 0; t < d.k; ++t) m += q[t] * cg.root_diag[t];
    return m;
}

SpectralScan spectral_scan(const DegreeMatrix& d, const std::vector<double>& grid,
                           const ScanThresholds& th, const ContinuationOptions& copts) {
    SpectralScan scan;
    scan.points.reserve(grid.size());
    for (double lambda : grid) {
        ContinuationResult cont = continue_to_real_axis(d, lambda, copts);
        ScanPoint p;
        p.lambda = lambda;
        p.converged = cont.converged;
        p.max_abs_g = cont.max_abs_g;
        p.min_im_g = cont.min_im_g;
        if (cont.converged) {
            p.m = stieltjes_value(d, cont.limit);
            p.rho = std::max(0.0, p.m.imag()) / M_PI;
        }
        bool inside = p.m.imag() > th.density_floor;
        if (!cont.converged || cont.blowup || cont.max_abs_g > th.blowup ||
            (inside && p.min_im_g < th.im_collapse))
            p.flag = ScanFlag::Suspect;
        else if (inside)
            p.flag = ScanFlag::Regular;
        else
            p.flag = ScanFlag::Outside;
        if (p.flag == ScanFlag::Suspect) scan.suspects.push_back(lambda);
        scan.points.push_back(p);
    }
    for (size_t i = 0; i + 1 < scan.points.size(); ++i) {
        double h = scan.points[i + 1].lambda - scan.points[i].lambda;
        scan.integral_rho += 0.5 * h * (scan.points[i].rho + scan.points[i + 1].rho);
    }
    return scan;
}

double IdentitySuiteReport::max_dense() const {
    return std::max({dense_schur, dense_walk, dense_factor, dense_ward, dense_reexpansion});
}

namespace {

// Resolvent of a dense symmetric matrix.
Eigen::MatrixXcd resolvent(const Eigen::MatrixXd& A, Complex z) {
    const int n = static_cast<int>(A.rows());
    Eigen::MatrixXcd M = A.cast<Complex>();
    for (int i = 0; i < n; ++i) M(i, i) -= z;
    return M.partialPivLu().inverse();
}

Eigen::MatrixXcd resolvent_minor(const Eigen::MatrixXd& A, Complex z,
                                 const std::vector<int>& removed) {
    const int n = static_cast<int>(A.rows());
    std::vector<int> keep;
    std::vector<char> gone(n, 0);
    for (int r : removed) gone[r] = 1;
    for (int i = 0; i < n; ++i)
        if (!gone[i]) keep.push_back(i);
    Eigen::MatrixXd B(keep.size(), keep.size());
    for (size_t a = 0; a < keep.size(); ++a)
        for (size_t b = 0; b < keep.size(); ++b) B(a, b) = A(keep[a], keep[b]);
    Eigen::MatrixXcd Gm = resolvent(B, z);
    // Re-embed with removed rows/cols zeroed for index stability.
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    for (size_t a = 0; a < keep.size(); ++a)
        for (size_t b = 0; b < keep.size(); ++b) out(keep[a], keep[b]) = Gm(a, b);
    return out;
}

}  // namespace

IdentitySuiteReport identity_suite(const DegreeMatrix& d, Complex z,
                                   const IdentitySuiteOptions& opts) {
    IdentitySuiteReport rep;
    const double eta = z.imag();
    if (eta <= 0) throw std::invalid_argument("identity_suite: needs Im z > 0");

    // --- Part A: raw dense resolvent of a small truncated tree. ---
    int depth = depth_for_budget(d, 0, opts.dense_vertex_budget);
    DenseTruncatedTree tt = dense_truncated_tree(d, 0, depth);
    const Eigen::MatrixXd& A = tt.adjacency;
    const int n = tt.tree.size();
    Eigen::MatrixXcd G = resolvent(A, z);

    // Schur complement on a few index subsets T:
    //   G|_T = (A|_T - z - A|_{T,T^c} G^{(T)} A|_{T^c,T})^{-1}
    {
        std::vector<std::vector<int>> subsets;
        std::vector<int> ball1;
        for (int v = 0; v < n; ++v)
            if (tt.tree.depth[v] <= 1) ball1.push_back(v);
        subsets.push_back(ball1);
        subsets.push_back({0});
        subsets.push_back({1, 2});
        for (const auto& T : subsets) {
            Eigen::MatrixXcd GT = resolvent_minor(A, z, T);  // G^{(T)} embedded
            const int m = static_cast<int>(T.size());
            Eigen::MatrixXcd S(m, m);
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) {
                    Complex acc = A(T[a], T[b]);
                    if (a == b) acc -= z;
                    for (int u = 0; u < n; ++u)
                        for (int v = 0; v < n; ++v)
                            acc -= A(T[a], u) * GT(u, v) * A(v, T[b]);
                    S(a, b) = acc;
                }
            Eigen::MatrixXcd lhs = S.partialPivLu().inverse();
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b)
                    rep.dense_schur =
                        std::max(rep.dense_schur, std::abs(lhs(a, b) - G(T[a], T[b])));
        }
    }

    // Walk decomposition, factor formula and the re-expansion need minors G^{(x)}.
    {
        int x = 0;
        Eigen::MatrixXcd Gx = resolvent_minor(A, z, {x});
        for (int y = 1; y < std::min(n, 12); ++y)
            for (int w = 1; w < std::min(n, 12); ++w) {
                if (y == x || w == x) continue;
                Complex rhs = G(y, w) - G(y, x) * G(x, w) / G(x, x);
                rep.dense_walk = std::max(rep.dense_walk, std::abs(Gx(y, w) - rhs));
            }
        for (int y = 1; y < std::min(n, 12); ++y) {
            Complex acc(0, 0);
            for (int w = 0; w < n; ++w)
                if (w != x && A(x, w) != 0.0) acc += A(x, w) * Gx(w, y);
            rep.dense_factor = std::max(rep.dense_factor, std::abs(G(x, y) + G(x, x) * acc));
        }
        // Re-expansion: G^{(i)}_ov = -sum_{x~o, x!=i} G^{(i)}_oo G^{(o)}_xv.
        int o = 0;
        int i = tt.tree.children[o].front();
        Eigen::MatrixXcd Gi = resolvent_minor(A, z, {i});
        Eigen::MatrixXcd Go = resolvent_minor(A, z, {o});
        for (int v = 0; v < std::min(n, 24); ++v) {
            if (v == o || v == i) continue;
            Complex acc(0, 0);
            for (int xx : tt.tree.children[o])
                if (xx != i) acc += Gi(o, o) * Go(xx, v);
            rep.dense_reexpansion =
                std::max(rep.dense_reexpansion, std::abs(Gi(o, v) + acc));
        }
    }

    // Ward identity on the finite matrix: eta * sum_y |G_xy|^2 = Im G_xx.
    for (int x = 0; x < std::min(n, 8); ++x) {
        double s = 0.0;
        for (int y = 0; y < n; ++y) s += std::norm(G(x, y));
        rep.dense_ward = std::max(rep.dense_ward, std::abs(eta * s - G(x, x).imag()));
    }

    // --- Part B: cone-derived values against a deep truncation. ---
    ConeGreens cg = solve_fixed_point(d, z);
    FiniteTreeOracle deep(d, oracle_depth_for(eta, opts.deep_depth), z);
    TreeBall ball = build_ball(d, BallShape::vertex_ball(0, opts.ball_radius));
    BallGreens bg = ball_greens(d, cg, ball);
    Eigen::MatrixXcd Gdeep = deep.ball_matrix(ball);
    rep.cone_vs_dense_ball = (bg.G - Gdeep).cwiseAbs().maxCoeff();

    // Walk decomposition relating cone values to full entries: nontrivial for
    // the fixed point because the right side mixes root diagonals with path
    // products while the left side is a bare cone value.
    {
        int o = 0;
        int c1 = ball.children[o].front();
        int c2 = ball.children[c1].empty() ? -1 : ball.children[c1].front();
        if (c2 >= 0) {
            Complex gco = cg.gval(ball.types[o], ball.types[c1]) *
                          -cg.gval(ball.types[c1], ball.types[c2]);  // G^{(o)}_{c1 c2}
            Complex rhs = bg.G(c1, c2) - bg.G(c1, o) * bg.G(o, c2) / bg.G(o, o);
            rep.cone_walk = std::abs(gco - rhs);
            // Diagonal flavor at the other orientation:
            // G^{(c1)}_{oo} = G_oo - G_oc1^2 / G_c1c1.
            Complex lhs2 = cg.gval(ball.types[c1], ball.types[o]);
            Complex rhs2 = bg.G(o, o) - bg.G(o, c1) * bg.G(c1, o) / bg.G(c1, c1);
            rep.cone_factor = std::abs(lhs2 - rhs2);
            // Re-expansion with the infinite-tree left side and the deep
            // truncation's right side (cross-oracle, truncation-level error):
            // G^{(i)}_{o c2} = -sum_{x~o, x != i} G^{(i)}_oo G^{(o)}_{x c2}.
            if (ball.children[o].size() >= 2) {
                int i2 = ball.children[o][1];
                Complex lhs3 = cg.gval(ball.types[i2], ball.types[o]) *
                               -cg.gval(ball.types[o], ball.types[c1]) *
                               -cg.gval(ball.types[c1], ball.types[c2]);
                // Deep-oracle version of the right side: removing the type-t(i2)
                // child reduces the root slot count by one.
                Complex acc = -z;
                for (int l = 0; l < d.k; ++l) {
                    long long c = d(ball.types[o], l) - (l == ball.types[i2] ? 1 : 0);
                    if (c > 0) acc -= static_cast<double>(c) * deep.g(0, ball.types[o], l);
                }
                Complex gi_oo_deep = 1.0 / acc;
                Complex go_c1c2_deep = deep.g(0, ball.types[o], ball.types[c1]) *
                                       -deep.g(1, ball.types[c1], ball.types[c2]);
                rep.cone_reexpansion = std::abs(lhs3 + gi_oo_deep * go_c1c2_deep);
            }
        }
    }

    // Ward identity for the infinite tree via the cone mass recursion:
    //   sum_y |G_xy|^2 = Im G_xx / eta, the tail summed in closed form.
    {
        auto sigma2 = cone_ward_masses(d, cg);
        for (int t = 0; t < d.k; ++t) {
            double mass = std::norm(cg.root_diag[t]);
            for (int l = 0; l < d.k; ++l)
                if (d(t, l) > 0)
                    mass += static_cast<double>(d(t, l)) *
                            std::norm(cg.root_diag[t] * cg.gval(t, l)) *
                            sigma2[static_cast<size_t>(t) * d.k + l];
            rep.cone_ward =
                std::max(rep.cone_ward, std::abs(eta * mass - cg.root_diag[t].imag()));
        }
    }
    return rep;
}

std::vector<double> cone_ward_masses(const DegreeMatrix& d, const ConeGreens& cg) {
    auto edges = support_edges(d);
    const int m = static_cast<int>(edges.size());
    std::vector<int> index(static_cast<size_t>(d.k) * d.k, -1);
    for (int e = 0; e < m; ++e)
        index[static_cast<size_t>(edges[e].first) * d.k + edges[e].second] = e;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
    for (int e = 0; e < m; ++e) {
        auto [i, j] = edges[e];
        for (int l = 0; l < d.k; ++l) {
            long long c = d(j, l) - (l == i ? 1 : 0);
            if (c > 0)
                B(e, index[static_cast<size_t>(j) * d.k + l]) +=
                    static_cast<double>(c) * std::norm(cg.gval(j, l));
        }
    }
    Eigen::VectorXd sigma2 =
        (Eigen::MatrixXd::Identity(m, m) - B).lu().solve(Eigen::VectorXd::Ones(m));
    std::vector<double> out(static_cast<size_t>(d.k) * d.k, 0.0);
    for (int e = 0; e < m; ++e)
        out[static_cast<size_t>(edges[e].first) * d.k + edges[e].second] = sigma2(e);
    return out;
}

PathProduct path_coefficient_check(const DegreeMatrix& d, const ContinuationResult& cont,
                                   const std::vector<int>& type_path) {
    if (type_path.size() < 2 || type_path.front() != type_path.back())
        throw std::invalid_argument("path must return to its starting type");
    for (size_t m = 1; m < type_path.size(); ++m)
        if (d(type_path[m - 1], type_path[m]) == 0)
            throw std::invalid_argument("path uses a non-edge of the support");
    bool deg3 = false;
    for (int t : type_path)
        if (d.row_sum(t) >= 3) deg3 = true;
    if (!deg3) throw std::invalid_argument("path needs a vertex of degree >= 3");
    if (!cont.converged || cont.blowup)
        throw std::invalid_argument("lambda is a D_d suspect or continuation failed");
    Complex m = stieltjes_value(d, cont.limit);
    if (m.imag() <= 1e-8)
        throw std::invalid_argument("lambda outside the absolutely continuous spectrum");
    PathProduct out;
    out.product = 1.0;
    for (size_t s = 1; s < type_path.size(); ++s)
        out.product *= std::abs(cont.limit.gval(type_path[s - 1], type_path[s]));
    out.margin = 1.0 - out.product;
    return out;
}

double biregular_transfer_ratio(long long d1, long long d2, double lambda, int dist) {
    if (dist < 0) throw std::invalid_argument("distance must be nonnegative");
    if (dist == 0) return 1.0;
    // Sphere sums s_k = sum_{dist(v,o)=k} psi_v / psi_o obey the eigenvector
    // recurrence s_{k+1} = lambda s_k - c_k s_{k-1}, c_1 = d1 (root degree),
    // c_k = deg(level k-1) - 1 afterwards; level degrees alternate d1, d2.
    // The prediction for E[psi_o psi_i]/E[psi_o^2] at distance k is s_k/|S_k|.
    auto level_degree = [&](int lvl) { return lvl % 2 == 0 ? d1 : d2; };
    Eigen::Vector2d state(1.0, lambda);  // (s_{k-1}, s_k) starting at k = 1
    double sphere = static_cast<double>(d1);
    for (int k = 1; k < dist; ++k) {
        double c = (k == 1) ? static_cast<double>(d1)
                            : static_cast<double>(level_degree(k - 1) - 1);
        Eigen::Matrix2d T;
        T << 0.0, 1.0, -c, lambda;
        state = (T * state).eval();
        sphere *= static_cast<double>(level_degree(k) - 1);
    }
    return state(1) / sphere;
}

}  // namespace conewave
