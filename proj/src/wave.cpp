#include "conewave/wave.hpp"

#include <algorithm>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "conewave/stats.hpp"

namespace conewave {

WaveModel wave_covariance(const DegreeMatrix& d, double lambda, const TreeBall& ball,
                          const ContinuationResult* precomputed) {
    ContinuationResult local;
    const ContinuationResult* cont = precomputed;
    if (!cont) {
        local = continue_to_real_axis(d, lambda);
        cont = &local;
    }
    if (!cont->converged || cont->blowup)
        throw std::invalid_argument("wave_covariance: lambda is a D_d suspect");

    WaveModel wm;
    wm.ball = ball;
    wm.lambda = lambda;
    wm.var_im_m = stieltjes_value(d, cont->limit).imag();
    BallGreens bg = ball_greens(d, cont->limit, ball);
    wm.sigma_raw = bg.imG;

    // The constraint vectors are exact null directions of the limit; project
    // them out so factor samples satisfy the eigenvector equation to rounding
    // rather than to extrapolation accuracy.
    ProjectionBasis pb = pi_basis(ball, lambda);
    Eigen::MatrixXd projected = pb.chi.transpose() * wm.sigma_raw * pb.chi;
    projected = 0.5 * (projected + projected.transpose()).eval();
    wm.sigma = pb.chi * projected * pb.chi.transpose();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(projected);
    double floor = 1e-10 * std::max(1e-300, es.eigenvalues().cwiseAbs().maxCoeff());
    std::vector<int> keep;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > floor) keep.push_back(i);
    wm.rank = static_cast<int>(keep.size());
    wm.factor.resize(ball.size(), wm.rank);
    for (int c = 0; c < wm.rank; ++c)
        wm.factor.col(c) =
            pb.chi * es.eigenvectors().col(keep[c]) * std::sqrt(es.eigenvalues()(keep[c]));
    wm.factor_error = (wm.factor * wm.factor.transpose() - wm.sigma).cwiseAbs().maxCoeff();
    return wm;
}

Eigen::MatrixXd sample_wave_factor(const WaveModel& wm, std::mt19937_64& rng, long long n) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd Z(n, wm.rank);
    for (long long r = 0; r < n; ++r)
        for (int c = 0; c < wm.rank; ++c) Z(r, c) = gauss(rng);
    return Z * wm.factor.transpose();
}

namespace {

// Map the ball's vertices into the ambient vertex ball around its primary
// root.  Both orderings group children by type, so a parallel BFS aligns them.
std::vector<int> embed_in_ambient(const TreeBall& ball, const TreeBall& ambient) {
    std::vector<int> map(ball.size(), -1);
    map[0] = 0;
    std::vector<std::vector<char>> used(ambient.size());
    for (int v = 0; v < ambient.size(); ++v)
        used[v].assign(ambient.children[v].size(), 0);
    // Edge balls: vertex 1 is a child of vertex 0.
    int start = 1;
    if (ball.shape.kind == BallShape::Kind::EdgeBall) {
        for (size_t s = 0; s < ambient.children[0].size(); ++s) {
            int c = ambient.children[0][s];
            if (ambient.types[c] == ball.types[1]) {
                map[1] = c;
                used[0][s] = 1;
                break;
            }
        }
        if (map[1] < 0) throw std::logic_error("embed: missing edge neighbor type");
        start = 2;
    }
    for (int v = start; v < ball.size(); ++v) {
        int p = ball.parents[v];
        int ap = map[p];
        if (ap < 0) throw std::logic_error("embed: parent not yet mapped");
        bool found = false;
        for (size_t s = 0; s < ambient.children[ap].size(); ++s) {
            int c = ambient.children[ap][s];
            if (!used[ap][s] && ambient.types[c] == ball.types[v]) {
                map[v] = c;
                used[ap][s] = 1;
                found = true;
                break;
            }
        }
        if (!found) throw std::logic_error("embed: ambient ball too shallow");
    }
    return map;
}

}  // namespace

PushforwardResult sample_wave_pushforward(const DegreeMatrix& d, double lambda, double eta,
                                          const TreeBall& ball, std::mt19937_64& rng,
                                          long long n, const PushforwardOptions& opts) {
    if (eta <= 0) throw std::invalid_argument("pushforward needs eta > 0");
    const Complex z(lambda, eta);
    ConeGreens cg = solve_fixed_point(d, z);
    if (!cg.converged) throw std::runtime_error("pushforward: fixed point did not converge");
    auto sigma2 = cone_ward_masses(d, cg);

    int ball_depth = 0;
    for (int v = 0; v < ball.size(); ++v) ball_depth = std::max(ball_depth, ball.depth[v]);
    if (ball.shape.kind == BallShape::Kind::EdgeBall) ball_depth += 1;  // depth from vertex 0

    PushforwardResult out;
    int radius = ball_depth + 1;
    TreeBall ambient;
    BallGreens amb;
    std::vector<int> emb;
    Eigen::VectorXd tails;

    auto build = [&](int R) {
        ambient = build_ball(d, BallShape::vertex_ball(ball.shape.root_type, R));
        amb = ball_greens(d, cg, ambient);
        emb = embed_in_ambient(ball, ambient);
        // Relative Ward tail per ball vertex: mass beyond the ambient ball.
        tails.resize(ball.size());
        for (int u = 0; u < ball.size(); ++u) {
            double inside = 0.0;
            for (int x = 0; x < ambient.size(); ++x) inside += std::norm(amb.G(emb[u], x));
            double total = cg.root_diag[ball.types[u]].imag() / eta;
            tails(u) = std::max(0.0, 1.0 - inside / total);
        }
    };
    build(radius);
    if (!opts.closure) {
        while (tails.maxCoeff() > opts.tail_tol && radius < opts.max_radius) build(++radius);
        if (tails.maxCoeff() > opts.tail_tol)
            throw std::runtime_error(
                "pushforward: Ward tail " + std::to_string(tails.maxCoeff()) +
                " above tolerance; a larger truncation radius is required");
    }
    out.radius = radius;
    out.tail_rel = tails.maxCoeff();
    out.closure_used = opts.closure;

    // Coefficients: explicit columns for ambient vertices, aggregated columns
    // for the cones hanging below each ambient boundary vertex.
    const int dim = ball.size();
    std::vector<Eigen::VectorXcd> cols;
    std::vector<double> col_scale;  // noise std (1 for explicit, sigma for cones)
    for (int x = 0; x < ambient.size(); ++x) {
        Eigen::VectorXcd c(dim);
        for (int u = 0; u < dim; ++u) c(u) = amb.G(emb[u], x);
        cols.push_back(std::move(c));
        col_scale.push_back(1.0);
    }
    if (opts.closure) {
        for (int b : ambient.boundary) {
            int tb = ambient.types[b];
            int ptype = ambient.parents[b] >= 0 ? ambient.types[ambient.parents[b]] : -1;
            for (int l = 0; l < d.k; ++l) {
                long long cnum = d(tb, l) - (l == ptype ? 1 : 0);
                for (long long cc = 0; cc < cnum; ++cc) {
                    Eigen::VectorXcd c(dim);
                    for (int u = 0; u < dim; ++u) c(u) = amb.G(emb[u], b) * (-cg.gval(tb, l));
                    cols.push_back(std::move(c));
                    col_scale.push_back(std::sqrt(sigma2[static_cast<size_t>(tb) * d.k + l]));
                }
            }
        }
    }

    // Ward residual: eta * (sum of |coef|^2 * scale^2) must equal Im G_uu.
    out.ward_residual = 0.0;
    for (int u = 0; u < dim; ++u) {
        double mass = 0.0;
        for (size_t c = 0; c < cols.size(); ++c)
            mass += std::norm(cols[c](u)) * col_scale[c] * col_scale[c];
        double im = cg.root_diag[ball.types[u]].imag();
        out.ward_residual = std::max(out.ward_residual, std::abs(eta * mass - im) / im);
    }

    // Exact covariance of the field on the ball for reporting/tests.
    {
        BallGreens bg = ball_greens(d, cg, ball);
        out.target = bg.imG;
    }

    // X = sqrt(2 eta) Re( sum_c scale_c xi_c col_c ), xi iid CN(0,1).
    out.samples.resize(n, dim);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double root_half = 1.0 / std::sqrt(2.0);
    const double amp = std::sqrt(2.0 * eta);
    Eigen::VectorXcd acc(dim);
    for (long long s = 0; s < n; ++s) {
        acc.setZero();
        if (!opts.zero_noise) {
            for (size_t c = 0; c < cols.size(); ++c) {
                Complex xi(gauss(rng) * root_half, gauss(rng) * root_half);
                acc += (col_scale[c] * xi) * cols[c];
            }
        }
        for (int u = 0; u < dim; ++u) out.samples(s, u) = amp * acc(u).real();
    }
    return out;
}

}  // namespace conewave
