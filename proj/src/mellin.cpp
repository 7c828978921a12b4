#include "conekit/mellin.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace conekit {

Eigen::VectorXd radial_weights(const RadialGrid& grid, const WarpProfile& warp, int n,
                               double gamma) {
    Eigen::VectorXd w(grid.nodes());
    double kappa = (n + 1) / 2.0 - gamma;
    for (int i = 0; i < grid.nodes(); ++i) {
        double x = grid.x[i];
        double f = warp.f(x);
        double tau = (i == 0 || i == grid.n) ? grid.dt / 2.0 : grid.dt;
        w[i] = tau * std::pow(x, 2.0 * kappa) * std::pow(f, n / 2.0);
    }
    return w;
}

Eigen::MatrixXd euler_derivative_matrix(const RadialGrid& grid, int r) {
    int m = grid.nodes();
    Eigen::MatrixXd d1 = Eigen::MatrixXd::Zero(m, m);
    double h = grid.dt;
    // -d/dt, second order; one-sided at both ends
    d1(0, 0) = 3.0 / (2.0 * h);
    d1(0, 1) = -4.0 / (2.0 * h);
    d1(0, 2) = 1.0 / (2.0 * h);
    for (int i = 1; i < m - 1; ++i) {
        d1(i, i - 1) = 1.0 / (2.0 * h);
        d1(i, i + 1) = -1.0 / (2.0 * h);
    }
    d1(m - 1, m - 1) = -3.0 / (2.0 * h);
    d1(m - 1, m - 2) = 4.0 / (2.0 * h);
    d1(m - 1, m - 3) = -1.0 / (2.0 * h);

    Eigen::MatrixXd out = Eigen::MatrixXd::Identity(m, m);
    for (int k = 0; k < r; ++k) out = d1 * out;
    return out;
}

Eigen::MatrixXd mode_gram(const RadialGrid& grid, const WarpProfile& warp, int n, int s,
                          double gamma, double lambda, double basis_norm_sq) {
    Eigen::VectorXd w = radial_weights(grid, warp, n, gamma);
    int m = grid.nodes();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
    for (int r = 0; r <= s; ++r) {
        Eigen::MatrixXd dr = euler_derivative_matrix(grid, r);
        double ang = std::pow(1.0 - lambda, s - r) * basis_norm_sq;
        g += ang * dr.transpose() * w.asDiagonal() * dr;
    }
    return g;
}

namespace {

void validate_request(const Field& u, const NormRequest& req) {
    if (!u.finite()) throw std::invalid_argument("field contains non-finite entries");
    if (req.s < 0 || req.s > 4)
        throw std::invalid_argument("norms are implemented for integer s in [0, 4]");
    if (!(req.p > 1.0) || !std::isfinite(req.p))
        throw std::invalid_argument("p must lie in (1, infinity)");
    if (req.p != 2.0 && u.spec.kind != CrossSectionKind::Circle)
        throw std::invalid_argument("p != 2 norms are only supported on the circle");
}

// rotate circle mode coefficients by one angular derivative
Eigen::MatrixXd theta_derivative(const Field& u, const Eigen::MatrixXd& vals) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(vals.rows(), vals.cols());
    for (int m = 0; m < u.n_modes(); ++m) {
        const ModeBranch& br = u.modes[m];
        if (br.j == 0) continue;
        // d/dtheta cos = -j sin, d/dtheta sin = j cos
        int partner = -1;
        for (int k = 0; k < u.n_modes(); ++k)
            if (u.modes[k].j == br.j && u.modes[k].branch == 1 - br.branch) partner = k;
        double sign = br.branch == 0 ? -1.0 : 1.0;
        out.col(partner) += sign * br.j * vals.col(m);
    }
    return out;
}

}  // namespace

double hs_norm(const Field& u, const NormRequest& req) {
    validate_request(u, req);
    const int n = u.spec.n;

    if (req.p == 2.0) {
        double total = 0.0;
        Eigen::VectorXd w = radial_weights(u.grid, req.warp, n, req.gamma);
        std::vector<Eigen::MatrixXd> dr(req.s + 1);
        for (int r = 0; r <= req.s; ++r) dr[r] = euler_derivative_matrix(u.grid, r);
        for (int m = 0; m < u.n_modes(); ++m) {
            double nu = u.modes.basis_norm_sq(m, u.spec.kind);
            double lambda = u.modes[m].lambda;
            for (int r = 0; r <= req.s; ++r) {
                Eigen::VectorXd g = dr[r] * u.values.col(m);
                total += std::pow(1.0 - lambda, req.s - r) * nu *
                         g.cwiseAbs2().dot(w);
            }
        }
        return std::sqrt(total);
    }

    // p != 2, circle: synthesize and integrate pointwise
    int n_theta = std::max(64, 4 * u.spec.j_max);
    CircleTransform tf(u.spec, n_theta);
    double kappa = (n + 1) / 2.0 - req.gamma;
    double total = 0.0;
    for (int r = 0; r <= req.s; ++r) {
        Eigen::MatrixXd radial = euler_derivative_matrix(u.grid, r) * u.values;
        Eigen::MatrixXd angular = radial;
        for (int a = 0; r + a <= req.s; ++a) {
            if (a > 0) angular = theta_derivative(u, angular);
            for (int i = 0; i < u.grid.nodes(); ++i) {
                double x = u.grid.x[i];
                double tau = (i == 0 || i == u.grid.n) ? u.grid.dt / 2.0 : u.grid.dt;
                double wt = tau * std::pow(x, req.p * kappa) *
                            std::pow(req.warp.f(x), n / 2.0) * 2.0 * std::numbers::pi / n_theta;
                Eigen::VectorXd vals = tf.synthesize(angular.row(i).transpose());
                total += wt * vals.array().abs().pow(req.p).sum();
            }
        }
    }
    return std::pow(total, 1.0 / req.p);
}

TipBoundReport tip_bound_check(const Field& u, int s, double gamma, const WarpProfile& warp) {
    const int n = u.spec.n;
    if (!(s > (n + 1) / 2.0))
        throw std::invalid_argument("tip bound requires s > (n+1)/p with p = 2");
    NormRequest req{s, gamma, 2.0, warp};
    TipBoundReport rep;
    rep.norm = hs_norm(u, req);

    double kappa = (n + 1) / 2.0 - gamma;
    const double near_tip = 10.0 * u.grid.x_min;
    if (u.spec.kind == CrossSectionKind::Circle) {
        int n_theta = std::max(64, 4 * u.spec.j_max);
        CircleTransform tf(u.spec, n_theta);
        for (int i = 0; i < u.grid.nodes(); ++i) {
            if (u.grid.x[i] > near_tip) continue;
            Eigen::VectorXd vals = tf.synthesize(u.values.row(i).transpose());
            rep.weighted_sup = std::max(
                rep.weighted_sup, vals.cwiseAbs().maxCoeff() * std::pow(u.grid.x[i], kappa));
        }
    } else {
        for (int i = 0; i < u.grid.nodes(); ++i) {
            if (u.grid.x[i] > near_tip) continue;
            double amp = u.values.row(i).cwiseAbs().sum();
            rep.weighted_sup = std::max(rep.weighted_sup, amp * std::pow(u.grid.x[i], kappa));
        }
    }
    if (rep.norm == 0.0) {
        rep.zero_field = true;
        rep.ratio = 0.0;
    } else {
        rep.ratio = rep.weighted_sup / rep.norm;
    }
    return rep;
}

Field pointwise_product(const Field& u, const Field& v) {
    if (u.spec.kind != CrossSectionKind::Circle || v.spec.kind != CrossSectionKind::Circle)
        throw std::invalid_argument("pointwise products require the circle cross-section");
    if (u.grid.nodes() != v.grid.nodes())
        throw std::invalid_argument("pointwise product: grids differ");
    int j_prod = u.spec.j_max + v.spec.j_max - 1;
    CrossSectionSpec prod_spec = CrossSectionSpec::circle(j_prod);
    int n_theta = std::max(64, 2 * (2 * j_prod + 1));
    CircleTransform tu(u.spec, n_theta), tv(v.spec, n_theta), tp(prod_spec, n_theta);
    Field out(u.grid, prod_spec);
    for (int i = 0; i < u.grid.nodes(); ++i) {
        Eigen::VectorXd a = tu.synthesize(u.values.row(i).transpose());
        Eigen::VectorXd b = tv.synthesize(v.values.row(i).transpose());
        out.values.row(i) = tp.analyze(a.cwiseProduct(b)).transpose();
    }
    return out;
}

double algebra_defect(const Field& u, const Field& v, int s, double gamma,
                      const WarpProfile& warp) {
    if (u.spec.kind != CrossSectionKind::Circle)
        throw std::invalid_argument("algebra defect requires the circle cross-section");
    const int n = u.spec.n;
    if (!(s > (n + 1) / 2.0))
        throw std::invalid_argument("algebra defect requires s > (n+1)/p with p = 2");
    Field uv = pointwise_product(u, v);
    double num = hs_norm(uv, {s, gamma, 2.0, warp});
    double du = hs_norm(u, {s, gamma, 2.0, warp});
    double dv = hs_norm(v, {s, (n + 1) / 2.0, 2.0, warp});
    if (du == 0.0 || dv == 0.0)
        throw std::invalid_argument("algebra defect: zero factor norm in the denominator");
    return num / (du * dv);
}

}  // namespace conekit
