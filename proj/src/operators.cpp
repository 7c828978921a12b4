#include "conekit/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace conekit {

namespace {

void check_weight(const CrossSectionSpec& spec, double gamma) {
    if (spec.j_max < 2)
        throw std::invalid_argument("assembly needs at least two retained eigenvalues");
    WeightWindow w = weight_window(spec.n, spec.eigenvalues[1]);
    if (!w.contains(gamma))
        throw std::invalid_argument("gamma outside the admissible weight window");
}

// compact (x d/dx)^2 = d^2/dt^2: [1,-2,1] interior, 4-point one-sided ends
Eigen::MatrixXd compact_second_derivative(const RadialGrid& grid) {
    int m = grid.nodes();
    double h2 = grid.dt * grid.dt;
    Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(m, m);
    d2(0, 0) = 2.0 / h2;
    d2(0, 1) = -5.0 / h2;
    d2(0, 2) = 4.0 / h2;
    d2(0, 3) = -1.0 / h2;
    for (int i = 1; i < m - 1; ++i) {
        d2(i, i - 1) = 1.0 / h2;
        d2(i, i) = -2.0 / h2;
        d2(i, i + 1) = 1.0 / h2;
    }
    d2(m - 1, m - 1) = 2.0 / h2;
    d2(m - 1, m - 2) = -5.0 / h2;
    d2(m - 1, m - 3) = 4.0 / h2;
    d2(m - 1, m - 4) = -1.0 / h2;
    return d2;
}

DiscreteOperator base_operator(const RadialGrid& grid, const CrossSectionSpec& spec,
                               const WarpProfile& warp, const DomainSpec& domain,
                               OuterBc outer_bc) {
    check_weight(spec, domain.gamma);
    if (grid.n < 16) throw std::invalid_argument("grid too coarse for assembly (need n >= 16)");
    DiscreteOperator op;
    op.grid = grid;
    op.spec = spec;
    op.modes = ModeTable::build(spec);
    op.warp = warp;
    op.domain = domain;
    op.outer_bc = outer_bc;
    int m = grid.nodes();
    op.a2.setOnes(m);
    op.a1.resize(m);
    op.a0.resize(m);
    for (int i = 0; i < m; ++i) {
        WarpData w = warp_eval(warp, grid.x[i], spec.n);
        op.a1[i] = (spec.n - 1) + w.H;
        op.a0[i] = 1.0 / w.f;
    }
    return op;
}

}  // namespace

int DiscreteOperator::n_coeff_columns(int m) const {
    const ModeBranch& br = modes[m];
    int count = 0;
    if (domain.include_constants && br.j == 0) ++count;
    for (const auto& s : domain.singular_basis)
        if (s.j == br.j && s.branch == br.branch) ++count;
    return count;
}

Eigen::MatrixXd DiscreteOperator::apply_matrix(int m) const {
    int nn = grid.nodes();
    Eigen::MatrixXd d1 = euler_derivative_matrix(grid, 1);  // x d/dx
    Eigen::MatrixXd d2 = compact_second_derivative(grid);
    double lambda = modes[m].lambda;
    Eigen::MatrixXd l(nn, nn);
    for (int i = 0; i < nn; ++i) {
        double xi2 = 1.0 / (grid.x[i] * grid.x[i]);
        l.row(i) = xi2 * (a2[i] * d2.row(i) + a1[i] * d1.row(i));
        l(i, i) += xi2 * lambda * a0[i];
    }
    if (composed) return l * l;
    return l;
}

namespace {

// difference-form stencil application: node differences cancel before any
// scaling, so constants are annihilated exactly
void euler_differences(const RadialGrid& grid, const Eigen::VectorXd& u, Eigen::VectorXd& du,
                       Eigen::VectorXd& ddu) {
    int nn = grid.nodes();
    double h = grid.dt;
    du.resize(nn);
    ddu.resize(nn);
    // x d/dx = -d/dt
    du[0] = (3.0 * (u[0] - u[1]) - (u[1] - u[2])) / (2.0 * h);
    for (int i = 1; i < nn - 1; ++i) du[i] = (u[i - 1] - u[i + 1]) / (2.0 * h);
    du[nn - 1] = (3.0 * (u[nn - 2] - u[nn - 1]) + (u[nn - 2] - u[nn - 3])) / (2.0 * h);

    double h2 = h * h;
    ddu[0] = (2.0 * (u[0] - u[1]) - 3.0 * (u[1] - u[2]) + (u[2] - u[3])) / h2;
    for (int i = 1; i < nn - 1; ++i) ddu[i] = ((u[i + 1] - u[i]) - (u[i] - u[i - 1])) / h2;
    ddu[nn - 1] =
        (2.0 * (u[nn - 1] - u[nn - 2]) - 3.0 * (u[nn - 2] - u[nn - 3]) + (u[nn - 3] - u[nn - 4])) /
        h2;
}

}  // namespace

Eigen::VectorXd DiscreteOperator::apply_mode(int m, const Eigen::VectorXd& vals) const {
    double lambda = modes[m].lambda;
    Eigen::VectorXd du, ddu;
    Eigen::VectorXd u = vals;
    int passes = composed ? 2 : 1;
    for (int pass = 0; pass < passes; ++pass) {
        euler_differences(grid, u, du, ddu);
        Eigen::VectorXd out(grid.nodes());
        for (int i = 0; i < grid.nodes(); ++i) {
            double xi2 = 1.0 / (grid.x[i] * grid.x[i]);
            out[i] = xi2 * (a2[i] * ddu[i] + a1[i] * du[i] + lambda * a0[i] * u[i]);
        }
        u = out;
    }
    return u;
}

Field DiscreteOperator::apply(const Field& u) const {
    Field out = u;
    for (int m = 0; m < u.n_modes(); ++m) out.values.col(m) = apply_mode(m, u.values.col(m));
    return out;
}

Field DiscreteOperator::apply(const AugmentedField& u) const { return apply(u.total()); }

double DiscreteOperator::robin_exponent(int m) const {
    IndicialRoots r = indicial_roots(spec.n, modes[m].lambda, modes[m].j);
    double edge = (spec.n + 1) / 2.0 - domain.gamma - domain.mu;
    // smallest admissible root above the lower window edge; q_plus >= 0
    // always clears it for admissible weights
    if (r.q_minus > edge) return r.q_minus;
    return r.q_plus;
}

Eigen::MatrixXd DiscreteOperator::evaluation_map(int m) const {
    int nn = grid.nodes();
    int nc = n_coeff_columns(m);
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(nn, nn + nc);
    e.leftCols(nn).setIdentity();
    const ModeBranch& br = modes[m];
    int col = nn;
    if (domain.include_constants && br.j == 0) e.col(col++).setOnes();
    for (const auto& s : domain.singular_basis)
        if (s.j == br.j && s.branch == br.branch)
            e.col(col++) = sample_singular(s, grid, omega);
    return e;
}

Eigen::MatrixXd DiscreteOperator::constraint_rows(int m) const {
    int nn = grid.nodes();
    int nc = n_coeff_columns(m);
    int rows = 2 + (nc > 0 ? 1 : 0);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(rows, nn + nc);
    Eigen::MatrixXd e = evaluation_map(m);
    double h = grid.dt;

    // outer boundary row at x = 1, applied to the total values
    Eigen::RowVectorXd outer = Eigen::RowVectorXd::Zero(nn);
    if (outer_bc == OuterBc::Neumann) {
        outer[0] = -3.0 / (2.0 * h);
        outer[1] = 4.0 / (2.0 * h);
        outer[2] = -1.0 / (2.0 * h);
    } else {
        outer[0] = 1.0;
    }
    c.row(0) = outer * e;

    // tip truncation: the minimal (grid) part vanishes at x_min
    c(1, nn - 1) = 1.0;

    // exponent-matching Robin row for the minimal part at the penultimate node
    if (nc > 0) {
        double q = robin_exponent(m);
        c(2, nn - 3) = 1.0 / (2.0 * h);
        c(2, nn - 1) = -1.0 / (2.0 * h);
        c(2, nn - 2) = -q;
    }
    return c;
}

Eigen::MatrixXcd DiscreteOperator::solve_matrix(int m, std::complex<double> alpha,
                                                std::complex<double> beta) const {
    if (composed)
        throw std::logic_error("solve systems for the composed operator go through the "
                               "factorized second-order solves");
    int nn = grid.nodes();
    int nc = n_coeff_columns(m);
    int dim = nn + nc;
    Eigen::MatrixXd e = evaluation_map(m);
    Eigen::MatrixXd le = apply_matrix(m) * e;
    Eigen::MatrixXd c = constraint_rows(m);

    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(dim, dim);
    // row 0: outer boundary; rows 1..n-1: collocation; row n: tip Dirichlet;
    // row n+1 (if coefficients present): Robin closure
    s.row(0) = c.row(0).cast<std::complex<double>>();
    for (int i = 1; i < nn - 1; ++i)
        s.row(i) = alpha * e.row(i).cast<std::complex<double>>() +
                   beta * le.row(i).cast<std::complex<double>>();
    s.row(nn - 1) = c.row(1).cast<std::complex<double>>();
    if (nc > 0) s.row(nn) = c.row(2).cast<std::complex<double>>();
    if (nc > 1)
        throw std::logic_error("second-order solves support at most one coefficient column");
    return s;
}

Eigen::VectorXcd DiscreteOperator::place_rhs(int m, const Eigen::VectorXcd& f) const {
    int nn = grid.nodes();
    int nc = n_coeff_columns(m);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(nn + nc);
    rhs.segment(1, nn - 2) = f.segment(1, nn - 2);
    if (outer_bc == OuterBc::Dirichlet) rhs[0] = f[0];
    return rhs;
}

Eigen::MatrixXd DiscreteOperator::reduced_matrix(int m) const {
    int nn = grid.nodes();
    Eigen::MatrixXd e = evaluation_map(m);
    Eigen::MatrixXd c = constraint_rows(m);
    Eigen::MatrixXd le = apply_matrix(m) * e;

    // null space of the constraint rows
    Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(c.transpose());
    Eigen::MatrixXd q = qr.matrixQ();
    Eigen::MatrixXd z = q.rightCols(e.cols() - c.rows());

    Eigen::MatrixXd pez(nn - 2, z.cols()), plez(nn - 2, z.cols());
    Eigen::MatrixXd ez = e * z, lez = le * z;
    pez = ez.middleRows(1, nn - 2);
    plez = lez.middleRows(1, nn - 2);
    return plez * pez.inverse();
}

Eigen::MatrixXd DiscreteOperator::closure_value_map(int m) const {
    int nn = grid.nodes();
    Eigen::MatrixXd e = evaluation_map(m);
    Eigen::MatrixXd c = constraint_rows(m);
    Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(c.transpose());
    Eigen::MatrixXd z = qr.matrixQ().rightCols(e.cols() - c.rows());
    Eigen::MatrixXd ez = e * z;
    Eigen::MatrixXd pez = ez.middleRows(1, nn - 2);
    return ez * pez.inverse();
}

DiscreteOperator::FvBands DiscreteOperator::fv_bands(int m) const {
    if (composed || perturbation)
        throw std::logic_error("flux-form bands exist only for the plain Laplacian assembly");
    int nn = grid.nodes();
    double h = grid.dt;
    double lambda = modes[m].lambda;
    const int n = spec.n;

    auto vol_density = [&](double x) {  // W(x) * x = x^{n+1} f^{n/2}
        return std::pow(x, n + 1) * std::pow(warp.f(x), n / 2.0);
    };
    auto face = [&](double t) {  // W(x)/x = x^{n-1} f^{n/2} at half nodes
        double x = std::exp(-t);
        return std::pow(x, n - 1) * std::pow(warp.f(x), n / 2.0);
    };

    FvBands b;
    b.lower.setZero(nn);
    b.diag.setZero(nn);
    b.upper.setZero(nn);
    b.cell_measure.resize(nn);
    for (int i = 0; i < nn; ++i) {
        double len = (i == 0 || i == nn - 1) ? h / 2.0 : h;
        b.cell_measure[i] = len * vol_density(grid.x[i]);
        double flux_lo = (i > 0) ? face((i - 0.5) * h) / h : 0.0;       // toward x = 1
        double flux_hi = (i < nn - 1) ? face((i + 0.5) * h) / h : 0.0;  // toward the tip
        double inv = 1.0 / b.cell_measure[i];
        if (i > 0) b.lower[i] = inv * flux_lo;
        if (i < nn - 1) b.upper[i] = inv * flux_hi;
        b.diag[i] = -inv * (flux_lo + flux_hi);
        double x = grid.x[i];
        b.diag[i] += lambda * a0[i] / (x * x);
    }
    return b;
}

int DiscreteOperator::bandwidth(int m) const {
    Eigen::MatrixXd l = apply_matrix(m);
    int margin = interior_margin();
    int bw = 0;
    for (int i = margin; i < grid.nodes() - margin; ++i)
        for (int jc = 0; jc < grid.nodes(); ++jc)
            if (l(i, jc) != 0.0) bw = std::max(bw, std::abs(i - jc));
    return 2 * bw + 1;
}

std::vector<SparseTriplet> DiscreteOperator::triplets() const {
    std::vector<SparseTriplet> out;
    for (int m = 0; m < modes.count(); ++m) {
        Eigen::MatrixXd l = apply_matrix(m);
        for (int i = 0; i < l.rows(); ++i)
            for (int jc = 0; jc < l.cols(); ++jc)
                if (l(i, jc) != 0.0) out.push_back({m, i, jc, l(i, jc)});
    }
    return out;
}

DiscreteOperator assemble_laplacian(const RadialGrid& grid, const CrossSectionSpec& spec,
                                    const WarpProfile& warp, const DomainSpec& domain,
                                    OuterBc outer_bc) {
    return base_operator(grid, spec, warp, domain, outer_bc);
}

DiscreteOperator assemble_bilaplacian(const RadialGrid& grid, const CrossSectionSpec& spec,
                                      const WarpProfile& warp, const DomainSpec& domain,
                                      OuterBc outer_bc) {
    if (domain.op != ConeOperatorKind::Bilaplacian)
        throw std::invalid_argument("bilaplacian assembly needs a bilaplacian domain");
    DiscreteOperator op = base_operator(grid, spec, warp, domain, outer_bc);
    op.composed = true;
    return op;
}

InterpolantPair assemble_interpolant(const RadialGrid& grid, const CrossSectionSpec& spec,
                                     const WarpProfile& warp, const DomainSpec& domain,
                                     double eps, OuterBc outer_bc) {
    DiscreteOperator warped = base_operator(grid, spec, warp, domain, outer_bc);
    if (!(eps > 0.0) || eps > 1.0)
        throw std::invalid_argument("interpolant parameter must satisfy 0 < eps <= 1");

    InterpolantPair pair{warped, warped};
    for (int i = 0; i < grid.nodes(); ++i) {
        double cut = warped.omega.scaled(grid.x[i], eps);
        double h_w = warped.a1[i] - (spec.n - 1);  // warped drift H(x)
        double g_w = warped.a0[i];
        pair.delta_eps.a1[i] = (spec.n - 1) + (1.0 - cut) * h_w;
        pair.delta_eps.a0[i] = cut + (1.0 - cut) * g_w;
        pair.b_eps.a2[i] = 0.0;
        pair.b_eps.a1[i] = cut * h_w;
        pair.b_eps.a0[i] = cut * (g_w - 1.0);
    }
    pair.b_eps.perturbation = true;
    return pair;
}

DiscreteOperator model_cone_operator(const RadialGrid& grid, const CrossSectionSpec& spec,
                                     std::optional<double> gamma) {
    WeightWindow w = weight_window(spec.n, spec.eigenvalues[1]);
    double g = gamma.value_or(0.5 * (w.gamma_min + w.gamma_max));
    DomainSpec domain = domain_spec(ConeOperatorKind::Laplacian, 0, g, spec.n, eigen_data(spec));
    return assemble_laplacian(grid, spec, WarpProfile::straight(), domain);
}

namespace {

Field gradient_form_values(const Field& u, const Field& v, const WarpProfile& warp) {
    if (u.spec.kind != CrossSectionKind::Circle)
        throw std::invalid_argument("gradient form requires the circle cross-section");
    int j_prod = u.spec.j_max + v.spec.j_max - 1;
    CrossSectionSpec prod_spec = CrossSectionSpec::circle(j_prod);
    int n_theta = std::max(64, 2 * (2 * j_prod + 1));
    CircleTransform tu(u.spec, n_theta), tv(v.spec, n_theta), tp(prod_spec, n_theta);

    Eigen::MatrixXd du = euler_derivative_matrix(u.grid, 1) * u.values;
    Eigen::MatrixXd dv = euler_derivative_matrix(v.grid, 1) * v.values;

    auto theta_deriv = [](const Field& f, const Eigen::MatrixXd& vals) {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(vals.rows(), vals.cols());
        for (int m = 0; m < f.n_modes(); ++m) {
            const ModeBranch& br = f.modes[m];
            if (br.j == 0) continue;
            for (int k = 0; k < f.n_modes(); ++k)
                if (f.modes[k].j == br.j && f.modes[k].branch == 1 - br.branch)
                    out.col(k) += (br.branch == 0 ? -1.0 : 1.0) * br.j * vals.col(m);
        }
        return out;
    };
    Eigen::MatrixXd ut = theta_deriv(u, u.values);
    Eigen::MatrixXd vt = theta_deriv(v, v.values);

    Field out(u.grid, prod_spec);
    for (int i = 0; i < u.grid.nodes(); ++i) {
        double x = u.grid.x[i];
        double f = warp.f(x);
        Eigen::VectorXd rad = tu.synthesize(du.row(i).transpose())
                                  .cwiseProduct(tv.synthesize(dv.row(i).transpose()));
        Eigen::VectorXd ang = tu.synthesize(ut.row(i).transpose())
                                  .cwiseProduct(tv.synthesize(vt.row(i).transpose()));
        Eigen::VectorXd vals = (rad + ang / f) / (x * x);
        out.values.row(i) = tp.analyze(vals).transpose();
    }
    return out;
}

}  // namespace

Field gradient_form(const Field& u, const Field& v, const WarpProfile& warp) {
    return gradient_form_values(u, v, warp);
}

Field gradient_form(const AugmentedField& u, const AugmentedField& v, const WarpProfile& warp) {
    return gradient_form_values(u.total(), v.total(), warp);
}

namespace {

template <typename Mat>
NormEstimate induced_norm_impl(const Mat& a, const Eigen::MatrixXd& g_from,
                               const Eigen::MatrixXd& g_to, const PowerOpts& opts) {
    using Scalar = typename Mat::Scalar;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    Eigen::LDLT<Eigen::MatrixXd> from(g_from);
    Mat k = a.adjoint() * g_to.template cast<Scalar>() * a;

    auto solve_from = [&](const Vec& b) -> Vec {
        if constexpr (std::is_same_v<Scalar, double>) {
            return from.solve(b);
        } else {
            Eigen::VectorXd re = from.solve(b.real());
            Eigen::VectorXd im = from.solve(b.imag());
            return re.template cast<Scalar>() + Scalar(0, 1) * im.template cast<Scalar>();
        }
    };

    Vec u = Vec::Ones(a.cols());
    double rho_prev = -1.0;
    NormEstimate est;
    for (int it = 1; it <= opts.max_iter; ++it) {
        Vec ku = k * u;
        double num = std::real(u.dot(ku));
        double den = std::real(u.dot(g_from.template cast<Scalar>() * u));
        double rho = num / den;
        est.value = std::sqrt(std::max(rho, 0.0));
        est.iterations = it;
        if (rho_prev >= 0.0 && std::abs(rho - rho_prev) <= opts.tol * std::abs(rho)) {
            est.converged = true;
            break;
        }
        rho_prev = rho;
        Vec next = solve_from(ku);
        double nrm = next.norm();
        if (nrm == 0.0) {  // zero operator
            est.value = 0.0;
            est.converged = true;
            break;
        }
        u = next / nrm;
    }
    return est;
}

}  // namespace

NormEstimate induced_norm(const Eigen::MatrixXd& a, const Eigen::MatrixXd& g_from,
                          const Eigen::MatrixXd& g_to, const PowerOpts& opts) {
    return induced_norm_impl(a, g_from, g_to, opts);
}

NormEstimate induced_norm(const Eigen::MatrixXcd& a, const Eigen::MatrixXd& g_from,
                          const Eigen::MatrixXd& g_to, const PowerOpts& opts) {
    return induced_norm_impl(a, g_from, g_to, opts);
}

NormEstimate operator_norm_graph_to_mellin(const DiscreteOperator& op,
                                           const DiscreteOperator& reference, int s_to,
                                           double gamma_to, const PowerOpts& opts) {
    NormEstimate best;
    best.converged = true;
    for (int m = 0; m < op.modes.count(); ++m) {
        Eigen::MatrixXd vmap = reference.closure_value_map(m);
        Eigen::MatrixXd amap = reference.apply_matrix(m) * vmap;
        Eigen::MatrixXd w_to = mode_gram(op.grid, op.warp, op.spec.n, s_to, gamma_to,
                                         op.modes[m].lambda,
                                         op.modes.basis_norm_sq(m, op.spec.kind));
        // graph norm of the reference operator on the domain representation
        Eigen::MatrixXd g_from = vmap.transpose() * w_to * vmap +
                                 amap.transpose() * w_to * amap;
        Eigen::MatrixXd b = op.apply_matrix(m) * vmap;
        NormEstimate e = induced_norm(b, g_from, w_to, opts);
        if (e.value > best.value) best.value = e.value;
        best.converged = best.converged && e.converged;
        best.iterations = std::max(best.iterations, e.iterations);
    }
    return best;
}

}  // namespace conekit
