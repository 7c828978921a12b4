#include "conekit/ch.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace conekit {

namespace {

using Cplx = std::complex<double>;

// Thomas solve of (A - r I) u = f on flux-form bands; the shifted matrix is
// strictly diagonally dominant for Re r > 0, so no pivoting is needed.
Eigen::VectorXcd shifted_tridiag_solve(const DiscreteOperator::FvBands& b, Cplx r,
                                       const Eigen::VectorXcd& f) {
    int n = static_cast<int>(b.diag.size());
    Eigen::VectorXcd c(n), d(n);
    Cplx beta = b.diag[0] - r;
    c[0] = b.upper[0] / beta;
    d[0] = f[0] / beta;
    for (int i = 1; i < n; ++i) {
        beta = (b.diag[i] - r) - b.lower[i] * c[i - 1];
        c[i] = i + 1 < n ? b.upper[i] / beta : Cplx(0.0);
        d[i] = (f[i] - b.lower[i] * d[i - 1]) / beta;
    }
    Eigen::VectorXcd u(n);
    u[n - 1] = d[n - 1];
    for (int i = n - 2; i >= 0; --i) u[i] = d[i] - c[i] * u[i + 1];
    return u;
}

}  // namespace

Geometry Geometry::make(const RadialGrid& grid, const CrossSectionSpec& spec,
                        const WarpProfile& warp, double gamma, int s) {
    Geometry geo;
    geo.grid = grid;
    geo.spec = spec;
    geo.warp = warp;
    geo.gamma = gamma;
    geo.s = s;
    geo.modes = ModeTable::build(spec);
    DomainSpec dom = domain_spec(ConeOperatorKind::Laplacian, s, gamma, spec.n, eigen_data(spec));
    geo.laplacian = assemble_laplacian(grid, spec, warp, dom);
    for (int m = 0; m < geo.modes.count(); ++m) geo.fv.push_back(geo.laplacian.fv_bands(m));
    if (spec.kind == CrossSectionKind::Circle) {
        int n_theta = std::max(64, 4 * spec.j_max);
        geo.transform = std::make_shared<CircleTransform>(spec, n_theta);
    }
    return geo;
}

Eigen::VectorXd Geometry::apply_fv(int m, const Eigen::VectorXd& u) const {
    const auto& b = fv[m];
    int n = static_cast<int>(u.size());
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
        double acc = b.diag[i] * u[i];
        if (i > 0) acc += b.lower[i] * u[i - 1];
        if (i + 1 < n) acc += b.upper[i] * u[i + 1];
        out[i] = acc;
    }
    return out;
}

Field Geometry::apply_fv(const Field& u) const {
    Field out = u;
    for (int m = 0; m < u.n_modes(); ++m) out.values.col(m) = apply_fv(m, u.values.col(m));
    return out;
}

double Geometry::mass(const Field& u) const {
    // only the constant angular branch carries mass
    double angular = spec.kind == CrossSectionKind::Circle ? 2.0 * std::numbers::pi : 1.0;
    return angular * fv[0].cell_measure.dot(u.values.col(0));
}

void SolverConfig::validate() const {
    if (!(tau > 0.0)) throw std::invalid_argument("time step tau must be positive");
    if (!(t_final >= tau)) throw std::invalid_argument("final time must be at least one step");
    if (stabilization < 0.0) throw std::invalid_argument("stabilization must be non-negative");
    if (snapshot_every < 0) throw std::invalid_argument("snapshot cadence must be >= 0");
}

namespace {

// pointwise cubic W'(u) = u^3 - u, truncated back to the retained band via
// the dealiased transform
Field double_well_derivative(const Field& u, const Geometry& geo) {
    if (!geo.transform)
        throw std::invalid_argument("the cubic nonlinearity needs the circle cross-section");
    const CircleTransform& tf = *geo.transform;
    Field out = u;
    for (int i = 0; i < u.grid.nodes(); ++i) {
        Eigen::VectorXd vals = tf.synthesize(u.values.row(i).transpose());
        Eigen::VectorXd w = vals.array().cube() - vals.array();
        out.values.row(i) = tf.analyze(w).transpose();
    }
    return out;
}

}  // namespace

LinearizedOperator linearization(const Field& v, const Geometry& geo) {
    if (!geo.transform)
        throw std::invalid_argument("the linearization needs the circle cross-section");
    const CircleTransform& tf = *geo.transform;
    int nn = geo.grid.nodes();
    int nm = geo.modes.count();
    int dim = nn * nm;

    // per-branch flux-form Laplacian blocks, stacked mode-major
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(dim, dim);
    for (int m = 0; m < nm; ++m) {
        const auto& b = geo.fv[m];
        int base = m * nn;
        for (int i = 0; i < nn; ++i) {
            lap(base + i, base + i) = b.diag[i];
            if (i > 0) lap(base + i, base + i - 1) = b.lower[i];
            if (i + 1 < nn) lap(base + i, base + i + 1) = b.upper[i];
        }
    }

    // multiplication by v^2 in mode space, one coupling matrix per node
    LinearizedOperator out;
    out.nodes = nn;
    out.n_modes = nm;
    out.matrix = lap * lap + lap;
    for (int i = 0; i < nn; ++i) {
        Eigen::VectorXd vsq =
            tf.synthesize(v.values.row(i).transpose()).array().square().matrix();
        Eigen::MatrixXd coupling = tf.analyze_matrix() * vsq.asDiagonal() * tf.synth_matrix();
        for (int m = 0; m < nm; ++m)
            for (int mp = 0; mp < nm; ++mp) {
                if (coupling(m, mp) == 0.0) continue;
                // row (m, i) -= 3 * coupling * (lap u)(mp, i)
                const auto& b = geo.fv[mp];
                int col = mp * nn;
                out.matrix(m * nn + i, col + i) -= 3.0 * coupling(m, mp) * b.diag[i];
                if (i > 0) out.matrix(m * nn + i, col + i - 1) -= 3.0 * coupling(m, mp) * b.lower[i];
                if (i + 1 < nn)
                    out.matrix(m * nn + i, col + i + 1) -= 3.0 * coupling(m, mp) * b.upper[i];
            }
    }
    return out;
}

BlockOperator LinearizedOperator::probe(const Geometry& geo, double c0) const {
    BlockOperator op;
    op.label = "linearized cahn-hilliard";
    int dim = nodes * n_modes;
    op.blocks = {matrix + c0 * Eigen::MatrixXd::Identity(dim, dim)};
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
    for (int m = 0; m < n_modes; ++m)
        gram.block(m * nodes, m * nodes, nodes, nodes) =
            mode_gram(geo.grid, geo.warp, geo.spec.n, geo.s, geo.gamma, geo.modes[m].lambda,
                      geo.modes.basis_norm_sq(m, geo.spec.kind));
    op.grams = {gram};
    return op;
}

Field nonlinearity(const Field& u, const Geometry& geo, SignConvention sign) {
    Field grad = gradient_form(u, u, geo.warp);
    // pointwise product u * (grad u, grad u), truncated to the retained band
    Field prod = pointwise_product(u, grad);
    Field out(u.grid, u.spec);
    for (int m = 0; m < u.n_modes(); ++m) {
        const ModeBranch& br = u.modes[m];
        for (int k = 0; k < prod.n_modes(); ++k)
            if (prod.modes[k].j == br.j && prod.modes[k].branch == br.branch)
                out.values.col(m) = prod.values.col(k);
    }
    double scale = sign == SignConvention::IdentityPlus ? 6.0 : -6.0;
    out *= scale;
    return out;
}

DiagnosticsRow diagnostics(const Field& u, const Geometry& geo) {
    DiagnosticsRow row;
    row.mass = geo.mass(u);

    // gradient part through the flux-form Dirichlet sum (the discrete
    // quadratic form of -Delta), angular factors from the branch norms
    double dirichlet = 0.0;
    for (int m = 0; m < u.n_modes(); ++m) {
        double nu = u.modes.basis_norm_sq(m, u.spec.kind);
        Eigen::VectorXd au = geo.apply_fv(m, u.values.col(m));
        dirichlet += -nu * geo.fv[m].cell_measure.dot(au.cwiseProduct(u.values.col(m)));
    }

    // double-well part pointwise on the dealiased angular grid
    double well = 0.0;
    if (geo.transform) {
        const CircleTransform& tf = *geo.transform;
        double dtheta = 2.0 * std::numbers::pi / tf.n_theta();
        for (int i = 0; i < u.grid.nodes(); ++i) {
            Eigen::VectorXd vals = tf.synthesize(u.values.row(i).transpose());
            double cell = geo.fv[0].cell_measure[i];
            well += cell * dtheta * (vals.array().square() - 1.0).square().sum();
        }
    } else {
        throw std::invalid_argument("the double-well energy needs the circle cross-section");
    }
    row.energy = 0.5 * dirichlet + 0.25 * well;
    return row;
}

Field step(const Field& state, double tau, const SolverConfig& cfg, const Geometry& geo) {
    if (!state.finite()) throw std::runtime_error("step: state contains non-finite values");
    int nn = geo.grid.nodes();

    if (cfg.scheme == Scheme::StabilizedSemiImplicit) {
        double s = cfg.stabilization;
        // rhs = u + tau * Delta( W'(u) - S u )
        Field w = double_well_derivative(state, geo);
        Field out = state;
        // roots of tau z^2 - tau S z + 1 (complex-conjugate for moderate tau)
        Cplx disc = Cplx(s * s - 4.0 / tau, 0.0);
        Cplx root = std::sqrt(disc);
        Cplx r_plus = 0.5 * (s + root);
        Cplx r_minus = 0.5 * (s - root);
        for (int m = 0; m < state.n_modes(); ++m) {
            Eigen::VectorXd forcing = w.values.col(m) - s * state.values.col(m);
            Eigen::VectorXd rhs = state.values.col(m) + tau * geo.apply_fv(m, forcing);
            // (I + tau Delta^2 - tau S Delta) = tau (Delta - r+)(Delta - r-)
            Eigen::VectorXcd stage =
                shifted_tridiag_solve(geo.fv[m], r_plus, rhs.cast<Cplx>() / tau);
            Eigen::VectorXcd sol = shifted_tridiag_solve(geo.fv[m], r_minus, stage);
            if (sol.imag().cwiseAbs().maxCoeff() >
                1e-8 * std::max(1.0, sol.real().cwiseAbs().maxCoeff()))
                throw std::runtime_error("step: factored solve lost realness");
            out.values.col(m) = sol.real();
        }
        if (!out.finite()) throw std::runtime_error("step: solve produced non-finite values");
        return out;
    }

    // linearized-implicit scheme: (I + tau (A(u) + c0)) u1 = u + tau (F(u) + c0 u)
    LinearizedOperator a = linearization(state, geo);
    Field f = nonlinearity(state, geo, cfg.sign);
    int dim = nn * state.n_modes();
    Eigen::VectorXd stacked(dim), rhs(dim);
    for (int m = 0; m < state.n_modes(); ++m) {
        stacked.segment(m * nn, nn) = state.values.col(m);
        rhs.segment(m * nn, nn) =
            state.values.col(m) + tau * (f.values.col(m) + cfg.c0 * state.values.col(m));
    }
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(dim, dim) + tau * a.matrix +
                             tau * cfg.c0 * Eigen::MatrixXd::Identity(dim, dim);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    Eigen::VectorXd sol = lu.solve(rhs);
    if (!sol.allFinite()) throw std::runtime_error("step: linearized solve failed");
    Field out = state;
    for (int m = 0; m < state.n_modes(); ++m) out.values.col(m) = sol.segment(m * nn, nn);
    return out;
}

namespace {

Snapshot take_snapshot(const Field& u, double time, const Geometry& geo) {
    Snapshot snap;
    snap.time = time;
    snap.field = u;
    snap.constant = u.values(u.grid.n, 0);

    // least-squares weights on the bilaplacian domain basis over the
    // omega == 1 region, reported per snapshot for reproducibility
    auto basis = bilaplacian_domain_asymptotics(geo.spec.n, geo.gamma, eigen_data(geo.spec)).basis;
    CutoffOmega omega;
    std::vector<int> window;
    for (int i = 0; i < u.grid.nodes(); ++i)
        if (u.grid.x[i] <= omega.r1) window.push_back(i);
    for (const auto& s : basis) {
        int col = -1;
        for (int m = 0; m < u.n_modes(); ++m)
            if (u.modes[m].j == s.j && u.modes[m].branch == s.branch) col = m;
        if (col < 0) continue;
        // project the branch profile on the sampled basis function
        Eigen::VectorXd phi = sample_singular(s, u.grid, omega);
        double num = 0.0, den = 0.0;
        for (int i : window) {
            num += phi[i] * u.values(i, col);
            den += phi[i] * phi[i];
        }
        snap.coefficients.push_back({s, den > 0.0 ? num / den : 0.0});
    }
    return snap;
}

}  // namespace

SolveResult solve(const Field& initial, const SolverConfig& cfg, const Geometry& geo) {
    cfg.validate();
    SolveResult result;
    Field u = initial;
    int n_steps = static_cast<int>(std::round(cfg.t_final / cfg.tau));
    result.diagnostics.push_back(diagnostics(u, geo));
    if (cfg.snapshot_every > 0) result.snapshots.push_back(take_snapshot(u, 0.0, geo));

    for (int k = 1; k <= n_steps; ++k) {
        Field next;
        try {
            next = step(u, cfg.tau, cfg, geo);
        } catch (const std::exception& e) {
            result.status = SolveStatus::StepFailure;
            result.message = "step " + std::to_string(k) + ": " + e.what();
            break;
        }
        double time = k * cfg.tau;
        DiagnosticsRow row = diagnostics(next, geo);
        row.step = k;
        row.time = time;
        double scale = std::max(1e-300, u.values.norm());
        row.step_residual = (next.values - u.values).norm() / scale;
        result.diagnostics.push_back(row);
        u = next;
        if (cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0)
            result.snapshots.push_back(take_snapshot(u, time, geo));
    }
    result.final_state = u;
    return result;
}

}  // namespace conekit
