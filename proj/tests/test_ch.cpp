#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "conekit/ch.hpp"
#include "doctest.h"

using namespace conekit;

namespace {

Geometry small_geometry(int n_cells = 64, int j_max = 4, double x_min = 1e-3,
                        WarpProfile warp = WarpProfile::straight()) {
    return Geometry::make(RadialGrid::make(n_cells, x_min), CrossSectionSpec::circle(j_max), warp,
                          -0.5);
}

Field cosine_data(const Geometry& geo, double mean, double amp) {
    Field u(geo.grid, geo.spec);
    u.values.col(0).setConstant(mean);
    for (int i = 0; i < geo.grid.nodes(); ++i) u.values(i, 1) = amp * geo.grid.x[i];
    return u;
}

Eigen::MatrixXd stacked_laplacian(const Geometry& geo) {
    int nn = geo.grid.nodes();
    int nm = geo.modes.count();
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(nn * nm, nn * nm);
    for (int m = 0; m < nm; ++m) {
        const auto& b = geo.fv[m];
        for (int i = 0; i < nn; ++i) {
            lap(m * nn + i, m * nn + i) = b.diag[i];
            if (i > 0) lap(m * nn + i, m * nn + i - 1) = b.lower[i];
            if (i + 1 < nn) lap(m * nn + i, m * nn + i + 1) = b.upper[i];
        }
    }
    return lap;
}

}  // namespace

TEST_CASE("linearization at v = 0 and v = 1") {
    auto geo = small_geometry(32, 3);
    Field zero(geo.grid, geo.spec);
    Eigen::MatrixXd lap = stacked_laplacian(geo);

    double scale = (lap * lap).cwiseAbs().maxCoeff();
    auto a0 = linearization(zero, geo);
    double err0 = (a0.matrix - (lap * lap + lap)).cwiseAbs().maxCoeff();
    CHECK(err0 <= 1e-12 * scale);

    Field one(geo.grid, geo.spec);
    one.values.col(0).setOnes();
    auto a1 = linearization(one, geo);
    double err1 = (a1.matrix - (lap * lap - 2.0 * lap)).cwiseAbs().maxCoeff();
    CHECK(err1 <= 1e-12 * scale);
}

TEST_CASE("multiplication by cos^2 couples modes two apart only") {
    auto geo = small_geometry(32, 5);
    Field v(geo.grid, geo.spec);
    v.values.col(1).setOnes();  // v = cos(theta)
    auto a = linearization(v, geo);
    int nn = geo.grid.nodes();
    // inspect the coupling pattern through the assembled matrix at one node
    int i = nn / 2;
    for (int m = 0; m < geo.modes.count(); ++m) {
        for (int mp = 0; mp < geo.modes.count(); ++mp) {
            int dj = std::abs(geo.modes[m].j - geo.modes[mp].j);
            bool same_kind = geo.modes[m].branch == geo.modes[mp].branch;
            double block = std::abs(a.matrix(m * nn + i, mp * nn + i));
            if (!(dj == 0 || (dj == 2 && same_kind))) {
                // compare against the Laplacian scale at this node
                double scale = std::abs(geo.fv[mp].diag[i]);
                CHECK(block <= 1e-12 * scale);
            }
        }
    }
}

TEST_CASE("nonlinearity on constants and on the radial coordinate") {
    auto geo = small_geometry(256, 3);
    Field c(geo.grid, geo.spec);
    c.values.col(0).setConstant(0.7);
    CHECK(nonlinearity(c, geo).values.cwiseAbs().maxCoeff() <= 1e-12);

    Field x(geo.grid, geo.spec);
    for (int i = 0; i < geo.grid.nodes(); ++i) x.values(i, 0) = geo.grid.x[i];
    Field f_plus = nonlinearity(x, geo, SignConvention::IdentityPlus);
    Field f_minus = nonlinearity(x, geo, SignConvention::Minus);
    for (int i = 1; i < geo.grid.nodes() - 1; ++i) {
        CHECK(f_plus.values(i, 0) ==
              doctest::Approx(6.0 * geo.grid.x[i]).epsilon(2e-3));
        CHECK(f_minus.values(i, 0) ==
              doctest::Approx(-6.0 * geo.grid.x[i]).epsilon(2e-3));
    }
}

TEST_CASE("constant states are fixed points of the stabilized step") {
    auto geo = small_geometry();
    SolverConfig cfg;
    cfg.tau = 1e-4;
    for (double m : {0.0, 0.3, -1.2}) {
        Field c(geo.grid, geo.spec);
        c.values.col(0).setConstant(m);
        Field c1 = step(c, cfg.tau, cfg, geo);
        CHECK((c1.values - c.values).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, std::abs(m)));
    }
}

TEST_CASE("single-mode small-amplitude step matches the per-mode symbol") {
    auto geo = small_geometry(48, 3);
    SolverConfig cfg;
    cfg.tau = 1e-4;
    double s = cfg.stabilization;

    // eigenvector of the mode-2 flux-form block
    int mode = 3;  // j = 2, cos branch
    int nn = geo.grid.nodes();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nn, nn);
    const auto& b = geo.fv[mode];
    for (int i = 0; i < nn; ++i) {
        a(i, i) = b.diag[i];
        if (i > 0) a(i, i - 1) = b.lower[i];
        if (i + 1 < nn) a(i, i + 1) = b.upper[i];
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    int pick = 0;
    for (int k = 0; k < nn; ++k)
        if (es.eigenvalues()[k].real() > es.eigenvalues()[pick].real()) pick = k;
    double mu = es.eigenvalues()[pick].real();
    Eigen::VectorXd v = es.eigenvectors().col(pick).real();
    v /= v.cwiseAbs().maxCoeff();

    double delta = 1e-5;
    Field u(geo.grid, geo.spec);
    u.values.col(mode) = delta * v;
    Field u1 = step(u, cfg.tau, cfg, geo);

    double predicted = (1.0 - cfg.tau * (1.0 + s) * mu) / (1.0 + cfg.tau * mu * mu - cfg.tau * s * mu);
    double got = u1.values.col(mode).dot(v) / v.squaredNorm() / delta;
    CHECK(got == doctest::Approx(predicted).epsilon(1e-8));
}

TEST_CASE("solve conserves mass from a uniform state and rejects bad input") {
    auto geo = small_geometry();
    SolverConfig cfg;
    cfg.tau = 1e-4;
    cfg.t_final = 10 * cfg.tau;
    cfg.snapshot_every = 0;
    Field u0(geo.grid, geo.spec);
    u0.values.col(0).setConstant(0.1);
    auto result = solve(u0, cfg, geo);
    CHECK(result.status == SolveStatus::Completed);
    double m0 = result.diagnostics.front().mass;
    for (const auto& d : result.diagnostics)
        CHECK(std::abs(d.mass - m0) <= 1e-10 * std::abs(m0));

    SolverConfig bad = cfg;
    bad.tau = 0.0;
    CHECK_THROWS_AS(solve(u0, bad, geo), std::invalid_argument);

    Field poisoned = u0;
    poisoned.values(5, 0) = std::nan("");
    auto failed = solve(poisoned, cfg, geo);
    CHECK(failed.status == SolveStatus::StepFailure);
    CHECK(!failed.message.empty());
}

TEST_CASE("energy dissipates along a genuine run, both warpings") {
    for (bool warped : {false, true}) {
        auto geo = small_geometry(64, 4, 1e-3,
                                  warped ? WarpProfile::polynomial({0.5}) : WarpProfile::straight());
        SolverConfig cfg;
        cfg.tau = 1e-4;
        cfg.t_final = 50 * cfg.tau;
        cfg.snapshot_every = 0;
        auto result = solve(cosine_data(geo, 0.1, 0.5), cfg, geo);
        REQUIRE(result.status == SolveStatus::Completed);
        for (size_t k = 1; k < result.diagnostics.size(); ++k)
            CHECK(result.diagnostics[k].energy <=
                  result.diagnostics[k - 1].energy + 1e-10);
        double m0 = result.diagnostics.front().mass;
        for (const auto& d : result.diagnostics)
            CHECK(std::abs(d.mass - m0) <= 1e-10 * std::abs(m0) + 1e-12);
    }
}

TEST_CASE("stabilized and linearized schemes agree to first order in tau") {
    auto geo = small_geometry(48, 3);
    Field u0 = cosine_data(geo, 0.1, 0.5);
    auto terminal_distance = [&](double tau) {
        SolverConfig a;
        a.tau = tau;
        a.t_final = 16 * 1e-4;  // fixed horizon
        a.snapshot_every = 0;
        SolverConfig b = a;
        b.scheme = Scheme::LinearizedImplicit;
        Field ua = solve(u0, a, geo).final_state;
        Field ub = solve(u0, b, geo).final_state;
        return (ua.values - ub.values).norm();
    };
    double d1 = terminal_distance(2e-4);
    double d2 = terminal_distance(1e-4);
    CHECK(d1 / d2 >= 1.7);
    CHECK(d1 / d2 <= 2.3);
}

TEST_CASE("diagnostics on reference states") {
    auto geo = small_geometry(4096, 3, 1e-3);
    double x_min = geo.grid.x_min;
    double vol = std::numbers::pi * (1.0 - x_min * x_min);

    Field ones(geo.grid, geo.spec);
    ones.values.col(0).setOnes();
    auto d1 = diagnostics(ones, geo);
    CHECK(d1.energy == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(d1.mass == doctest::Approx(vol).epsilon(1e-5));

    Field zero(geo.grid, geo.spec);
    auto d0 = diagnostics(zero, geo);
    CHECK(d0.energy == doctest::Approx(0.25 * vol).epsilon(1e-5));
    CHECK(d0.mass == doctest::Approx(0.0).epsilon(1e-12));

    // u = x cos(theta): closed-form double-well and gradient integrals
    Field u(geo.grid, geo.spec);
    for (int i = 0; i < geo.grid.nodes(); ++i) u.values(i, 1) = geo.grid.x[i];
    auto du = diagnostics(u, geo);
    auto r = [&](double k) { return (1.0 - std::pow(x_min, k)) / k; };
    double grad = 0.5 * 2.0 * std::numbers::pi * r(2.0);
    double well = 0.25 * (r(6.0) * 3.0 * std::numbers::pi / 4.0 -
                          2.0 * r(4.0) * std::numbers::pi + r(2.0) * 2.0 * std::numbers::pi);
    CHECK(du.energy == doctest::Approx(grad + well).epsilon(1e-6));
}

TEST_CASE("linearized operator probe exposes SPD grams") {
    auto geo = small_geometry(32, 3);
    Field v(geo.grid, geo.spec);
    v.values.col(0).setConstant(0.3);
    auto probe = linearization(v, geo).probe(geo, 1.0);
    REQUIRE(probe.n_blocks() == 1);
    Eigen::LLT<Eigen::MatrixXd> llt(probe.grams[0]);
    CHECK(llt.info() == Eigen::Success);
}
