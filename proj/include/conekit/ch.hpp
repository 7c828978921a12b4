#pragma once

#include <memory>
#include <string>
#include <vector>

#include "conekit/calculus.hpp"
#include "conekit/operators.hpp"

namespace conekit {

/// Discretization bundle for one Cahn-Hilliard run on the circle cone:
/// assembled Laplacian (probe closure), the conservative flux-form
/// realization per branch used by the time stepper, and the dealiased
/// angular transform for the cubic nonlinearity.
struct Geometry {
    RadialGrid grid;
    CrossSectionSpec spec;
    WarpProfile warp;
    double gamma = -0.5;
    int s = 0;
    ModeTable modes;
    DiscreteOperator laplacian;
    std::vector<DiscreteOperator::FvBands> fv;
    std::shared_ptr<CircleTransform> transform;  // null for non-circle kinds

    static Geometry make(const RadialGrid& grid, const CrossSectionSpec& spec,
                         const WarpProfile& warp, double gamma, int s = 0);

    /// Flux-form application of the Laplacian to one branch.
    Eigen::VectorXd apply_fv(int m, const Eigen::VectorXd& u) const;
    Field apply_fv(const Field& u) const;

    /// Mass functional: integral of u over the truncated cone.
    double mass(const Field& u) const;
};

// sign of the extracted nonlinearity F(u) = -/+ 6 u (grad u, grad u)_g;
// IdentityPlus is the convention consistent with the conservative form
enum class SignConvention { Minus, IdentityPlus };
enum class Scheme { StabilizedSemiImplicit, LinearizedImplicit };

struct SolverConfig {
    double tau = 1e-4;
    double t_final = 0.1;
    Scheme scheme = Scheme::StabilizedSemiImplicit;
    double stabilization = 2.0;  // S
    double c0 = 1.0;             // shift of the linearized-implicit scheme
    SignConvention sign = SignConvention::IdentityPlus;
    int snapshot_every = 100;    // steps between stored snapshots; 0 = none

    void validate() const;
};

/// Mode-coupled linearization  A(v) = Delta^2 + Delta - 3 M_{v^2} Delta  on
/// the stacked per-branch node values (flux-form Delta blocks).
struct LinearizedOperator {
    Eigen::MatrixXd matrix;
    int nodes = 0;
    int n_modes = 0;

    /// Probe view of A(v) + c0 with block-diagonal Mellin Gram.
    BlockOperator probe(const Geometry& geo, double c0) const;
};

LinearizedOperator linearization(const Field& v, const Geometry& geo);

/// F(u) = -/+ 6 u (grad u, grad u)_g truncated to the retained band.
Field nonlinearity(const Field& u, const Geometry& geo,
                   SignConvention sign = SignConvention::IdentityPlus);

struct DiagnosticsRow {
    int step = 0;
    double time = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    double step_residual = 0.0;  // relative change of the state in this step
};

/// (mass, energy): conserved integral and the double-well Lyapunov value
/// 1/2 |grad u|^2 + 1/4 (u^2-1)^2 integrated over the cone.
DiagnosticsRow diagnostics(const Field& u, const Geometry& geo);

struct SnapshotCoefficient {
    SingularFunction basis;
    double value = 0.0;
};

struct Snapshot {
    double time = 0.0;
    Field field;
    double constant = 0.0;                         // tip value of the mode-0 branch
    std::vector<SnapshotCoefficient> coefficients; // least-squares weights on the domain basis
};

enum class SolveStatus { Completed, StepFailure };

struct SolveResult {
    std::vector<Snapshot> snapshots;
    std::vector<DiagnosticsRow> diagnostics;
    SolveStatus status = SolveStatus::Completed;
    std::string message;
    Field final_state;
};

/// One time step; throws std::runtime_error on solve failure or NaN.
Field step(const Field& state, double tau, const SolverConfig& cfg, const Geometry& geo);

/// Runs step() to t_final, recording diagnostics every step and snapshots at
/// the configured cadence; on failure the partial result is returned.
SolveResult solve(const Field& initial, const SolverConfig& cfg, const Geometry& geo);

}  // namespace conekit
