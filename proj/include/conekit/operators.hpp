#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "conekit/field.hpp"
#include "conekit/mellin.hpp"

namespace conekit {

enum class OuterBc { Neumann, Dirichlet };

struct SparseTriplet {
    int mode;
    int row;
    int col;
    double value;
};

/// Discrete radial realization of a cone operator, decoupled per eigenbranch.
///
/// Interior rows realize
///     x^{-2} ( a2(x) (x d/dx)^2 + a1(x) (x d/dx) + lambda_j a0(x) ) u
/// with second-order centered differences in t = -log x.  The assembled solve
/// systems close the grid part with the outer boundary row at x = 1 and the
/// tip rows (Dirichlet-zero for the minimal part at x_min plus an
/// exponent-matching Robin row at the penultimate node); the constant
/// function enters as an extra column where the domain includes it.
struct DiscreteOperator {
    RadialGrid grid;
    CrossSectionSpec spec;
    ModeTable modes;
    WarpProfile warp;
    DomainSpec domain;
    OuterBc outer_bc = OuterBc::Neumann;
    CutoffOmega omega;

    bool composed = false;      // apply = L(L(.)), bilaplacian via composition
    bool perturbation = false;  // apply-only operator (B_eps), no closure rows

    Eigen::VectorXd a2, a1, a0;  // coefficient profiles on the nodes

    int interior_margin() const { return composed ? 2 : 1; }

    /// Number of coefficient columns attached to branch m (constant and
    /// singular basis entries of the domain that live on this branch).
    int n_coeff_columns(int m) const;

    /// (n+1) x (n+1) matrix of one application of the stencil (one-sided ends).
    Eigen::MatrixXd apply_matrix(int m) const;

    Eigen::VectorXd apply_mode(int m, const Eigen::VectorXd& vals) const;
    Field apply(const Field& u) const;
    Field apply(const AugmentedField& u) const;

    /// Square system for (alpha + beta * op) in domain coordinates
    /// [v_0..v_n, coeffs]; right-hand sides are placed on rows 1..n-1.
    /// Only available for second-order (non-composed) assemblies.
    Eigen::MatrixXcd solve_matrix(int m, std::complex<double> alpha,
                                  std::complex<double> beta) const;

    /// Maps a radial right-hand side to the rhs vector of solve_matrix.
    Eigen::VectorXcd place_rhs(int m, const Eigen::VectorXcd& f) const;

    /// Evaluation map E from domain coordinates to total grid values.
    Eigen::MatrixXd evaluation_map(int m) const;

    /// Constraint rows (outer BC, tip Dirichlet, Robin closure) on the
    /// domain coordinates.
    Eigen::MatrixXd constraint_rows(int m) const;

    /// The closed operator reduced to interior node values: a dense
    /// (n-1)x(n-1) matrix whose resolvent agrees with solve_matrix.
    Eigen::MatrixXd reduced_matrix(int m) const;

    /// Interior values -> total grid values through the discrete closure.
    Eigen::MatrixXd closure_value_map(int m) const;

    /// Conservative flux-form realization (tridiagonal, zero-flux ends);
    /// only available for the plain (non-blended) Laplacian coefficients.
    struct FvBands {
        Eigen::VectorXd lower, diag, upper;  // size n+1 (lower[0], upper[n] unused)
        Eigen::VectorXd cell_measure;        // a_i * l_i, the discrete volume of cell i
    };
    FvBands fv_bands(int m) const;

    /// Robin exponent of branch m: smallest indicial root above the lower
    /// edge of the singular-exponent window for weight gamma and order mu.
    double robin_exponent(int m) const;

    int bandwidth(int m) const;
    std::vector<SparseTriplet> triplets() const;
};

DiscreteOperator assemble_laplacian(const RadialGrid& grid, const CrossSectionSpec& spec,
                                    const WarpProfile& warp, const DomainSpec& domain,
                                    OuterBc outer_bc = OuterBc::Neumann);

DiscreteOperator assemble_bilaplacian(const RadialGrid& grid, const CrossSectionSpec& spec,
                                      const WarpProfile& warp, const DomainSpec& domain,
                                      OuterBc outer_bc = OuterBc::Neumann);

struct InterpolantPair {
    DiscreteOperator delta_eps;  // omega_eps * Delta_0 + (1 - omega_eps) * Delta
    DiscreteOperator b_eps;      // Delta - Delta_eps, assembled from the coefficient difference
};

InterpolantPair assemble_interpolant(const RadialGrid& grid, const CrossSectionSpec& spec,
                                     const WarpProfile& warp, const DomainSpec& domain,
                                     double eps, OuterBc outer_bc = OuterBc::Neumann);

/// The x-frozen straight-coefficient operator on the same grid; equals the
/// straight-warp Laplacian assembly.  gamma defaults to the window midpoint.
DiscreteOperator model_cone_operator(const RadialGrid& grid, const CrossSectionSpec& spec,
                                     std::optional<double> gamma = std::nullopt);

/// Pointwise metric gradient form (grad u, grad v)_g on the circle, returned
/// in mode representation with the product bandwidth.
Field gradient_form(const Field& u, const Field& v, const WarpProfile& warp);
Field gradient_form(const AugmentedField& u, const AugmentedField& v, const WarpProfile& warp);

struct PowerOpts {
    double tol = 1e-6;
    int max_iter = 500;
};

struct NormEstimate {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Power-iteration estimate of max ||A u||_{Gto} / ||u||_{Gfrom} with the
/// deterministic all-ones start vector.
NormEstimate induced_norm(const Eigen::MatrixXd& a, const Eigen::MatrixXd& g_from,
                          const Eigen::MatrixXd& g_to, const PowerOpts& opts = {});
NormEstimate induced_norm(const Eigen::MatrixXcd& a, const Eigen::MatrixXd& g_from,
                          const Eigen::MatrixXd& g_to, const PowerOpts& opts = {});

/// Induced norm of op from the graph norm of Delta (reference operator) to
/// the (s_to, gamma_to) norm, maximized over modes.
NormEstimate operator_norm_graph_to_mellin(const DiscreteOperator& op,
                                           const DiscreteOperator& reference, int s_to,
                                           double gamma_to, const PowerOpts& opts = {});

}  // namespace conekit
