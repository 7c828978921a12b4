#pragma once

#include <Eigen/Dense>

#include "conekit/field.hpp"

namespace conekit {

struct NormRequest {
    int s = 0;
    double gamma = 0.0;
    double p = 2.0;
    WarpProfile warp;
};

/// Radial quadrature weights of the weighted measure
///   |x^{(n+1)/2 - gamma} . |^2  f(x)^{n/2}  dx/x
/// as trapezoid weights in t (the squared pointwise weight is included, so
/// a 0th-order norm is  sqrt(sum_i w_i u_i^2 * nu_m)  per branch).
Eigen::VectorXd radial_weights(const RadialGrid& grid, const WarpProfile& warp, int n,
                               double gamma);

/// r-fold application of x d/dx = -d/dt, second order (one-sided at the ends).
Eigen::MatrixXd euler_derivative_matrix(const RadialGrid& grid, int r);

/// Gram matrix of the (s, gamma, p=2) norm restricted to one branch: for a
/// radial vector u of branch m, u^T G u = sum_{r<=s} (1-lambda_m)^{s-r}
/// nu_m * |W^{1/2} D^r u|^2.
Eigen::MatrixXd mode_gram(const RadialGrid& grid, const WarpProfile& warp, int n, int s,
                          double gamma, double lambda, double basis_norm_sq);

/// Mellin-Sobolev norm of Eq-(1.5) type.  p = 2 evaluates the angular
/// derivatives spectrally via powers of (1 - lambda_j); p != 2 (circle only)
/// synthesizes onto a theta grid and integrates pointwise.
double hs_norm(const Field& u, const NormRequest& req);

struct TipBoundReport {
    double weighted_sup = 0.0;  // max over near-tip nodes of |u| x^{(n+1)/2-gamma}
    double norm = 0.0;
    double ratio = 0.0;
    bool zero_field = false;
};

/// Pointwise tip bound check: the weighted sup against the (s, gamma) norm.
/// Requires s > (n+1)/2 (p = 2 embedding threshold).
TipBoundReport tip_bound_check(const Field& u, int s, double gamma,
                               const WarpProfile& warp = WarpProfile::straight());

/// ||uv||_{s,gamma} / (||u||_{s,gamma} ||v||_{s,(n+1)/2}); circle only.
double algebra_defect(const Field& u, const Field& v, int s, double gamma,
                      const WarpProfile& warp = WarpProfile::straight());

/// Pointwise product of two circle fields; the result carries the summed
/// bandwidth so the product is represented exactly.
Field pointwise_product(const Field& u, const Field& v);

}  // namespace conekit
