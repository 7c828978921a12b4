#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conekit/operators.hpp"

namespace conekit {

/// A closed operator presented as independent square blocks (one per
/// eigenbranch, or a single coupled block), each with the SPD Gram matrix of
/// the norm it is measured in.  Induced norms are maxima over blocks.
struct BlockOperator {
    std::vector<Eigen::MatrixXd> blocks;
    std::vector<Eigen::MatrixXd> grams;
    std::string label;

    int n_blocks() const { return static_cast<int>(blocks.size()); }
};

/// c - Delta on interior node values, with (s, gamma) Mellin norm Grams
/// transported through the discrete closure.
BlockOperator shifted_laplacian_probe(const DiscreteOperator& lap, double c, int s, double gamma);

struct SectorProbeConfig {
    double c = 1.0;
    std::vector<double> thetas;          // angles of the lambda rays, < pi
    int n_lambda = 20;                   // log-spaced magnitudes
    double lambda_min = 1e-2;
    double lambda_max = 1e6;
    int s = 0;
    double gamma = -0.5;

    SectorProbeConfig();
};

struct ResolventSample {
    double theta = 0.0;
    double abs_lambda = 0.0;
    double scaled_norm = 0.0;  // (1 + |lambda|) * ||(op + lambda)^{-1}||
    bool flagged = false;      // singular shift, norm not meaningful
};

struct ResolventSurvey {
    std::vector<ResolventSample> samples;
    std::vector<double> k_theta;  // per-angle sup of scaled_norm
    std::vector<double> thetas;
};

/// Survey of (1+|lambda|) ||(op + lambda)^{-1}|| over rays of the sector.
ResolventSurvey resolvent_survey(const BlockOperator& op, const SectorProbeConfig& cfg);

enum class PowerPath { Eigendecomposition, Contour };

struct ImaginaryPower {
    std::vector<Eigen::MatrixXcd> blocks;  // op^{it} per block
    double norm = 0.0;                     // induced norm, max over blocks
    PowerPath path = PowerPath::Eigendecomposition;
    bool flagged = false;                  // both paths out of tolerance
};

struct PowerOptions {
    double eig_condition_cap = 1e6;
    int min_contour_nodes = 200;
    double contour_tol = 1e-6;
    bool force_contour = false;
};

/// op^{it} for a block operator with spectrum in the open right half-plane.
/// Primary path: eigendecomposition; fallback: Dunford contour around the
/// spectrum (two rays and a connecting arc, composite Gauss quadrature).
ImaginaryPower imaginary_power(const BlockOperator& op, double t, const PowerOptions& opts = {});

struct BipReport {
    std::vector<double> t_samples;
    std::vector<double> norms;
    double m_bound = 1.0;   // envelope constant M >= 1
    double phi = 0.0;       // envelope rate
    double fit_residual = 0.0;
    bool all_converged = true;
};

/// Envelope fit ||op^{it}|| <= M exp(phi |t|) through the upper envelope:
/// phi from the outermost samples, M from the maximal residual.
BipReport bip_envelope(const BlockOperator& op, double t_range = 4.0, int n_samples = 33,
                       const PowerOptions& opts = {});

struct FactorizationSample {
    std::complex<double> lambda;
    double residual = 0.0;
    bool flagged = false;
};

struct FactorizationReport {
    std::vector<FactorizationSample> samples;
    double max_residual = 0.0;
};

/// Relative residual of
///   lambda (op^2 + lambda)^{-1}
///     = (i sqrt(lambda)) (op + i sqrt(lambda))^{-1}
///       (-i sqrt(lambda)) (op - i sqrt(lambda))^{-1}
/// at the given samples (rejected on the branch cut lambda <= 0).
FactorizationReport square_factorization_check(const BlockOperator& op,
                                               const std::vector<std::complex<double>>& lambdas);

/// Samples for the factorization check: n_per_ray magnitudes per ray, log
/// spaced in [1e-2, 1e2] times the squared operator scale.
std::vector<std::complex<double>> factorization_samples(const BlockOperator& op, int n_per_ray);

/// ||block^{i(t+s)} - block^{it} block^{is}|| / ||block^{i(t+s)}||, max over
/// blocks and over a uniform (t, s) grid.
double group_law_residual(const BlockOperator& op, int grid_points = 5, double range = 2.0,
                          const PowerOptions& opts = {});

}  // namespace conekit
