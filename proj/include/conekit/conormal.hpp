#pragma once

#include <complex>
#include <vector>

#include "conekit/cross_section.hpp"

namespace conekit {

/// Roots of the indicial polynomial q^2 - (n-1) q + lambda_j = 0,
///   q^(+/-) = (n-1)/2 +/- sqrt(((n-1)/2)^2 - lambda_j).
/// The radial homogeneous solutions of the mode-j cone Laplacian are
/// x^{-q^-} and x^{-q^+}; q^- <= (n-1)/2 <= q^+.  For integer spectra
/// (circle, sphere) the roots are computed exactly in integer arithmetic.
struct IndicialRoots {
    int j = 0;
    double q_minus = 0.0;
    double q_plus = 0.0;
    bool is_double = false;  // q^- == q^+, i.e. lambda_j == ((n-1)/2)^2
};

/// Admissible weight range for the chosen closed extension:
///   gamma_min = (n-3)/2,
///   eps_bar   = -(n-1)/2 + sqrt(((n-1)/2)^2 - lambda_1),
///   gamma_max = min{ (n-3)/2 + eps_bar, (n+1)/2 }.
struct WeightWindow {
    double gamma_min = 0.0;
    double gamma_max = 0.0;
    double eps_bar = 0.0;

    bool contains(double gamma) const { return gamma_min < gamma && gamma < gamma_max; }
};

enum class PoleSource { FirstFactor, ShiftedFactor, Both };

/// A non-invertibility point of the bilaplacian conormal symbol: a zero of
/// (z - q_j^+)(z - q_j^-)(z + 2 - q_j^+)(z + 2 - q_j^-) for mode j, with its
/// multiplicity (1 or 2) recorded as the pole order of the reciprocal.
struct PoleDatum {
    double rho = 0.0;
    int order = 1;
    int j = 0;
    PoleSource source = PoleSource::FirstFactor;
};

/// One branch of an asymptotics-space element x^{-rho} log^k x * omega(x) e(y)
/// with e an eigenfunction of the mode-j eigenspace.  The exponent of x is
/// -rho; k = 1 only where the governing pole has order 2.
struct SingularFunction {
    double rho = 0.0;
    int log_power = 0;
    int j = 0;
    int branch = 0;

    double exponent() const { return -rho; }
};

enum class ConeOperatorKind { Laplacian, Bilaplacian };

/// Domain descriptor for the chosen closed extension.  The Laplacian uses the
/// minimal domain plus the constants; the bilaplacian additionally carries the
/// singular functions whose exponents fall in the shifted window
/// (n+1)/2 - gamma - 4 < rho < (n+1)/2 - gamma - 2.
struct DomainSpec {
    ConeOperatorKind op = ConeOperatorKind::Laplacian;
    int s = 0;
    double gamma = 0.0;
    int mu = 2;
    std::vector<SingularFunction> singular_basis;
    bool include_constants = true;
};

IndicialRoots indicial_roots(int n, double lambda, int j = 0);

/// Throws std::invalid_argument when lambda_1 >= 0.
WeightWindow weight_window(int n, double lambda_1);

/// Per-mode value of the inverse conormal symbol at z:
///   Laplacian:    1 / ((z - q_j^+)(z - q_j^-)),
///   Bilaplacian:  1 / ((z - q_j^+)(z - q_j^-)(z + 2 - q_j^+)(z + 2 - q_j^-)).
/// Throws PoleProximityError when z is within 1e-9 of a pole of some mode.
std::vector<std::complex<double>> conormal_inverse_eval(std::complex<double> z, int n,
                                                        const std::vector<EigenEntry>& modes,
                                                        ConeOperatorKind op);

struct PoleProximityError : std::runtime_error {
    PoleDatum pole;
    explicit PoleProximityError(const PoleDatum& p);
};

/// Maximal-domain asymptotics of the Laplacian on weight gamma: all roots
/// q_j^{+/-} with (n+1)/2 - gamma - 2 < q < (n+1)/2 - gamma, one entry per
/// eigenbranch, with the log companion at a double root.  Requires gamma
/// strictly inside the weight window and no root on either window line.
std::vector<SingularFunction> laplacian_asymptotics(int n, double gamma,
                                                    const std::vector<EigenEntry>& modes);

struct BilaplacianAsymptotics {
    std::vector<SingularFunction> basis;
    std::vector<PoleDatum> poles;
};

/// Poles of the inverse bilaplacian conormal symbol strictly inside
/// ((n+1)/2 - gamma - 4, (n+1)/2 - gamma - 2), with orders from exact
/// linear-factor multiplicity counting per mode; basis entries carry the log
/// companion exactly at order-2 poles.
BilaplacianAsymptotics bilaplacian_domain_asymptotics(int n, double gamma,
                                                      const std::vector<EigenEntry>& modes);

DomainSpec domain_spec(ConeOperatorKind op, int s, double gamma, int n,
                       const std::vector<EigenEntry>& modes);

}  // namespace conekit
