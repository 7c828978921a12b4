#pragma once

#include <optional>
#include <vector>

#include "conekit/ch.hpp"

namespace conekit {

/// Radial window for near-tip fits; must sit inside the omega == 1 region
/// and span at least one e-fold.
struct FitWindow {
    double x_lo = 0.0;
    double x_hi = 0.0;
    int min_nodes = 8;

    static FitWindow defaults(const RadialGrid& grid) {
        return {4.0 * grid.x_min, 0.1, 8};
    }

    void validate(const RadialGrid& grid) const;
    std::vector<int> nodes(const RadialGrid& grid) const;
};

struct ExponentFit {
    double exponent = 0.0;
    double std_error = 0.0;
    bool has_signal = false;
};

/// Log-log least squares of one radial profile over the window; profiles
/// that vanish on the window give a flagged no-signal result.  An optional
/// constant (the mode-0 tip value) is subtracted first.
ExponentFit fit_exponent(const RadialGrid& grid, const Eigen::VectorXd& profile,
                         const FitWindow& window,
                         std::optional<double> subtract_constant = std::nullopt);

struct ModeFitRow {
    int j = 0;
    int branch = 0;
    ExponentFit fitted;
    double predicted_exponent = 0.0;
    bool has_prediction = false;
    bool match = false;
    double tolerance = 0.0;
    std::vector<double> coefficients;  // weights of the predicted design columns
    double log_coefficient = 0.0;
    bool log_detected = false;
    double residual_ratio = 0.0;  // | residual | / | signal | on the window
};

struct FitReport {
    double time = 0.0;
    std::vector<ModeFitRow> rows;
};

/// Frozen matching tolerance: 0.05 for leading exponents (<= 1.5),
/// 0.1 beyond; calibrated on synthetic data before any solver output.
double match_tolerance(double predicted_exponent);

/// Linear least squares of each branch profile against the predicted
/// singular functions (plus the constant on the mode-0 branch), with
/// exponent extraction and log-term detection by residual drop.
FitReport fit_expansion(const Field& field, const std::vector<SingularFunction>& predicted,
                        bool include_constant, const FitWindow& window);

/// Runs fit_expansion on stored snapshots against the bilaplacian domain
/// prediction of the geometry; throws (listing available times) if a
/// requested time has no snapshot.
std::vector<FitReport> compare(const SolveResult& result, const Geometry& geo,
                               const std::vector<double>& times, const FitWindow& window);

}  // namespace conekit
