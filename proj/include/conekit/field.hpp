#pragma once

#include <vector>

#include <Eigen/Dense>

#include "conekit/conormal.hpp"
#include "conekit/cross_section.hpp"
#include "conekit/grid.hpp"

namespace conekit {

/// A function on the (truncated) cone stored as per-eigenbranch radial
/// vectors on the log-radial grid: values(i, m) = u_m(x_i).  The circle uses
/// plain trigonometric branch functions (1, cos j.theta, sin j.theta).
struct Field {
    RadialGrid grid;
    CrossSectionSpec spec;
    ModeTable modes;
    Eigen::MatrixXd values;  // (n+1) x n_modes

    Field() = default;
    Field(const RadialGrid& g, const CrossSectionSpec& s);

    int n_modes() const { return modes.count(); }
    Eigen::VectorXd mode(int m) const { return values.col(m); }

    bool finite() const { return values.allFinite(); }

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(double c);
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double c, Field a);

/// Samples x^{-rho} log^k x * omega(x) on the radial grid.
Eigen::VectorXd sample_singular(const SingularFunction& s, const RadialGrid& grid,
                                const CutoffOmega& omega);

/// A field in domain representation: grid (minimal) part plus coefficients
/// for the constant function and the attached singular basis.  The grid part
/// vanishes at x_min; evaluation adds the sampled basis functions back.
struct AugmentedField {
    Field minimal;
    double constant = 0.0;
    std::vector<SingularFunction> basis;
    Eigen::VectorXd coeffs;  // one per basis entry
    CutoffOmega omega;

    AugmentedField() = default;
    explicit AugmentedField(Field grid_part) : minimal(std::move(grid_part)) {}

    /// Grid part + constant + sum of coeff * sampled singular function.
    Field total() const;
};

}  // namespace conekit
