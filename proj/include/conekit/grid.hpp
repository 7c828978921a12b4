#pragma once

#include <vector>

namespace conekit {

/// Uniform grid in t = -log x: t_i = i*dt, i = 0..n, so x_0 = 1 and
/// x_n = x_min.  Euler derivatives x d/dx = -d/dt become constant-coefficient
/// difference stencils on this grid.
struct RadialGrid {
    int n = 0;  // number of cells; n+1 nodes
    double x_min = 1e-4;
    double dt = 0.0;
    double t_max = 0.0;
    std::vector<double> t;
    std::vector<double> x;

    int nodes() const { return n + 1; }

    static RadialGrid make(int n_cells, double x_min);
};

/// Smooth radial cutoff: 1 on x <= r1, 0 on x >= r2, with a C-infinity
/// transition in log x.  The scaled variant is omega(x/eps).
struct CutoffOmega {
    double r1 = 0.25;
    double r2 = 0.5;

    double operator()(double x) const;
    double scaled(double x, double eps) const { return (*this)(x / eps); }
};

}  // namespace conekit
