#include "conekit/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace conekit {

RadialGrid RadialGrid::make(int n_cells, double x_min) {
    if (n_cells < 16) throw std::invalid_argument("radial grid too coarse: need at least 16 cells");
    if (!(x_min > 0.0) || x_min > 0.01)
        throw std::invalid_argument("x_min must lie in (0, 0.01]");
    RadialGrid g;
    g.n = n_cells;
    g.x_min = x_min;
    g.t_max = -std::log(x_min);
    g.dt = g.t_max / n_cells;
    g.t.resize(n_cells + 1);
    g.x.resize(n_cells + 1);
    for (int i = 0; i <= n_cells; ++i) {
        g.t[i] = i * g.dt;
        g.x[i] = std::exp(-g.t[i]);
    }
    g.x[0] = 1.0;
    g.x[n_cells] = x_min;
    return g;
}

namespace {
// C-infinity ramp: 0 for s <= 0, 1 for s >= 1, strictly monotone between.
double smooth_ramp(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    double a = std::exp(-1.0 / s);
    double b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}
}  // namespace

double CutoffOmega::operator()(double x) const {
    if (x <= r1) return 1.0;
    if (x >= r2) return 0.0;
    // transition parametrized in log x so the bump respects the radial scaling
    double s = (std::log(r2) - std::log(x)) / (std::log(r2) - std::log(r1));
    return smooth_ramp(s);
}

}  // namespace conekit
