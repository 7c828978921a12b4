#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "conekit/ch.hpp"
#include "conekit/fit.hpp"

namespace conekit::io {

struct ProbeConfig {
    double c = 1.0;
    std::vector<double> thetas;  // empty = SectorProbeConfig defaults
    int n_lambda = 20;
    double lambda_min = 1e-2;
    double lambda_max = 1e6;
    double t_range = 4.0;
    int n_t = 33;
    std::vector<double> eps = {0.4, 0.2, 0.1, 0.05};
};

struct FitConfig {
    double x_lo = 0.0;  // 0 = window defaults from the grid
    double x_hi = 0.0;
    std::vector<double> times;
    std::string snapshot;  // input CSV for the standalone fit subcommand
};

struct RunConfig {
    CrossSectionSpec cross_section;
    WarpProfile warp;
    int grid_cells = 256;
    double x_min = 1e-4;
    double gamma = 0.0;
    bool gamma_given = false;  // absent = weight-window midpoint
    int s = 0;
    double p = 2.0;
    SolverConfig solver;
    std::string initial = "uniform:0.1";
    ProbeConfig probe;
    FitConfig fit;
    std::string norm_input;
    std::uint64_t seed = 0;

    double effective_gamma() const;
    RadialGrid make_grid() const { return RadialGrid::make(grid_cells, x_min); }
    Geometry make_geometry() const;
    Field make_initial(const Geometry& geo) const;
};

struct ConfigError : std::runtime_error {
    std::vector<std::string> messages;
    explicit ConfigError(std::vector<std::string> msgs);
};

/// Parses and validates; all schema and cross-validation errors are
/// collected and reported together (unknown keys are errors).
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

}  // namespace conekit::io
