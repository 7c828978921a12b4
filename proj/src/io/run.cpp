#include "conekit/io/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>

namespace conekit::io {

namespace {

std::string timestamp_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string out_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void run_analyze(const RunConfig& cfg, const std::string& dir, RunManifest& manifest) {
    auto modes = eigen_data(cfg.cross_section);
    std::string report = analyze_report_json(cfg.cross_section.n, cfg.effective_gamma(), modes);
    std::string path = out_path(dir, "analyze.json");
    write_text(path, report);
    manifest.outputs.push_back(path);
    manifest.checks.push_back({"conormal_tables", true, ""});
}

void run_probe_resolvent(const RunConfig& cfg, const std::string& dir, RunManifest& manifest) {
    if (!(cfg.probe.c > 0.0)) {
        manifest.checks.push_back({"positive_shift", false, "probe shift c must be positive"});
        return;
    }
    manifest.checks.push_back({"positive_shift", true, ""});
    Geometry geo = cfg.make_geometry();
    BlockOperator op = shifted_laplacian_probe(geo.laplacian, cfg.probe.c, cfg.s,
                                               cfg.effective_gamma());
    SectorProbeConfig probe;
    probe.c = cfg.probe.c;
    if (!cfg.probe.thetas.empty()) probe.thetas = cfg.probe.thetas;
    probe.n_lambda = cfg.probe.n_lambda;
    probe.lambda_min = cfg.probe.lambda_min;
    probe.lambda_max = cfg.probe.lambda_max;
    probe.s = cfg.s;
    probe.gamma = cfg.effective_gamma();
    auto survey = resolvent_survey(op, probe);

    std::string csv = out_path(dir, "resolvent.csv");
    write_resolvent_csv(csv, survey);
    manifest.outputs.push_back(csv);
    std::string js = out_path(dir, "resolvent.json");
    write_text(js, resolvent_report_json(survey));
    manifest.outputs.push_back(js);
    std::string trip = out_path(dir, "laplacian_triplets.csv");
    write_triplets_csv(trip, geo.laplacian);
    manifest.outputs.push_back(trip);

    bool finite = true;
    for (double k : survey.k_theta) finite = finite && std::isfinite(k) && k > 0.0;
    manifest.checks.push_back({"survey_finite", finite, ""});
}

void run_probe_bip(const RunConfig& cfg, const std::string& dir, RunManifest& manifest) {
    if (!(cfg.probe.c > 0.0)) {
        manifest.checks.push_back({"positive_shift", false, "probe shift c must be positive"});
        return;
    }
    manifest.checks.push_back({"positive_shift", true, ""});
    Geometry geo = cfg.make_geometry();
    BlockOperator op = shifted_laplacian_probe(geo.laplacian, cfg.probe.c, cfg.s,
                                               cfg.effective_gamma());
    auto report = bip_envelope(op, cfg.probe.t_range, cfg.probe.n_t);

    std::string csv = out_path(dir, "bip.csv");
    write_bip_csv(csv, report);
    manifest.outputs.push_back(csv);
    std::string js = out_path(dir, "bip.json");
    write_text(js, bip_report_json(report));
    manifest.outputs.push_back(js);

    bool finite = std::isfinite(report.m_bound) && std::isfinite(report.phi) &&
                  report.m_bound >= 1.0;
    manifest.checks.push_back({"envelope_finite", finite, ""});
    manifest.checks.push_back({"paths_converged", report.all_converged, ""});
}

void run_solve(const RunConfig& cfg, const std::string& dir, RunManifest& manifest) {
    Geometry geo = cfg.make_geometry();
    Field initial = cfg.make_initial(geo);
    SolveResult result = solve(initial, cfg.solver, geo);

    std::string diag = out_path(dir, "diagnostics.csv");
    write_diagnostics_csv(diag, result.diagnostics);
    manifest.outputs.push_back(diag);
    for (size_t k = 0; k < result.snapshots.size(); ++k) {
        char name[48];
        std::snprintf(name, sizeof name, "snapshot_%04zu.csv", k);
        std::string path = out_path(dir, name);
        write_snapshot_csv(path, result.snapshots[k].field);
        manifest.outputs.push_back(path);
    }
    std::string coeffs = out_path(dir, "coefficients.json");
    write_text(coeffs, snapshot_coefficients_json(result.snapshots));
    manifest.outputs.push_back(coeffs);
    std::string js = out_path(dir, "solve.json");
    write_text(js, solve_report_json(result));
    manifest.outputs.push_back(js);

    manifest.checks.push_back({"completed", result.status == SolveStatus::Completed,
                               result.message});
    double mass0 = result.diagnostics.front().mass;
    double drift = 0.0, energy_violation = 0.0;
    for (size_t k = 1; k < result.diagnostics.size(); ++k) {
        drift = std::max(drift, std::abs(result.diagnostics[k].mass - mass0));
        energy_violation = std::max(energy_violation, result.diagnostics[k].energy -
                                                          result.diagnostics[k - 1].energy);
    }
    bool mass_ok = drift <= 1e-10 * std::abs(mass0) + 1e-12;
    manifest.checks.push_back({"mass_conservation", mass_ok, ""});
    manifest.checks.push_back({"energy_dissipation", energy_violation <= 1e-10, ""});
}

void run_fit(const RunConfig& cfg, const std::string& dir, RunManifest& manifest) {
    if (cfg.fit.snapshot.empty()) {
        manifest.checks.push_back(
            {"input_present", false, "[fit] snapshot must point at a solve snapshot CSV"});
        return;
    }
    manifest.checks.push_back({"input_present", true, ""});
    RadialGrid grid = cfg.make_grid();
    Field field = read_snapshot_csv(cfg.fit.snapshot, grid, cfg.cross_section);
    FitWindow window = FitWindow::defaults(grid);
    if (cfg.fit.x_lo > 0.0) window.x_lo = cfg.fit.x_lo;
    if (cfg.fit.x_hi > 0.0) window.x_hi = cfg.fit.x_hi;
    auto predicted = bilaplacian_domain_asymptotics(cfg.cross_section.n, cfg.effective_gamma(),
                                                    eigen_data(cfg.cross_section))
                         .basis;
    FitReport report = fit_expansion(field, predicted, true, window);
    std::string js = out_path(dir, "fit.json");
    write_text(js, fit_report_json({report}));
    manifest.outputs.push_back(js);

    bool matched = true;
    for (const auto& row : report.rows)
        if (row.has_prediction && row.fitted.has_signal) matched = matched && row.match;
    manifest.checks.push_back({"exponents_match", matched, ""});
}

void run_norm(const RunConfig& cfg, const std::string& dir, RunManifest& manifest) {
    if (cfg.norm_input.empty()) {
        manifest.checks.push_back(
            {"input_present", false, "[norm] input must point at a snapshot CSV"});
        return;
    }
    manifest.checks.push_back({"input_present", true, ""});
    RadialGrid grid = cfg.make_grid();
    Field field = read_snapshot_csv(cfg.norm_input, grid, cfg.cross_section);
    double value = hs_norm(field, {cfg.s, cfg.effective_gamma(), cfg.p, cfg.warp});
    std::string js = out_path(dir, "norm.json");
    write_text(js, norm_report_json(cfg.s, cfg.effective_gamma(), cfg.p, value));
    manifest.outputs.push_back(js);
    manifest.checks.push_back({"norm_finite", std::isfinite(value), ""});
}

}  // namespace

RunManifest run(const std::string& subcommand, const RunConfig& cfg,
                const std::string& config_bytes, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    RunManifest manifest;
    manifest.subcommand = subcommand;
    manifest.config_hash = fnv1a_hash(config_bytes);
    manifest.timestamp = timestamp_now();

    try {
        if (subcommand == "analyze")
            run_analyze(cfg, out_dir, manifest);
        else if (subcommand == "probe-resolvent")
            run_probe_resolvent(cfg, out_dir, manifest);
        else if (subcommand == "probe-bip")
            run_probe_bip(cfg, out_dir, manifest);
        else if (subcommand == "solve")
            run_solve(cfg, out_dir, manifest);
        else if (subcommand == "fit")
            run_fit(cfg, out_dir, manifest);
        else if (subcommand == "norm")
            run_norm(cfg, out_dir, manifest);
        else
            manifest.checks.push_back({"known_subcommand", false,
                                       "unknown subcommand '" + subcommand + "'"});
    } catch (const std::exception& e) {
        manifest.checks.push_back({"run_completed", false, e.what()});
    }

    write_text(out_path(out_dir, "manifest.json"), manifest.to_json());
    return manifest;
}

}  // namespace conekit::io
