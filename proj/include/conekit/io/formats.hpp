#pragma once

#include <string>
#include <vector>

#include "conekit/calculus.hpp"
#include "conekit/ch.hpp"
#include "conekit/fit.hpp"

namespace conekit::io {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// --- CSV ---------------------------------------------------------------

void write_snapshot_csv(const std::string& path, const Field& field);
Field read_snapshot_csv(const std::string& path, const RadialGrid& grid,
                        const CrossSectionSpec& spec);

void write_diagnostics_csv(const std::string& path, const std::vector<DiagnosticsRow>& rows);
void write_resolvent_csv(const std::string& path, const ResolventSurvey& survey);
void write_bip_csv(const std::string& path, const BipReport& report);
void write_triplets_csv(const std::string& path, const DiscreteOperator& op);

// --- JSON reports --------------------------------------------------------

std::string analyze_report_json(int n, double gamma, const std::vector<EigenEntry>& modes);
std::string norm_report_json(int s, double gamma, double p, double norm);
std::string resolvent_report_json(const ResolventSurvey& survey);
std::string bip_report_json(const BipReport& report);
std::string solve_report_json(const SolveResult& result);
std::string fit_report_json(const std::vector<FitReport>& reports);
std::string snapshot_coefficients_json(const std::vector<Snapshot>& snapshots);

// --- manifest ------------------------------------------------------------

struct ManifestCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct RunManifest {
    std::string subcommand;
    std::string config_hash;
    std::string tool_version = kToolVersion;
    std::string timestamp;  // excluded from the config hash
    std::vector<std::string> outputs;
    std::vector<ManifestCheck> checks;

    bool all_passed() const;
    std::string to_json() const;
};

std::string fnv1a_hash(const std::string& bytes);
void write_text(const std::string& path, const std::string& text);

}  // namespace conekit::io
