#include "conekit/io/formats.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace conekit::io {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

void write_snapshot_csv(const std::string& path, const Field& field) {
    std::ostringstream os;
    os << "mode_id,x,value\n";
    for (int m = 0; m < field.n_modes(); ++m)
        for (int i = 0; i < field.grid.nodes(); ++i)
            os << field.modes[m].id << "," << fmt(field.grid.x[i]) << ","
               << fmt(field.values(i, m)) << "\n";
    write_text(path, os.str());
}

Field read_snapshot_csv(const std::string& path, const RadialGrid& grid,
                        const CrossSectionSpec& spec) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read snapshot '" + path + "'");
    Field field(grid, spec);
    std::string line;
    std::getline(in, line);
    if (line != "mode_id,x,value")
        throw std::runtime_error("snapshot '" + path + "' missing the expected header");
    std::vector<int> cursor(field.n_modes(), 0);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        int id = std::stoi(tok);
        std::getline(ss, tok, ',');
        double x = std::stod(tok);
        std::getline(ss, tok, ',');
        double value = std::stod(tok);
        if (id < 0 || id >= field.n_modes())
            throw std::runtime_error("snapshot row references unknown mode id " +
                                     std::to_string(id));
        if (cursor[id] >= grid.nodes())
            throw std::runtime_error("snapshot has too many rows for mode " + std::to_string(id));
        if (std::abs(x - grid.x[cursor[id]]) > 1e-12 * std::max(1.0, x))
            throw std::runtime_error("snapshot radius " + std::to_string(x) +
                                     " does not match the configured grid");
        field.values(cursor[id]++, id) = value;
    }
    for (int m = 0; m < field.n_modes(); ++m)
        if (cursor[m] != grid.nodes())
            throw std::runtime_error("snapshot is missing rows for mode " + std::to_string(m));
    return field;
}

void write_diagnostics_csv(const std::string& path, const std::vector<DiagnosticsRow>& rows) {
    std::ostringstream os;
    os << "step,time,mass,energy\n";
    for (const auto& r : rows)
        os << r.step << "," << fmt(r.time) << "," << fmt(r.mass) << "," << fmt(r.energy) << "\n";
    write_text(path, os.str());
}

void write_resolvent_csv(const std::string& path, const ResolventSurvey& survey) {
    std::ostringstream os;
    os << "theta,abs_lambda,scaled_norm\n";
    for (const auto& s : survey.samples)
        os << fmt(s.theta) << "," << fmt(s.abs_lambda) << "," << fmt(s.scaled_norm) << "\n";
    write_text(path, os.str());
}

void write_bip_csv(const std::string& path, const BipReport& report) {
    std::ostringstream os;
    os << "t,norm,envelope_value\n";
    for (size_t k = 0; k < report.t_samples.size(); ++k) {
        double env = report.m_bound * std::exp(report.phi * std::abs(report.t_samples[k]));
        os << fmt(report.t_samples[k]) << "," << fmt(report.norms[k]) << "," << fmt(env) << "\n";
    }
    write_text(path, os.str());
}

void write_triplets_csv(const std::string& path, const DiscreteOperator& op) {
    std::ostringstream os;
    os << "mode,row,col,value\n";
    for (const auto& t : op.triplets())
        os << t.mode << "," << t.row << "," << t.col << "," << fmt(t.value) << "\n";
    write_text(path, os.str());
}

std::string analyze_report_json(int n, double gamma, const std::vector<EigenEntry>& modes) {
    json out;
    out["schema_version"] = kSchemaVersion;
    WeightWindow w = weight_window(n, modes.at(1).lambda);
    out["window"] = {{"gamma_min", w.gamma_min},
                     {"gamma_max", w.gamma_max},
                     {"eps_bar", w.eps_bar},
                     {"gamma", gamma}};
    out["roots"] = json::array();
    for (const auto& m : modes) {
        IndicialRoots r = indicial_roots(n, m.lambda, m.j);
        out["roots"].push_back({{"j", r.j},
                                {"lambda", m.lambda},
                                {"multiplicity", m.multiplicity},
                                {"q_minus", r.q_minus},
                                {"q_plus", r.q_plus},
                                {"double_root", r.is_double}});
    }
    auto bil = bilaplacian_domain_asymptotics(n, gamma, modes);
    out["poles"] = json::array();
    for (const auto& p : bil.poles) {
        const char* source = p.source == PoleSource::FirstFactor
                                 ? "first"
                                 : (p.source == PoleSource::ShiftedFactor ? "shifted" : "both");
        out["poles"].push_back(
            {{"rho", p.rho}, {"order", p.order}, {"j", p.j}, {"source", source}});
    }
    out["basis"] = json::array();
    for (const auto& s : bil.basis)
        out["basis"].push_back({{"rho", s.rho},
                                {"exponent", s.exponent()},
                                {"log_power", s.log_power},
                                {"j", s.j},
                                {"branch", s.branch}});
    auto lap = laplacian_asymptotics(n, gamma, modes);
    out["laplacian_asymptotics"] = json::array();
    for (const auto& s : lap)
        out["laplacian_asymptotics"].push_back(
            {{"rho", s.rho}, {"log_power", s.log_power}, {"j", s.j}, {"branch", s.branch}});
    return out.dump(2) + "\n";
}

std::string norm_report_json(int s, double gamma, double p, double norm) {
    json out{{"schema_version", kSchemaVersion},
             {"s", s},
             {"gamma", gamma},
             {"p", p},
             {"norm", norm}};
    return out.dump(2) + "\n";
}

std::string resolvent_report_json(const ResolventSurvey& survey) {
    json out;
    out["schema_version"] = kSchemaVersion;
    out["k_theta"] = json::array();
    for (size_t a = 0; a < survey.thetas.size(); ++a)
        out["k_theta"].push_back({{"theta", survey.thetas[a]}, {"sup", survey.k_theta[a]}});
    int flagged = 0;
    for (const auto& s : survey.samples) flagged += s.flagged ? 1 : 0;
    out["flagged_samples"] = flagged;
    return out.dump(2) + "\n";
}

std::string bip_report_json(const BipReport& report) {
    json out{{"schema_version", kSchemaVersion},
             {"M", report.m_bound},
             {"phi", report.phi},
             {"fit_residual", report.fit_residual},
             {"converged", report.all_converged}};
    return out.dump(2) + "\n";
}

std::string solve_report_json(const SolveResult& result) {
    json out;
    out["schema_version"] = kSchemaVersion;
    out["status"] = result.status == SolveStatus::Completed ? "completed" : "step_failure";
    out["message"] = result.message;
    out["steps"] = result.diagnostics.empty() ? 0 : result.diagnostics.back().step;
    out["snapshots"] = json::array();
    for (const auto& s : result.snapshots) out["snapshots"].push_back(s.time);
    return out.dump(2) + "\n";
}

std::string fit_report_json(const std::vector<FitReport>& reports) {
    json out;
    out["schema_version"] = kSchemaVersion;
    out["reports"] = json::array();
    for (const auto& rep : reports) {
        json rows = json::array();
        for (const auto& r : rep.rows) {
            json row{{"j", r.j},
                     {"branch", r.branch},
                     {"has_signal", r.fitted.has_signal},
                     {"residual_ratio", r.residual_ratio},
                     {"coefficients", r.coefficients},
                     {"log_detected", r.log_detected}};
            if (r.fitted.has_signal) {
                row["fitted_exponent"] = r.fitted.exponent;
                row["std_error"] = r.fitted.std_error;
            }
            if (r.has_prediction) {
                row["predicted_exponent"] = r.predicted_exponent;
                row["tolerance"] = r.tolerance;
                row["match"] = r.match;
            }
            if (r.log_detected) row["log_coefficient"] = r.log_coefficient;
            rows.push_back(row);
        }
        out["reports"].push_back({{"time", rep.time}, {"rows", rows}});
    }
    return out.dump(2) + "\n";
}

std::string snapshot_coefficients_json(const std::vector<Snapshot>& snapshots) {
    json out;
    out["schema_version"] = kSchemaVersion;
    out["snapshots"] = json::array();
    for (const auto& s : snapshots) {
        json coeffs = json::array();
        for (const auto& c : s.coefficients)
            coeffs.push_back({{"rho", c.basis.rho},
                              {"log_power", c.basis.log_power},
                              {"j", c.basis.j},
                              {"branch", c.basis.branch},
                              {"value", c.value}});
        out["snapshots"].push_back(
            {{"time", s.time}, {"constant", s.constant}, {"singular", coeffs}});
    }
    return out.dump(2) + "\n";
}

bool RunManifest::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

std::string RunManifest::to_json() const {
    json out;
    out["schema_version"] = kSchemaVersion;
    out["subcommand"] = subcommand;
    out["config_hash"] = config_hash;
    out["tool_version"] = tool_version;
    out["timestamp"] = timestamp;
    out["outputs"] = outputs;
    out["checks"] = json::array();
    for (const auto& c : checks)
        out["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    out["passed"] = all_passed();
    return out.dump(2) + "\n";
}

std::string fnv1a_hash(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

}  // namespace conekit::io
