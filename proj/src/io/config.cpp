#include "conekit/io/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "conekit/io/formats.hpp"
#include "conekit/io/toml.hpp"

namespace conekit::io {

namespace {

std::string join(const std::vector<std::string>& msgs) {
    std::ostringstream os;
    os << "configuration invalid:";
    for (const auto& m : msgs) os << "\n  - " << m;
    return os.str();
}

struct Schema {
    const TomlTable& table;
    std::vector<std::string>& errors;
    std::set<std::string> known;

    void allow(const std::string& section, const std::string& key) {
        known.insert(section + "\n" + key);
    }

    void check_unknown() {
        for (const auto& [section, keys] : table.sections)
            for (const auto& [key, value] : keys)
                if (!known.count(section + "\n" + key))
                    errors.push_back("unknown key '" + key + "' in [" + section + "]");
    }

    bool has(const std::string& sec, const std::string& key) {
        allow(sec, key);
        return table.has(sec, key);
    }

    double number(const std::string& sec, const std::string& key, double fallback) {
        allow(sec, key);
        if (!table.has(sec, key)) return fallback;
        const TomlValue& v = table.at(sec, key);
        if (v.kind != TomlValue::Kind::Number) {
            errors.push_back("[" + sec + "] " + key + " must be a number");
            return fallback;
        }
        return v.number;
    }

    int integer(const std::string& sec, const std::string& key, int fallback) {
        double v = number(sec, key, fallback);
        if (v != std::floor(v)) {
            errors.push_back("[" + sec + "] " + key + " must be an integer");
            return fallback;
        }
        return static_cast<int>(v);
    }

    std::string str(const std::string& sec, const std::string& key, const std::string& fallback) {
        allow(sec, key);
        if (!table.has(sec, key)) return fallback;
        const TomlValue& v = table.at(sec, key);
        if (v.kind != TomlValue::Kind::String) {
            errors.push_back("[" + sec + "] " + key + " must be a string");
            return fallback;
        }
        return v.str;
    }

    std::vector<double> numbers(const std::string& sec, const std::string& key,
                                std::vector<double> fallback) {
        allow(sec, key);
        if (!table.has(sec, key)) return fallback;
        const TomlValue& v = table.at(sec, key);
        if (v.kind != TomlValue::Kind::Array) {
            errors.push_back("[" + sec + "] " + key + " must be an array of numbers");
            return fallback;
        }
        std::vector<double> out;
        for (const auto& e : v.array) {
            if (e.kind != TomlValue::Kind::Number) {
                errors.push_back("[" + sec + "] " + key + " must be an array of numbers");
                return fallback;
            }
            out.push_back(e.number);
        }
        return out;
    }
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> msgs)
    : std::runtime_error(join(msgs)), messages(std::move(msgs)) {}

double RunConfig::effective_gamma() const {
    if (gamma_given) return gamma;
    WeightWindow w = weight_window(cross_section.n, cross_section.eigenvalues.at(1));
    return 0.5 * (w.gamma_min + w.gamma_max);
}

Geometry RunConfig::make_geometry() const {
    return Geometry::make(make_grid(), cross_section, warp, effective_gamma(), s);
}

Field RunConfig::make_initial(const Geometry& geo) const {
    Field u(geo.grid, geo.spec);
    std::string kind = initial.substr(0, initial.find(':'));
    std::string args = initial.find(':') == std::string::npos
                           ? ""
                           : initial.substr(initial.find(':') + 1);
    auto parse_list = [&](int expected) {
        std::vector<double> vals;
        std::stringstream ss(args);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        if (static_cast<int>(vals.size()) != expected)
            throw std::invalid_argument("initial data '" + initial + "' needs " +
                                        std::to_string(expected) + " parameters");
        return vals;
    };
    if (kind == "file") {
        return read_snapshot_csv(args, geo.grid, geo.spec);
    } else if (kind == "uniform") {
        u.values.col(0).setConstant(parse_list(1)[0]);
    } else if (kind == "cosine") {
        // m + a x cos(theta)
        auto vals = parse_list(2);
        u.values.col(0).setConstant(vals[0]);
        if (u.n_modes() < 2)
            throw std::invalid_argument("cosine initial data needs j_max >= 2");
        for (int i = 0; i < geo.grid.nodes(); ++i) u.values(i, 1) = vals[1] * geo.grid.x[i];
    } else {
        throw std::invalid_argument("unknown initial data descriptor '" + initial + "'");
    }
    return u;
}

RunConfig parse_config_text(const std::string& text) {
    std::vector<std::string> errors;
    TomlTable table = parse_toml(text, errors);
    Schema schema{table, errors, {}};

    RunConfig cfg;

    // [cross_section]
    std::string kind = schema.str("cross_section", "kind", "circle");
    int j_max = schema.integer("cross_section", "j_max", 8);
    try {
        if (kind == "circle") {
            cfg.cross_section = CrossSectionSpec::circle(j_max);
        } else if (kind == "sphere") {
            cfg.cross_section = CrossSectionSpec::sphere(j_max);
        } else if (kind == "custom") {
            int n = schema.integer("cross_section", "n", 1);
            auto eigs = schema.numbers("cross_section", "eigenvalues", {});
            auto mults_d = schema.numbers("cross_section", "multiplicities", {});
            std::vector<int> mults;
            for (double m : mults_d) mults.push_back(static_cast<int>(m));
            cfg.cross_section = CrossSectionSpec::custom(n, eigs, mults);
        } else {
            errors.push_back("[cross_section] kind must be circle, sphere or custom");
        }
    } catch (const std::exception& e) {
        errors.push_back(std::string("[cross_section] ") + e.what());
    }
    schema.allow("cross_section", "eigenvalues");
    schema.allow("cross_section", "multiplicities");
    schema.allow("cross_section", "n");

    // [warp]
    try {
        auto coeffs = schema.numbers("warp", "coeffs", {});
        cfg.warp = coeffs.empty() ? WarpProfile::straight() : WarpProfile::polynomial(coeffs);
    } catch (const std::exception& e) {
        errors.push_back(std::string("[warp] ") + e.what());
    }

    // [grid]
    cfg.grid_cells = schema.integer("grid", "n_cells", 256);
    cfg.x_min = schema.number("grid", "x_min", 1e-4);
    if (cfg.grid_cells < 16) errors.push_back("[grid] n_cells must be at least 16");
    if (!(cfg.x_min > 0.0) || cfg.x_min > 0.01)
        errors.push_back("[grid] x_min must lie in (0, 0.01]");

    // [weights]
    if (schema.has("weights", "gamma")) {
        cfg.gamma = schema.number("weights", "gamma", 0.0);
        cfg.gamma_given = true;
    }
    cfg.s = schema.integer("weights", "s", 0);
    cfg.p = schema.number("weights", "p", 2.0);
    if (cfg.s < 0 || cfg.s > 4) errors.push_back("[weights] s must lie in [0, 4]");
    if (!(cfg.p > 1.0)) errors.push_back("[weights] p must exceed 1");

    // [solve]
    cfg.solver.tau = schema.number("solve", "tau", 1e-4);
    cfg.solver.t_final = schema.number("solve", "T", 0.1);
    cfg.solver.stabilization = schema.number("solve", "S", 2.0);
    cfg.solver.c0 = schema.number("solve", "c0", 1.0);
    cfg.solver.snapshot_every = schema.integer("solve", "snapshot_every", 100);
    std::string scheme = schema.str("solve", "scheme", "stabilized");
    if (scheme == "stabilized")
        cfg.solver.scheme = Scheme::StabilizedSemiImplicit;
    else if (scheme == "linearized")
        cfg.solver.scheme = Scheme::LinearizedImplicit;
    else
        errors.push_back("[solve] scheme must be 'stabilized' or 'linearized'");
    std::string sign = schema.str("solve", "sign", "identity-plus");
    if (sign == "identity-plus")
        cfg.solver.sign = SignConvention::IdentityPlus;
    else if (sign == "minus")
        cfg.solver.sign = SignConvention::Minus;
    else
        errors.push_back("[solve] sign must be 'identity-plus' or 'minus'");
    cfg.initial = schema.str("solve", "initial", "uniform:0.1");
    if (!(cfg.solver.tau > 0.0)) errors.push_back("[solve] tau must be positive");
    if (!(cfg.solver.t_final >= cfg.solver.tau))
        errors.push_back("[solve] T must cover at least one step");
    if (cfg.solver.stabilization < 0.0) errors.push_back("[solve] S must be non-negative");

    // [probe]
    cfg.probe.c = schema.number("probe", "c", 1.0);
    cfg.probe.thetas = schema.numbers("probe", "thetas", {});
    cfg.probe.n_lambda = schema.integer("probe", "n_lambda", 20);
    cfg.probe.lambda_min = schema.number("probe", "lambda_min", 1e-2);
    cfg.probe.lambda_max = schema.number("probe", "lambda_max", 1e6);
    cfg.probe.t_range = schema.number("probe", "t_range", 4.0);
    cfg.probe.n_t = schema.integer("probe", "n_t", 33);
    cfg.probe.eps = schema.numbers("probe", "eps", {0.4, 0.2, 0.1, 0.05});

    // [fit]
    cfg.fit.x_lo = schema.number("fit", "x_lo", 0.0);
    cfg.fit.x_hi = schema.number("fit", "x_hi", 0.0);
    cfg.fit.times = schema.numbers("fit", "times", {});
    cfg.fit.snapshot = schema.str("fit", "snapshot", "");

    // [norm]
    cfg.norm_input = schema.str("norm", "input", "");

    // [run]
    cfg.seed = static_cast<std::uint64_t>(schema.number("run", "seed", 0.0));

    schema.check_unknown();

    // cross-validation against the weight window
    if (errors.empty()) {
        try {
            WeightWindow w =
                weight_window(cfg.cross_section.n, cfg.cross_section.eigenvalues.at(1));
            double gamma = cfg.effective_gamma();
            if (!w.contains(gamma)) {
                std::ostringstream os;
                os << "[weights] gamma " << gamma << " outside the admissible weight window ("
                   << w.gamma_min << ", " << w.gamma_max << ")";
                errors.push_back(os.str());
            }
        } catch (const std::exception& e) {
            errors.push_back(std::string("weight window: ") + e.what());
        }
        CutoffOmega omega;
        for (double eps : cfg.probe.eps)
            if (!(cfg.x_min < omega.r1 * eps)) {
                std::ostringstream os;
                os << "[grid] x_min must be below r1 * eps = " << omega.r1 * eps
                   << " for the requested interpolant eps " << eps;
                errors.push_back(os.str());
            }
        if (cfg.p != 2.0 && cfg.cross_section.kind != CrossSectionKind::Circle)
            errors.push_back("[weights] p != 2 requires the circle cross-section");
    }

    if (!errors.empty()) throw ConfigError(errors);
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace conekit::io
