/**
 * @file io.hpp
 * @brief Problem configuration files, JSON serialization of reports and CSV output.
 */
#pragma once

#include <greenkit/comparison.hpp>
#include <greenkit/error.hpp>
#include <greenkit/greens.hpp>
#include <greenkit/identities.hpp>
#include <greenkit/linear_operator.hpp>
#include <greenkit/signscan.hpp>
#include <greenkit/spectrum.hpp>

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace greenkit {

using json = nlohmann::json;

struct ProblemConfig {
    int n = 1;
    double T = 1.0;
    std::vector<std::string> coefficients; // a_0 ... a_{2n-1}
    double lambda = 0.0;
    BCKind kind = BCKind::Dirichlet;
    Extension extension = Extension::None;
    std::optional<std::pair<double, double>> window;

    /// L on [0,T] without the extension applied.
    LinearOperator base_operator() const { return LinearOperator::from_strings(n, T, coefficients); }
    /// The operator the kernel is built on.
    LinearOperator op() const { return apply_extension(base_operator(), extension); }
    ProblemSpec problem() const { return ProblemSpec{op(), kind, lambda}; }
};

namespace detail {

template <class T>
T required(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("config: missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config: field '") + key + "' has the wrong type");
    }
}

} // namespace detail

inline ProblemConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    ProblemConfig cfg;
    cfg.n = detail::required<int>(j, "n");
    cfg.T = detail::required<double>(j, "T");
    cfg.coefficients = detail::required<std::vector<std::string>>(j, "coefficients");
    if (cfg.n < 1) throw ConfigError("config: n must be at least 1");
    if (!(cfg.T > 0.0)) throw ConfigError("config: T must be positive");
    if (cfg.coefficients.size() != static_cast<std::size_t>(2 * cfg.n))
        throw ConfigError("config: expected " + std::to_string(2 * cfg.n) + " coefficients, got " +
                          std::to_string(cfg.coefficients.size()));
    if (j.contains("lambda")) cfg.lambda = detail::required<double>(j, "lambda");
    if (j.contains("kind")) {
        const auto name = detail::required<std::string>(j, "kind");
        const auto kind = parse_bc_kind(name);
        if (!kind) throw ConfigError("config: unknown boundary kind '" + name + "'");
        cfg.kind = *kind;
    }
    if (j.contains("extension")) {
        const auto name = detail::required<std::string>(j, "extension");
        const auto ext = parse_extension(name);
        if (!ext) throw ConfigError("config: unknown extension '" + name + "'");
        cfg.extension = *ext;
    }
    if (j.contains("window")) {
        const auto w = detail::required<std::vector<double>>(j, "window");
        if (w.size() != 2 || !(w[0] < w[1])) throw ConfigError("config: window must be [lo, hi] with lo < hi");
        cfg.window = std::make_pair(w[0], w[1]);
    }
    // Parse every coefficient now so errors carry their position.
    for (std::size_t k = 0; k < cfg.coefficients.size(); ++k) {
        try {
            (void)parse_expression(cfg.coefficients[k]);
        } catch (const ParseError& e) {
            throw ParseError("coefficient a_" + std::to_string(k) + " '" + cfg.coefficients[k] + "': " +
                                 std::string(e.what()).substr(0, std::string(e.what()).rfind(" at position")),
                             e.position());
        }
    }
    return cfg;
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": invalid JSON (" + e.what() + ")");
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ProblemConfig load_config(const std::string& path) { return parse_config(parse_json_text(read_file(path), path)); }

inline json to_json(const ProblemConfig& c) {
    json j{{"n", c.n},
           {"T", c.T},
           {"coefficients", c.coefficients},
           {"lambda", c.lambda},
           {"kind", to_string(c.kind)},
           {"extension", to_string(c.extension)}};
    if (c.window) j["window"] = {c.window->first, c.window->second};
    return j;
}

/// ISO-8601 UTC time; the only nondeterministic field in any output.
inline std::string iso_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// %.17g, enough digits to round-trip a double.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Header `t,s,value`, row-major by t.
inline void write_grid_csv(std::ostream& out, const std::vector<double>& pts, const Matrix& values) {
    out << "t,s,value\n";
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j)
            out << format_double(pts[i]) << ',' << format_double(pts[j]) << ','
                << format_double(values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << '\n';
}

/// Header `t,u_N,u_D,u_M1,u_M2`; resonant problems are written as empty fields.
inline void write_solutions_csv(std::ostream& out, const SolutionTable& tab) {
    out << "t,u_N,u_D,u_M1,u_M2\n";
    auto cell = [&](const std::optional<std::vector<double>>& col, std::size_t i) {
        return col ? format_double((*col)[i]) : std::string();
    };
    for (std::size_t i = 0; i < tab.t.size(); ++i)
        out << format_double(tab.t[i]) << ',' << cell(tab.u_n, i) << ',' << cell(tab.u_d, i) << ','
            << cell(tab.u_m1, i) << ',' << cell(tab.u_m2, i) << '\n';
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "lambda,min,max\n";
    for (const auto& r : rows)
        out << format_double(r.lambda) << ',' << format_double(r.min) << ',' << format_double(r.max) << '\n';
}

inline json to_json(const IdentityReport& r) {
    json j{{"tag", r.tag},       {"lambda", r.lambda},       {"m", r.grid},
           {"residual", r.residual}, {"location", {r.at_t, r.at_s}}, {"tolerance", r.tolerance},
           {"pass", r.pass},     {"skipped", r.skipped}};
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

inline json to_json(const Spectrum& s) {
    json rows = json::array();
    for (const auto& e : s.eigenvalues) {
        json row{{"lambda", e.lambda},
                 {"bracket_width", e.bracket_width},
                 {"det", e.det},
                 {"even_multiplicity_suspected", e.even_multiplicity_suspected}};
        if (e.sign_changes >= 0) row["sign_changes"] = e.sign_changes;
        rows.push_back(row);
    }
    return json{{"kind", to_string(s.kind)},
                {"window", {s.window_lo, s.window_hi}},
                {"eigenvalues", rows},
                {"warnings", s.warnings}};
}

inline json to_json(const SignReport& r) {
    return json{{"classification", to_string(r.classification)},
                {"grid", r.grid},
                {"min", r.min},
                {"max", r.max},
                {"argmin", {r.argmin_t, r.argmin_s}},
                {"argmax", {r.argmax_t, r.argmax_s}},
                {"zero_band", r.zero_band},
                {"refined_cells", r.refined_cells},
                {"edges_analysed", r.edges_analysed},
                {"edge_sign_change", r.edge_sign_change}};
}

inline json to_json(const SignIntervalResult& r) {
    return json{{"kind", to_string(r.kind)},
                {"side", to_string(r.side)},
                {"interval", {r.lo, r.hi}},
                {"principal", r.principal},
                {"threshold", r.threshold},
                {"status", to_string(r.status)},
                {"lambda_tol", r.lambda_tol},
                {"classifications", r.classifications}};
}

inline json to_json(const DominationReport& r) {
    json j{{"theorem", to_string(r.theorem)},
           {"lambda", r.lambda},
           {"m", r.grid},
           {"applicable", r.applicable},
           {"inequality", r.nonnegative_case ? "G_dom >= |G_other|" : "G_dom <= -|G_other|"},
           {"worst_slack", r.worst_slack},
           {"location", {r.at_t, r.at_s}},
           {"scale", r.scale},
           {"violations", r.violations},
           {"pass", r.pass}};
    if (r.premise) j["premise"] = to_string(*r.premise);
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

inline json to_json(const SolutionComparisonReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"statement", c.statement}, {"worst_slack", c.worst_slack}, {"t", c.at_t}, {"pass", c.pass}});
    json j{{"theorem", to_string(r.theorem)},
           {"case", r.case_number},
           {"lambda", r.lambda},
           {"m", r.grid},
           {"applicable", r.applicable},
           {"scale", r.scale},
           {"checks", checks},
           {"pass", r.pass}};
    if (r.premise) j["premise"] = to_string(*r.premise);
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

inline json to_json(const SpectrumUnionReport& r) {
    json ids = json::array();
    for (const auto& s : r.identities)
        ids.push_back({{"identity", s.name},
                       {"lhs", s.lhs},
                       {"rhs", s.rhs},
                       {"only_lhs", s.only_lhs},
                       {"only_rhs", s.only_rhs},
                       {"applicable", s.applicable},
                       {"pass", s.pass}});
    return json{{"identities", ids}, {"warnings", r.warnings}, {"pass", r.pass()}};
}

inline json to_json(const FirstEigenvalueReport& r) {
    auto rel = [](const std::vector<FirstEigenvalueReport::Relation>& v) {
        json out = json::array();
        for (const auto& x : v)
            out.push_back({{"relation", x.name}, {"applicable", x.applicable}, {"pass", x.pass}, {"detail", x.detail}});
        return out;
    };
    return json{{"equalities", rel(r.equalities)},
                {"orderings", rel(r.orderings)},
                {"warnings", r.warnings},
                {"pass", r.pass()}};
}

} // namespace greenkit
