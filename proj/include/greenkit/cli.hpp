/**
 * @file cli.hpp
 * @brief Command-line front end: `green`, `verify`, `spectrum`, `sign-intervals`,
 * `compare` and `paper-examples`.
 *
 * Exit codes: 0 success, 1 verification failure, 2 configuration or parse error,
 * 3 resonance or numerical failure.
 */
#pragma once

#include <greenkit/comparison.hpp>
#include <greenkit/error.hpp>
#include <greenkit/greens.hpp>
#include <greenkit/identities.hpp>
#include <greenkit/io.hpp>
#include <greenkit/signscan.hpp>
#include <greenkit/spectrum.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace greenkit::cli {

enum ExitCode : int { Ok = 0, VerificationFailed = 1, BadConfig = 2, NumericalFailure = 3 };

namespace detail {

/// Opens `path` for writing; "-" and the empty string mean `fallback`.
class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw ConfigError("cannot write '" + path + "'");
            stream_ = &file_;
        }
    }
    std::ostream& get() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

inline std::pair<double, double> pick_window(const std::vector<double>& flag, const ProblemConfig& cfg) {
    if (flag.size() == 2) {
        if (!(flag[0] < flag[1])) throw ConfigError("--window needs LO < HI");
        return {flag[0], flag[1]};
    }
    if (cfg.window) return *cfg.window;
    throw ConfigError("no search window: pass --window LO HI or set \"window\" in the config");
}

inline json stamped(json body) {
    body["generated_at"] = iso_timestamp();
    return body;
}

// ---------------------------------------------------------------------------

struct GreenArgs {
    std::string config, out;
    std::size_t grid = 41;
    std::optional<double> lambda;
};

inline int cmd_green(const GreenArgs& a, std::ostream& out) {
    ProblemConfig cfg = load_config(a.config);
    if (a.lambda) cfg.lambda = *a.lambda;
    const GreensEvaluator g(cfg.problem());
    const auto pts = uniform_grid(g.length(), a.grid);
    Output o(a.out, out);
    write_grid_csv(o.get(), pts, g.block(pts, pts));
    return Ok;
}

struct VerifyArgs {
    std::string config;
    std::vector<std::string> identities{"all"};
    std::vector<double> lambdas;
    std::size_t grid = default_identity_grid;
    double tol = default_identity_tol;
};

inline int cmd_verify(const VerifyArgs& a, std::ostream& out) {
    const ProblemConfig cfg = load_config(a.config);
    const LinearOperator base = cfg.base_operator();
    std::vector<std::string> tags;
    for (const auto& t : a.identities) {
        if (t == "all") {
            const auto all = all_identity_tags();
            tags.insert(tags.end(), all.begin(), all.end());
        } else {
            tags.push_back(t);
        }
    }
    const std::vector<double> lambdas = a.lambdas.empty() ? std::vector<double>{cfg.lambda} : a.lambdas;
    json rows = json::array();
    bool ok = true;
    for (double lam : lambdas) {
        KernelCache cache(base, lam);
        for (const auto& tag : tags) {
            IdentityReport r;
            if (tag == "slope-one") {
                const ProblemSpec spec{cfg.op(), BCKind::Periodic, lam};
                if (std::fabs(char_det(spec)) < identity_skip_det) {
                    r.tag = tag;
                    r.lambda = lam;
                    r.grid = a.grid;
                    r.skipped = true;
                    r.note = "resonant: periodic";
                } else {
                    r = check_slope_constancy(GreensEvaluator(spec), a.grid, a.tol);
                }
            } else {
                r = run_identity(tag, cache, a.grid, a.tol);
            }
            ok = ok && (r.pass || r.skipped);
            rows.push_back(to_json(r));
        }
    }
    out << stamped(json{{"config", to_json(cfg)}, {"reports", rows}, {"pass", ok}}).dump(2) << '\n';
    return ok ? Ok : VerificationFailed;
}

struct SpectrumArgs {
    std::string config;
    std::vector<double> window;
    double lambda_tol = 1e-6;
};

inline int cmd_spectrum(const SpectrumArgs& a, std::ostream& out) {
    const ProblemConfig cfg = load_config(a.config);
    const auto [lo, hi] = pick_window(a.window, cfg);
    SpectrumOptions opt;
    opt.lambda_tol = a.lambda_tol;
    const Spectrum s = find_eigenvalues(cfg.op(), cfg.kind, lo, hi, opt);
    json body = to_json(s);
    std::optional<double> principal;
    for (const auto& e : s.eigenvalues)
        if (e.sign_changes == 0) principal = e.lambda; // largest constant-sign one
    body["principal"] = principal ? json(*principal) : json(nullptr);
    body["config"] = to_json(cfg);
    out << stamped(body).dump(2) << '\n';
    return Ok;
}

struct SignArgs {
    std::string config, side, sweep_csv;
    std::vector<double> window;
    double lambda_tol = 1e-4;
    std::size_t grid = default_sign_grid;
    std::size_t sweep_count = 201;
};

inline int cmd_sign_intervals(const SignArgs& a, std::ostream& out) {
    const ProblemConfig cfg = load_config(a.config);
    const auto [lo, hi] = pick_window(a.window, cfg);
    const LinearOperator op = cfg.op();
    std::vector<SignSide> sides;
    if (a.side == "neg" || a.side == "both") sides.push_back(SignSide::NonpositiveBelow);
    if (a.side == "pos" || a.side == "both") sides.push_back(SignSide::NonnegativeAbove);
    SignSearchOptions opt;
    opt.grid = a.grid;
    opt.principal = principal_eigenvalue(op, cfg.kind, lo, hi, opt.spectrum);
    json rows = json::array();
    for (SignSide side : sides) rows.push_back(to_json(sign_interval(op, cfg.kind, side, lo, hi, a.lambda_tol, opt)));
    if (!a.sweep_csv.empty()) {
        Output o(a.sweep_csv, out);
        write_sweep_csv(o.get(), sign_sweep(op, cfg.kind, lo, hi, a.sweep_count, a.grid));
    }
    out << stamped(json{{"config", to_json(cfg)}, {"intervals", rows}}).dump(2) << '\n';
    return Ok;
}

struct CompareArgs {
    std::string config, sigma1, sigma2, case_spec, theorem, csv;
    std::size_t grid = 41;
};

/// "ND:2", "ND2" or "2" together with --theorem.
inline std::pair<ComparisonTheorem, int> parse_case(const std::string& spec, const std::string& theorem) {
    std::string name = theorem;
    std::string num = spec;
    if (const auto colon = spec.find(':'); colon != std::string::npos) {
        name = spec.substr(0, colon);
        num = spec.substr(colon + 1);
    } else if (!spec.empty() && !std::isdigit(static_cast<unsigned char>(spec.front()))) {
        name = spec.substr(0, spec.size() - 1);
        num = spec.substr(spec.size() - 1);
    }
    const auto th = parse_comparison_theorem(name);
    if (!th) throw ConfigError("unknown comparison theorem '" + name + "' (expected ND, NM1 or M2D)");
    if (num != "1" && num != "2" && num != "3") throw ConfigError("comparison case must be 1, 2 or 3, got '" + num + "'");
    return {*th, num[0] - '0'};
}

inline int cmd_compare(const CompareArgs& a, std::ostream& out) {
    const ProblemConfig cfg = load_config(a.config);
    const auto [th, case_number] = parse_case(a.case_spec, a.theorem);
    const LinearOperator op = cfg.base_operator();
    const ExprAst s1 = parse_expression(a.sigma1);
    const ExprAst s2 = parse_expression(a.sigma2);
    const auto dom = check_kernel_domination(th, op, cfg.lambda, a.grid);
    const auto sol = check_solution_comparison(th, case_number, op, cfg.lambda, s1, s2, a.grid);
    if (!a.csv.empty()) {
        Output o(a.csv, out);
        write_solutions_csv(o.get(), solve_separated(op, cfg.lambda, s1, a.grid));
    }
    const bool ok = sol.applicable && sol.pass && (!dom.applicable || dom.pass);
    out << stamped(json{{"config", to_json(cfg)},
                        {"kernel_domination", to_json(dom)},
                        {"solution_comparison", to_json(sol)},
                        {"pass", ok}})
               .dump(2)
        << '\n';
    return ok ? Ok : VerificationFailed;
}

// ---------------------------------------------------------------------------
// paper-examples: every scenario is data from the fixtures file.

struct ScenarioRow {
    std::string section, label, expected, observed;
    bool pass = false;
};

inline std::map<std::string, LinearOperator> fixture_operators(const json& fx) {
    std::map<std::string, LinearOperator> ops;
    for (const auto& [name, j] : fx.at("operators").items()) {
        json c = j;
        ops.emplace(name, parse_config(c).base_operator());
    }
    return ops;
}

inline const LinearOperator& lookup(const std::map<std::string, LinearOperator>& ops, const json& row) {
    const auto name = row.at("operator").get<std::string>();
    const auto it = ops.find(name);
    if (it == ops.end()) throw ConfigError("fixtures: unknown operator '" + name + "'");
    return it->second;
}

inline BCKind fixture_kind(const json& row) {
    const auto k = parse_bc_kind(row.at("kind").get<std::string>());
    if (!k) throw ConfigError("fixtures: unknown kind '" + row.at("kind").get<std::string>() + "'");
    return *k;
}

inline Extension fixture_extension(const json& row) {
    const auto e = parse_extension(row.value("extension", std::string("none")));
    if (!e) throw ConfigError("fixtures: unknown extension");
    return *e;
}

inline std::string kernel_label(const json& row) {
    const auto ext = fixture_extension(row);
    const char* suffix = ext == Extension::None ? "[T]" : (ext == Extension::Double ? "[2T]" : "[4T]");
    return row.at("kind").get<std::string>() + suffix;
}

inline bool within(double got, const json& row) {
    const double want = row.at("expect").get<double>();
    if (row.contains("abs_tol")) return std::fabs(got - want) <= row.at("abs_tol").get<double>();
    return std::fabs(got - want) <= row.value("rel_tol", 1e-2) * std::fabs(want);
}

inline std::string num(double v, int digits = 6) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline std::vector<ScenarioRow> run_example_suite(const json& fx) {
    const auto ops = fixture_operators(fx);
    std::vector<ScenarioRow> rows;
    auto guarded = [&](ScenarioRow row, auto&& body) {
        try {
            body(row);
        } catch (const Error& e) {
            row.observed = std::string("error: ") + e.what();
            row.pass = false;
        }
        rows.push_back(std::move(row));
    };

    for (const auto& c : fx.value("classifications", json::array()))
        guarded({"sign", c.at("scenario").get<std::string>() + ": G_" + kernel_label(c),
                 c.at("expect").get<std::string>(), "", false},
                [&](ScenarioRow& row) {
                    const LinearOperator op = apply_extension(lookup(ops, c), fixture_extension(c));
                    const auto rep = classify_at(op, fixture_kind(c), c.at("lambda").get<double>());
                    if (!rep) throw NumericalError("resonant");
                    row.observed = std::string(to_string(rep->classification));
                    const auto want = parse_sign_class(row.expected);
                    row.pass = want && rep->classification == *want;
                });

    for (const auto& e : fx.value("eigenvalues", json::array()))
        guarded({"eigenvalue", e.at("label").get<std::string>(), num(e.at("expect").get<double>(), 8), "", false},
                [&](ScenarioRow& row) {
                    const LinearOperator op = apply_extension(lookup(ops, e), fixture_extension(e));
                    const auto w = e.at("window").get<std::vector<double>>();
                    const double got = principal_eigenvalue(op, fixture_kind(e), w.at(0), w.at(1));
                    row.observed = num(got, 8);
                    row.pass = within(got, e);
                });

    for (const auto& t : fx.value("thresholds", json::array()))
        guarded({"threshold", t.at("label").get<std::string>() + ": G_" + kernel_label(t) + " " +
                                  t.at("side").get<std::string>(),
                 num(t.at("expect").get<double>()), "", false},
                [&](ScenarioRow& row) {
                    const LinearOperator op = apply_extension(lookup(ops, t), fixture_extension(t));
                    const auto w = t.at("window").get<std::vector<double>>();
                    const auto side_name = t.at("side").get<std::string>();
                    if (side_name != "pos" && side_name != "neg") throw ConfigError("fixtures: side must be pos or neg");
                    const SignSide side = side_name == "neg" ? SignSide::NonpositiveBelow : SignSide::NonnegativeAbove;
                    const auto r = sign_interval(op, fixture_kind(t), side, w.at(0), w.at(1),
                                                 t.value("lambda_tol", 1e-4));
                    row.observed = num(r.threshold);
                    row.pass = r.status == EndpointStatus::ThresholdFound && within(r.threshold, t);
                });

    for (const auto& i : fx.value("identities", json::array()))
        guarded({"identity", i.at("tag").get<std::string>() + " (" + i.at("operator").get<std::string>() +
                                 ", lambda=" + num(i.at("lambda").get<double>()) + ")",
                 "<= " + num(i.value("tol", default_identity_tol), 2), "", false},
                [&](ScenarioRow& row) {
                    const auto r = run_identity(i.at("tag").get<std::string>(), lookup(ops, i),
                                                i.at("lambda").get<double>(), i.value("m", default_identity_grid),
                                                i.value("tol", default_identity_tol));
                    row.observed = r.skipped ? "skipped (" + r.note + ")" : num(r.residual, 3);
                    row.pass = r.pass;
                });
    return rows;
}

struct SuiteArgs {
    std::string fixtures, json_out;
};

inline int cmd_example_suite(const SuiteArgs& a, std::string_view embedded, std::ostream& out) {
    const std::string text = a.fixtures.empty() ? std::string(embedded) : read_file(a.fixtures);
    if (text.empty()) throw ConfigError("no fixtures available: pass --fixtures FILE");
    const json fx = parse_json_text(text, a.fixtures.empty() ? "embedded fixtures" : a.fixtures);
    std::vector<ScenarioRow> rows;
    try {
        rows = run_example_suite(fx);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("fixtures: ") + e.what());
    }
    std::size_t passed = 0;
    char line[512];
    std::snprintf(line, sizeof line, "%-10s  %-58s  %-16s  %-16s  %s\n", "section", "scenario", "expected", "observed",
                  "status");
    out << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-10s  %-58s  %-16s  %-16s  %s\n", r.section.c_str(), r.label.c_str(),
                      r.expected.c_str(), r.observed.c_str(), r.pass ? "PASS" : "FAIL");
        out << line;
        passed += r.pass ? 1 : 0;
    }
    out << passed << '/' << rows.size() << " scenarios passed\n";
    if (!a.json_out.empty()) {
        json j = json::array();
        for (const auto& r : rows)
            j.push_back({{"section", r.section},
                         {"scenario", r.label},
                         {"expected", r.expected},
                         {"observed", r.observed},
                         {"pass", r.pass}});
        Output o(a.json_out, out);
        o.get() << stamped(json{{"rows", j}, {"passed", passed}, {"total", rows.size()}}).dump(2) << '\n';
    }
    return passed == rows.size() ? Ok : VerificationFailed;
}

} // namespace detail

/// Entry point of the command-line tool. `embedded_fixtures` is the default data
/// for `paper-examples`.
inline int run(int argc, const char* const* argv, std::string_view embedded_fixtures = {},
               std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Green's functions of even-order linear boundary value problems"};
    app.require_subcommand(1);

    detail::GreenArgs green;
    auto* g = app.add_subcommand("green", "Sample G(t,s) on an M x M grid as CSV");
    g->add_option("--config", green.config, "problem config (JSON)")->required();
    g->add_option("--grid", green.grid, "grid points per axis")->check(CLI::Range(2, 100000));
    g->add_option("--out", green.out, "output CSV (default: standard output)");
    g->add_option("--lambda", green.lambda, "override lambda from the config");

    detail::VerifyArgs verify;
    auto* v = app.add_subcommand("verify", "Check decomposition, connecting and symmetry identities");
    v->add_option("--config", verify.config, "problem config (JSON)")->required();
    v->add_option("--identity", verify.identities, "identity tag, 'slope-one' or 'all'");
    v->add_option("--lambda", verify.lambdas, "one or more lambda values (default: config lambda)");
    v->add_option("--grid", verify.grid, "grid points per axis")->check(CLI::Range(2, 100000));
    v->add_option("--tol", verify.tol, "sup-norm tolerance");

    detail::SpectrumArgs spectrum;
    auto* s = app.add_subcommand("spectrum", "Eigenvalues in a lambda window as JSON");
    s->add_option("--config", spectrum.config, "problem config (JSON)")->required();
    s->add_option("--window", spectrum.window, "LO HI")->expected(2);
    s->add_option("--lambda-tol", spectrum.lambda_tol, "bracket width");

    detail::SignArgs sign;
    auto* si = app.add_subcommand("sign-intervals", "Constant-sign lambda intervals next to the principal eigenvalue");
    si->add_option("--config", sign.config, "problem config (JSON)")->required();
    si->add_option("--side", sign.side, "pos, neg or both")->required()->check(CLI::IsMember({"pos", "neg", "both"}));
    si->add_option("--window", sign.window, "LO HI")->expected(2);
    si->add_option("--lambda-tol", sign.lambda_tol, "endpoint accuracy");
    si->add_option("--grid", sign.grid, "classification grid")->check(CLI::Range(2, 100000));
    si->add_option("--sweep-csv", sign.sweep_csv, "also write min/max of G over the window");
    si->add_option("--sweep-count", sign.sweep_count, "lambda samples for --sweep-csv")->check(CLI::Range(1, 1000000));

    detail::CompareArgs compare;
    auto* c = app.add_subcommand("compare", "Comparison principle between two problems");
    c->add_option("--config", compare.config, "problem config (JSON)")->required();
    c->add_option("--sigma1", compare.sigma1, "source of the dominating problem")->required();
    c->add_option("--sigma2", compare.sigma2, "source of the other problem")->required();
    c->add_option("--case", compare.case_spec, "ND:1 ... M2D:3, or 1-3 with --theorem")->required();
    c->add_option("--theorem", compare.theorem, "ND, NM1 or M2D");
    c->add_option("--grid", compare.grid, "odd number of quadrature nodes, at least 41");
    c->add_option("--csv", compare.csv, "write t,u_N,u_D,u_M1,u_M2 for sigma1");

    detail::SuiteArgs suite;
    auto* p = app.add_subcommand("paper-examples", "Run the embedded example suite");
    p->add_option("--fixtures", suite.fixtures, "fixtures file instead of the embedded one");
    p->add_option("--json", suite.json_out, "also write the rows as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return BadConfig;
    }

    try {
        if (*g) return detail::cmd_green(green, out);
        if (*v) return detail::cmd_verify(verify, out);
        if (*s) return detail::cmd_spectrum(spectrum, out);
        if (*si) return detail::cmd_sign_intervals(sign, out);
        if (*c) return detail::cmd_compare(compare, out);
        if (*p) return detail::cmd_example_suite(suite, embedded_fixtures, out);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return BadConfig;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return BadConfig;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return BadConfig;
    } catch (const EvalError& e) {
        err << "error: " << e.what() << '\n';
        return BadConfig;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return NumericalFailure;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << '\n';
        return BadConfig;
    }
    return BadConfig;
}

} // namespace greenkit::cli
