/**
 * @file signscan.hpp
 * @brief Sign classification of Green's functions and constant-sign lambda intervals.
 */
#pragma once

#include <greenkit/error.hpp>
#include <greenkit/greens.hpp>
#include <greenkit/linear_operator.hpp>
#include <greenkit/spectrum.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace greenkit {

enum class SignClass { Nonnegative, Nonpositive, SignChanging, Zero };

inline std::string_view to_string(SignClass c) {
    switch (c) {
    case SignClass::Nonnegative: return "nonnegative";
    case SignClass::Nonpositive: return "nonpositive";
    case SignClass::SignChanging: return "sign-changing";
    case SignClass::Zero: return "identically-zero-on-grid";
    }
    return "?";
}

inline std::optional<SignClass> parse_sign_class(std::string_view s) {
    if (s == "nonnegative" || s == "positive") return SignClass::Nonnegative;
    if (s == "nonpositive" || s == "negative") return SignClass::Nonpositive;
    if (s == "sign-changing") return SignClass::SignChanging;
    if (s == "identically-zero-on-grid" || s == "zero") return SignClass::Zero;
    return std::nullopt;
}

struct SignReport {
    SignClass classification = SignClass::Zero;
    std::size_t grid = 0;
    double min = 0.0, max = 0.0;
    double argmin_t = 0.0, argmin_s = 0.0;
    double argmax_t = 0.0, argmax_s = 0.0;
    double zero_band = 0.0; // relative
    std::size_t refined_cells = 0;
    std::size_t edges_analysed = 0;  // vanishing edges whose normal derivative was inspected
    bool edge_sign_change = false;   // sign change found only in an edge layer
};

inline constexpr double default_zero_band = 1e-9;
inline constexpr std::size_t default_sign_grid = 101;

namespace detail {

/// Uniform points plus geometric clusters towards both ends.
inline std::vector<double> graded_points(double length, std::size_t uniform) {
    std::vector<double> pts = uniform_grid(length, uniform);
    for (double e = -2.0; e >= -8.0; e -= 0.5) {
        const double d = length * std::pow(10.0, e);
        pts.push_back(d);
        pts.push_back(length - d);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

struct EdgeVerdict {
    bool analysed = false;
    bool has_pos = false;
    bool has_neg = false;
};

/// Sign of G next to an edge on which it vanishes, read off the first
/// nonvanishing inward normal derivative along a graded mesh of the edge.
inline EdgeVerdict edge_layer(const GreensEvaluator& g, bool t_edge, bool at_end, double scale, double band,
                              std::size_t uniform) {
    EdgeVerdict out;
    const double len = g.length();
    const double e = at_end ? len : 0.0;
    const auto along = graded_points(len, uniform);
    const int m = g.dim();
    std::vector<double> profile(along.size());

    if (t_edge) {
        const Matrix phi = g.fundamental().at(e);
        std::vector<GreensEvaluator::Source> sources(along.size());
        parallel_for(along.size(), [&](std::size_t j) { sources[j] = g.source(along[j]); });
        std::vector<Vector> states(along.size());
        double edge_max = 0.0;
        for (std::size_t j = 0; j < along.size(); ++j) {
            states[j] = GreensEvaluator::state(phi, e, sources[j]);
            edge_max = std::max(edge_max, std::fabs(states[j](0)));
        }
        if (edge_max > band) return out;
        for (int d = 1; d < m; ++d) {
            double pmax = 0.0;
            for (std::size_t j = 0; j < along.size(); ++j) {
                // Inward sign: (t - L)^d changes the sign of odd derivatives at the far end.
                profile[j] = (at_end && (d % 2 == 1) ? -1.0 : 1.0) * states[j](d);
                pmax = std::max(pmax, std::fabs(profile[j]));
            }
            if (pmax <= 1e-6 * scale / std::pow(len, d)) continue;
            out.analysed = true;
            for (std::size_t j = 0; j < along.size(); ++j) {
                if (profile[j] > 1e-9 * pmax) out.has_pos = true;
                if (profile[j] < -1e-9 * pmax) out.has_neg = true;
            }
            break;
        }
        return out;
    }

    // s edge: dG/ds from w'(s) = -Phi(s)^{-1} A(s) e_{2n}.
    const LinearOperator& op = g.problem().op;
    const Eigen::PartialPivLU<Matrix> lu(g.fundamental().at(e));
    Vector a_col = Vector::Zero(m);
    a_col(m - 2) = 1.0;
    a_col(m - 1) = -op.coefficient(m - 1, e, g.problem().lambda);
    const Vector wprime = -lu.solve(a_col);
    std::vector<Eigen::RowVectorXd> rows(along.size());
    parallel_for(along.size(), [&](std::size_t i) { rows[i] = g.fundamental().at(along[i]).row(0); });
    const GreensEvaluator::Source src0 = g.source(e);
    double edge_max = 0.0;
    for (std::size_t i = 0; i < along.size(); ++i)
        edge_max = std::max(edge_max, std::fabs(GreensEvaluator::value(rows[i], along[i], src0)));
    if (edge_max > band) return out;
    GreensEvaluator::Source dsrc{e, wprime, g.correction() * wprime};
    double pmax = 0.0;
    for (std::size_t i = 0; i < along.size(); ++i) {
        profile[i] = (at_end ? -1.0 : 1.0) * GreensEvaluator::value(rows[i], along[i], dsrc);
        pmax = std::max(pmax, std::fabs(profile[i]));
    }
    if (pmax <= 1e-6 * scale / len) return out;
    out.analysed = true;
    for (double v : profile) {
        if (v > 1e-9 * pmax) out.has_pos = true;
        if (v < -1e-9 * pmax) out.has_neg = true;
    }
    return out;
}

} // namespace detail

/// Sign of G on the uniform m x m grid. Values within zero_band * max|G| count as zero.
/// Cells with a corner within 1% of the scale of zero get their edge midpoints and
/// centre evaluated as well. On edges where G vanishes identically, the sign of the
/// adjacent layer is taken from the inward normal derivative on a graded mesh, which
/// resolves sign changes that start at a corner.
inline SignReport classify_sign(const GreensEvaluator& g, std::size_t m = default_sign_grid,
                                double zero_band = default_zero_band) {
    if (m < 2) throw ConfigError("grid needs at least 2 points");
    const std::size_t fine = 2 * m - 1;
    const auto pts = uniform_grid(g.length(), fine);

    std::vector<Eigen::RowVectorXd> rows(fine);
    std::vector<GreensEvaluator::Source> sources(fine);
    std::vector<char> have_row(fine, 0), have_src(fine, 0);
    auto row = [&](std::size_t i) -> const Eigen::RowVectorXd& {
        if (!have_row[i]) {
            rows[i] = g.fundamental().at(pts[i]).row(0);
            have_row[i] = 1;
        }
        return rows[i];
    };
    auto src = [&](std::size_t j) -> const GreensEvaluator::Source& {
        if (!have_src[j]) {
            sources[j] = g.source(pts[j]);
            have_src[j] = 1;
        }
        return sources[j];
    };
    // Coarse grid = even fine indices.
    parallel_for(m, [&](std::size_t i) {
        rows[2 * i] = g.fundamental().at(pts[2 * i]).row(0);
        sources[2 * i] = g.source(pts[2 * i]);
    });
    for (std::size_t i = 0; i < m; ++i) have_row[2 * i] = have_src[2 * i] = 1;

    SignReport rep;
    rep.grid = m;
    rep.zero_band = zero_band;
    rep.min = INFINITY;
    rep.max = -INFINITY;
    auto visit = [&](std::size_t i, std::size_t j) {
        const double v = GreensEvaluator::value(row(i), pts[i], src(j));
        if (v < rep.min) {
            rep.min = v;
            rep.argmin_t = pts[i];
            rep.argmin_s = pts[j];
        }
        if (v > rep.max) {
            rep.max = v;
            rep.argmax_t = pts[i];
            rep.argmax_s = pts[j];
        }
        return v;
    };
    Matrix coarse(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) coarse(i, j) = visit(2 * i, 2 * j);

    const double scale0 = std::max(std::fabs(rep.min), std::fabs(rep.max));
    const double near = 0.01 * scale0;
    for (std::size_t i = 0; i + 1 < m; ++i)
        for (std::size_t j = 0; j + 1 < m; ++j) {
            const double c = std::min({std::fabs(coarse(i, j)), std::fabs(coarse(i + 1, j)),
                                       std::fabs(coarse(i, j + 1)), std::fabs(coarse(i + 1, j + 1))});
            if (c > near) continue;
            ++rep.refined_cells;
            const std::size_t fi = 2 * i, fj = 2 * j;
            visit(fi + 1, fj);
            visit(fi, fj + 1);
            visit(fi + 1, fj + 1);
            visit(fi + 2, fj + 1);
            visit(fi + 1, fj + 2);
        }

    const double scale = std::max(std::fabs(rep.min), std::fabs(rep.max));
    const double band = zero_band * scale;
    bool pos = rep.max > band;
    bool neg = rep.min < -band;
    if (scale > 0.0 && pos != neg) {
        for (bool t_edge : {true, false})
            for (bool at_end : {false, true}) {
                const auto v = detail::edge_layer(g, t_edge, at_end, scale, band, fine);
                if (!v.analysed) continue;
                ++rep.edges_analysed;
                if (pos && v.has_neg) {
                    neg = true;
                    rep.edge_sign_change = true;
                }
                if (neg && v.has_pos) {
                    pos = true;
                    rep.edge_sign_change = true;
                }
            }
    }
    if (scale == 0.0 || (!pos && !neg)) rep.classification = SignClass::Zero;
    else if (pos && neg) rep.classification = SignClass::SignChanging;
    else rep.classification = pos ? SignClass::Nonnegative : SignClass::Nonpositive;
    return rep;
}

/// Classification at a given lambda; nullopt when the problem is resonant there.
inline std::optional<SignReport> classify_at(const LinearOperator& op, BCKind kind, double lambda,
                                             std::size_t m = default_sign_grid, double zero_band = default_zero_band,
                                             double tol = default_integrator_tol) {
    try {
        const GreensEvaluator g(ProblemSpec{op, kind, lambda}, tol);
        return classify_sign(g, m, zero_band);
    } catch (const ResonanceError&) {
        return std::nullopt;
    }
}

enum class SignSide { NonpositiveBelow, NonnegativeAbove };

inline std::string_view to_string(SignSide s) {
    return s == SignSide::NonpositiveBelow ? "nonpositive-below-principal" : "nonnegative-above-principal";
}

enum class EndpointStatus { ThresholdFound, WindowExhausted };

inline std::string_view to_string(EndpointStatus s) {
    return s == EndpointStatus::ThresholdFound ? "threshold-found" : "window-exhausted";
}

struct SignIntervalResult {
    BCKind kind = BCKind::Dirichlet;
    SignSide side = SignSide::NonpositiveBelow;
    double lo = 0.0, hi = 0.0;
    double principal = 0.0;
    double threshold = 0.0; // the endpoint that is not the principal eigenvalue
    EndpointStatus status = EndpointStatus::ThresholdFound;
    double lambda_tol = 0.0;
    std::size_t classifications = 0;
};

struct SignSearchOptions {
    std::size_t grid = default_sign_grid;
    double zero_band = default_zero_band;
    double integrator_tol = default_integrator_tol;
    SpectrumOptions spectrum{};
    /// Known principal eigenvalue; located in the search window when absent.
    std::optional<double> principal;
};

/// Maximal constant-sign lambda interval on one side of the principal eigenvalue.
inline SignIntervalResult sign_interval(const LinearOperator& op, BCKind kind, SignSide side, double window_lo,
                                        double window_hi, double lambda_tol = 1e-4,
                                        const SignSearchOptions& opt = {}) {
    if (!(window_lo < window_hi)) throw ConfigError("search window must satisfy lo < hi");
    const double principal = opt.principal
                                 ? *opt.principal
                                 : principal_eigenvalue(op, kind, window_lo, window_hi, opt.spectrum);
    if (principal < window_lo || principal > window_hi)
        throw ConfigError("principal eigenvalue outside the search window");

    SignIntervalResult res;
    res.kind = kind;
    res.side = side;
    res.principal = principal;
    res.lambda_tol = lambda_tol;

    const SignClass wanted = side == SignSide::NonpositiveBelow ? SignClass::Nonpositive : SignClass::Nonnegative;
    const double dir = side == SignSide::NonpositiveBelow ? -1.0 : 1.0;
    const double limit = side == SignSide::NonpositiveBelow ? window_lo : window_hi;
    auto holds = [&](double lambda) {
        ++res.classifications;
        const auto rep = classify_at(op, kind, lambda, opt.grid, opt.zero_band, opt.integrator_tol);
        return rep && rep->classification == wanted;
    };

    const double width = window_hi - window_lo;
    const double step = width / 100.0;
    const double offset = std::min(1e-3, 0.01 * step);
    double good = principal + dir * offset;
    if (!holds(good))
        throw NumericalError("no " + std::string(to_string(wanted)) + " region adjacent to the principal eigenvalue " +
                             std::to_string(principal));
    std::optional<double> bad;
    for (double x = good + dir * step;; x += dir * step) {
        const bool past = dir * (x - limit) >= 0.0;
        if (past) x = limit;
        if (!holds(x)) {
            bad = x;
            break;
        }
        good = x;
        if (past) break;
    }
    if (!bad) {
        res.status = EndpointStatus::WindowExhausted;
        res.threshold = limit;
    } else {
        double a = good, b = *bad;
        while (std::fabs(b - a) > lambda_tol) {
            const double mid = 0.5 * (a + b);
            if (holds(mid)) a = mid;
            else b = mid;
        }
        res.threshold = 0.5 * (a + b);
    }
    res.lo = std::min(principal, res.threshold);
    res.hi = std::max(principal, res.threshold);
    return res;
}

// ---------------------------------------------------------------------------
// Sign implications between kernels of different problems

struct SignImplicationRow {
    double lambda = 0.0;
    std::string premise;    // e.g. "P[2T] <= 0"
    std::string conclusion; // e.g. "N[T] <= 0"
    SignClass premise_observed = SignClass::Zero;
    SignClass conclusion_observed = SignClass::Zero;
    bool applicable = false; // premise kernel had the required sign
    bool pass = true;
    double worst_value = 0.0; // most violating conclusion value (relative), when failing
    double worst_t = 0.0, worst_s = 0.0;
};

struct SignImplicationReport {
    std::vector<SignImplicationRow> rows;
    std::vector<std::string> skipped; // resonant lambdas
    bool pass() const {
        return std::all_of(rows.begin(), rows.end(), [](const SignImplicationRow& r) { return r.pass; });
    }
};

/// Checks: P[2T] <= 0 => N[T] <= 0 (and >=), N[2T] => N[T], D[2T] => M2[T], at each lambda sample.
inline SignImplicationReport verify_sign_implications(const LinearOperator& op, const std::vector<double>& lambdas,
                                                 std::size_t m = default_sign_grid,
                                                 double tol = default_integrator_tol) {
    const LinearOperator dbl = extend_to_double(op);
    SignImplicationReport rep;
    struct Pair {
        const LinearOperator* premise_op;
        BCKind premise;
        const char* premise_name;
        BCKind conclusion;
        const char* conclusion_name;
    };
    const Pair pairs[] = {{&dbl, BCKind::Periodic, "P[2T]", BCKind::Neumann, "N[T]"},
                          {&dbl, BCKind::Neumann, "N[2T]", BCKind::Neumann, "N[T]"},
                          {&dbl, BCKind::Dirichlet, "D[2T]", BCKind::Mixed2, "M2[T]"}};
    for (double lambda : lambdas) {
        for (const auto& p : pairs) {
            const auto prem = classify_at(*p.premise_op, p.premise, lambda, m, default_zero_band, tol);
            const auto conc = classify_at(op, p.conclusion, lambda, m, default_zero_band, tol);
            if (!prem || !conc) {
                rep.skipped.push_back(std::string(p.premise_name) + "/" + p.conclusion_name +
                                      " resonant at lambda = " + std::to_string(lambda));
                continue;
            }
            for (SignClass want : {SignClass::Nonpositive, SignClass::Nonnegative}) {
                const char* rel = want == SignClass::Nonpositive ? " <= 0" : " >= 0";
                SignImplicationRow row;
                row.lambda = lambda;
                row.premise = std::string(p.premise_name) + rel;
                row.conclusion = std::string(p.conclusion_name) + rel;
                row.premise_observed = prem->classification;
                row.conclusion_observed = conc->classification;
                row.applicable = prem->classification == want;
                if (row.applicable) {
                    row.pass = conc->classification == want || conc->classification == SignClass::Zero;
                    if (!row.pass) {
                        const double scale = std::max(std::fabs(conc->min), std::fabs(conc->max));
                        const bool low = want == SignClass::Nonnegative;
                        row.worst_value = (low ? conc->min : conc->max) / scale;
                        row.worst_t = low ? conc->argmin_t : conc->argmax_t;
                        row.worst_s = low ? conc->argmin_s : conc->argmax_s;
                    }
                }
                rep.rows.push_back(row);
            }
        }
    }
    return rep;
}

/// (lambda, min G, max G) samples over a lambda range, resonant points skipped.
struct SweepRow {
    double lambda, min, max;
};

inline std::vector<SweepRow> sign_sweep(const LinearOperator& op, BCKind kind, double lo, double hi,
                                        std::size_t count, std::size_t m = default_sign_grid) {
    std::vector<SweepRow> out;
    for (std::size_t i = 0; i < count; ++i) {
        const double lambda = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
        if (const auto rep = classify_at(op, kind, lambda, m)) out.push_back({lambda, rep->min, rep->max});
    }
    return out;
}

} // namespace greenkit
