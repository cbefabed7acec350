/**
 * @file comparison.hpp
 * @brief Green-integral solutions of L[lambda] u = sigma and pointwise comparison
 * of kernels and solutions under different boundary conditions.
 */
#pragma once

#include <greenkit/error.hpp>
#include <greenkit/expr.hpp>
#include <greenkit/greens.hpp>
#include <greenkit/parallel.hpp>
#include <greenkit/signscan.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace greenkit {

struct SampledSolution {
    BCKind kind = BCKind::Dirichlet;
    double lambda = 0.0;
    std::vector<double> t;
    std::vector<double> u;
    std::string source; // printed sigma
};

namespace detail {

/// Pairwise (cascade) summation; the order of additions depends only on the length.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Composite Simpson weights on 2m-1 points (every coarse cell plus its midpoint).
inline std::vector<double> simpson_weights(double length, std::size_t m) {
    const std::size_t fine = 2 * m - 1;
    const double h = length / static_cast<double>(fine - 1);
    std::vector<double> w(fine);
    for (std::size_t j = 0; j < fine; ++j) w[j] = (j == 0 || j + 1 == fine) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    for (double& x : w) x *= h / 3.0;
    return w;
}

} // namespace detail

/// u(t_i) = int_0^T G(t_i, s) sigma(s) ds on the uniform m-point grid. Simpson panels
/// use the grid cells with their midpoints, so every panel boundary set includes s = t_i
/// and the diagonal kink of G never falls inside a panel.
inline SampledSolution solve_bvp(const GreensEvaluator& g, const ExprAst& sigma, std::size_t m = 41) {
    if (m < 41 || m % 2 == 0) throw ConfigError("quadrature grid must be odd and at least 41, got " + std::to_string(m));
    const double len = g.length();
    const double lam = g.problem().lambda;
    SampledSolution sol;
    sol.kind = g.problem().kind;
    sol.lambda = lam;
    sol.t = uniform_grid(len, m);
    sol.source = sigma.to_string();
    const auto s = uniform_grid(len, 2 * m - 1);
    const auto w = detail::simpson_weights(len, m);
    std::vector<double> ws(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) ws[j] = w[j] * sigma.eval(s[j], lam);
    const Matrix k = g.block(sol.t, s);
    sol.u.resize(m);
    parallel_for(m, [&](std::size_t i) {
        std::vector<double> terms(s.size());
        for (std::size_t j = 0; j < s.size(); ++j)
            terms[j] = k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * ws[j];
        sol.u[i] = detail::pairwise_sum(terms);
    });
    return sol;
}

enum class ComparisonTheorem { ND, NM1, M2D };

inline constexpr ComparisonTheorem all_comparison_theorems[] = {ComparisonTheorem::ND, ComparisonTheorem::NM1,
                                                                ComparisonTheorem::M2D};

inline std::string_view to_string(ComparisonTheorem th) {
    switch (th) {
    case ComparisonTheorem::ND: return "ND";
    case ComparisonTheorem::NM1: return "NM1";
    case ComparisonTheorem::M2D: return "M2D";
    }
    return "?";
}

inline std::optional<ComparisonTheorem> parse_comparison_theorem(std::string_view s) {
    for (auto th : all_comparison_theorems)
        if (to_string(th) == s) return th;
    return std::nullopt;
}

/// The dominating problem, the dominated one and the premise kernel on [0,2T].
struct TheoremRoles {
    BCKind dominant;
    BCKind other;
    BCKind premise;
};

inline TheoremRoles theorem_roles(ComparisonTheorem th) {
    switch (th) {
    case ComparisonTheorem::ND: return {BCKind::Neumann, BCKind::Dirichlet, BCKind::Periodic};
    case ComparisonTheorem::NM1: return {BCKind::Neumann, BCKind::Mixed1, BCKind::Neumann};
    case ComparisonTheorem::M2D: return {BCKind::Mixed2, BCKind::Dirichlet, BCKind::Dirichlet};
    }
    return {};
}

/// Sign of the premise kernel of a theorem, or nullopt when it is resonant.
inline std::optional<SignReport> premise_sign(ComparisonTheorem th, const LinearOperator& op, double lam,
                                              std::size_t grid = default_sign_grid) {
    return classify_at(extend_to_double(op), theorem_roles(th).premise, lam, grid);
}

struct DominationReport {
    ComparisonTheorem theorem = ComparisonTheorem::ND;
    double lambda = 0.0;
    std::size_t grid = 0;
    std::optional<SignClass> premise;
    bool applicable = false;
    bool nonnegative_case = true; // G_dom >= |G_other|, else G_dom <= -|G_other|
    double worst_slack = 0.0;     // min over the grid of the signed margin
    double at_t = 0.0, at_s = 0.0;
    double scale = 0.0;
    std::size_t violations = 0;
    bool pass = false;
    std::string note;
};

inline constexpr double comparison_slack = 1e-9;

/// Kernel domination under a constant-sign premise, checked on the m x m grid of [0,T].
inline DominationReport check_kernel_domination(ComparisonTheorem th, const LinearOperator& op, double lam,
                                                std::size_t m = 41) {
    DominationReport rep;
    rep.theorem = th;
    rep.lambda = lam;
    rep.grid = m;
    const auto pre = premise_sign(th, op, lam);
    if (!pre) {
        rep.note = "premise kernel resonant";
        return rep;
    }
    rep.premise = pre->classification;
    if (rep.premise != SignClass::Nonnegative && rep.premise != SignClass::Nonpositive) {
        rep.note = "not applicable: premise kernel is " + std::string(to_string(*rep.premise));
        return rep;
    }
    rep.applicable = true;
    rep.nonnegative_case = rep.premise == SignClass::Nonnegative;
    const auto roles = theorem_roles(th);
    const GreensEvaluator dom(ProblemSpec{op, roles.dominant, lam});
    const GreensEvaluator oth(ProblemSpec{op, roles.other, lam});
    const auto pts = uniform_grid(op.length(), m);
    const Matrix a = dom.block(pts, pts);
    const Matrix b = oth.block(pts, pts);
    rep.scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
    // margin >= 0 exactly when the inequality holds
    const Matrix margin = rep.nonnegative_case ? Matrix(a - b.cwiseAbs()) : Matrix(-a - b.cwiseAbs());
    Eigen::Index r = 0, c = 0;
    rep.worst_slack = margin.minCoeff(&r, &c);
    rep.at_t = pts[static_cast<std::size_t>(r)];
    rep.at_s = pts[static_cast<std::size_t>(c)];
    const double floor = -comparison_slack * rep.scale;
    rep.violations = static_cast<std::size_t>((margin.array() < floor).count());
    rep.pass = rep.violations == 0;
    return rep;
}

/// One concluded inequality: lhs <= rhs at every grid point.
struct InequalityCheck {
    std::string statement;
    double worst_slack = 0.0; // min of rhs - lhs
    double at_t = 0.0;
    bool pass = false;
};

struct SolutionComparisonReport {
    ComparisonTheorem theorem = ComparisonTheorem::ND;
    int case_number = 1;
    double lambda = 0.0;
    std::size_t grid = 0;
    std::optional<SignClass> premise;
    bool applicable = false;
    SampledSolution dominant;
    SampledSolution other;
    double scale = 0.0;
    std::vector<InequalityCheck> checks;
    bool pass = false;
    std::string note;
};

namespace detail {

inline const char* kind_label(BCKind k) {
    switch (k) {
    case BCKind::Neumann: return "u_N";
    case BCKind::Dirichlet: return "u_D";
    case BCKind::Mixed1: return "u_M1";
    case BCKind::Mixed2: return "u_M2";
    case BCKind::Periodic: return "u_P";
    case BCKind::Antiperiodic: return "u_A";
    }
    return "u";
}

inline InequalityCheck pointwise_le(std::string statement, const std::vector<double>& t,
                                    const std::vector<double>& lhs, const std::vector<double>& rhs, double scale) {
    InequalityCheck c{std::move(statement), INFINITY, 0.0, false};
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double slack = rhs[i] - lhs[i];
        if (slack < c.worst_slack) {
            c.worst_slack = slack;
            c.at_t = t[i];
        }
    }
    c.pass = c.worst_slack >= -comparison_slack * scale;
    return c;
}

} // namespace detail

/// Hypothesis on (sigma1, sigma2) for a case, checked on the quadrature nodes.
/// Case 1: |sigma2| <= sigma1. Case 2: 0 <= sigma2 <= sigma1. Case 3: sigma1 <= sigma2 <= 0.
inline void check_sigma_hypothesis(int case_number, const ExprAst& sigma1, const ExprAst& sigma2, double length,
                                   double lam, std::size_t m) {
    const auto s = uniform_grid(length, 2 * m - 1);
    for (double x : s) {
        const double a = sigma1.eval(x, lam);
        const double b = sigma2.eval(x, lam);
        bool ok = false;
        const char* need = "";
        switch (case_number) {
        case 1: ok = std::fabs(b) <= a; need = "|sigma2| <= sigma1"; break;
        case 2: ok = 0.0 <= b && b <= a; need = "0 <= sigma2 <= sigma1"; break;
        case 3: ok = a <= b && b <= 0.0; need = "sigma1 <= sigma2 <= 0"; break;
        default: throw ConfigError("comparison case must be 1, 2 or 3");
        }
        if (!ok)
            throw ConfigError(std::string("hypothesis ") + need + " violated at s = " + std::to_string(x) +
                              " (sigma1 = " + std::to_string(a) + ", sigma2 = " + std::to_string(b) + ")");
    }
}

/// Solves both problems and checks the conclusion of the chosen theorem case.
/// The premise sign must match the case (>= 0 for case 1, <= 0 for cases 2 and 3);
/// otherwise the report is marked not applicable.
inline SolutionComparisonReport check_solution_comparison(ComparisonTheorem th, int case_number,
                                                          const LinearOperator& op, double lam,
                                                          const ExprAst& sigma1, const ExprAst& sigma2,
                                                          std::size_t m = 41) {
    check_sigma_hypothesis(case_number, sigma1, sigma2, op.length(), lam, m);
    SolutionComparisonReport rep;
    rep.theorem = th;
    rep.case_number = case_number;
    rep.lambda = lam;
    rep.grid = m;
    const auto pre = premise_sign(th, op, lam);
    if (!pre) {
        rep.note = "premise kernel resonant";
        return rep;
    }
    rep.premise = pre->classification;
    const SignClass wanted = case_number == 1 ? SignClass::Nonnegative : SignClass::Nonpositive;
    if (rep.premise != wanted) {
        rep.note = "not applicable: premise kernel is " + std::string(to_string(*rep.premise)) + ", case needs " +
                   std::string(to_string(wanted));
        return rep;
    }
    rep.applicable = true;
    const auto roles = theorem_roles(th);
    rep.dominant = solve_bvp(GreensEvaluator(ProblemSpec{op, roles.dominant, lam}), sigma1, m);
    rep.other = solve_bvp(GreensEvaluator(ProblemSpec{op, roles.other, lam}), sigma2, m);
    const auto& t = rep.dominant.t;
    const auto& ud = rep.dominant.u;
    const auto& uo = rep.other.u;
    for (std::size_t i = 0; i < t.size(); ++i) rep.scale = std::max({rep.scale, std::fabs(ud[i]), std::fabs(uo[i])});
    const std::string d = detail::kind_label(roles.dominant);
    const std::string o = detail::kind_label(roles.other);
    const std::vector<double> zero(t.size(), 0.0);
    std::vector<double> abs_o(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) abs_o[i] = std::fabs(uo[i]);
    switch (case_number) {
    case 1: rep.checks.push_back(detail::pointwise_le("|" + o + "| <= " + d, t, abs_o, ud, rep.scale)); break;
    case 2:
        rep.checks.push_back(detail::pointwise_le(d + " <= 0", t, ud, zero, rep.scale));
        rep.checks.push_back(detail::pointwise_le(d + " <= " + o, t, ud, uo, rep.scale));
        break;
    case 3:
        rep.checks.push_back(detail::pointwise_le(d + " >= 0", t, zero, ud, rep.scale));
        rep.checks.push_back(detail::pointwise_le(o + " <= " + d, t, uo, ud, rep.scale));
        break;
    default: break;
    }
    rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const InequalityCheck& c) { return c.pass; });
    return rep;
}

/// Solutions of the four separated problems for one sigma; resonant problems are left empty.
struct SolutionTable {
    std::vector<double> t;
    std::optional<std::vector<double>> u_n, u_d, u_m1, u_m2;
};

inline SolutionTable solve_separated(const LinearOperator& op, double lam, const ExprAst& sigma, std::size_t m = 41) {
    SolutionTable out;
    out.t = uniform_grid(op.length(), m);
    auto one = [&](BCKind k) -> std::optional<std::vector<double>> {
        const ProblemSpec spec{op, k, lam};
        if (std::fabs(char_det(spec)) < resonance_threshold) return std::nullopt;
        return solve_bvp(GreensEvaluator(spec), sigma, m).u;
    };
    out.u_n = one(BCKind::Neumann);
    out.u_d = one(BCKind::Dirichlet);
    out.u_m1 = one(BCKind::Mixed1);
    out.u_m2 = one(BCKind::Mixed2);
    return out;
}

} // namespace greenkit
