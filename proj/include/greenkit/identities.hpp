/**
 * @file identities.hpp
 * @brief Residual checks for the decomposition, connecting, reflection and
 * symmetry relations between Green's functions on [0,T], [0,2T] and [0,4T].
 */
#pragma once

#include <greenkit/error.hpp>
#include <greenkit/greens.hpp>
#include <greenkit/linear_operator.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace greenkit {

inline constexpr double default_identity_tol = 1e-6;
inline constexpr std::size_t default_identity_grid = 41;
/// Problems with |char_det| below this are treated as resonant and skipped.
inline constexpr double identity_skip_det = 1e-8;

struct IdentityReport {
    std::string tag;
    double lambda = 0.0;
    std::size_t grid = 0;
    double residual = 0.0;
    double at_t = 0.0, at_s = 0.0;
    double tolerance = default_identity_tol;
    bool pass = false;
    bool skipped = false;
    std::string note;
};

/// Which operator a kernel is built on: L on [0,T], its double or its quadruple extension.
enum class Extension { None, Double, Quadruple };

inline std::string_view to_string(Extension e) {
    switch (e) {
    case Extension::None: return "none";
    case Extension::Double: return "double";
    case Extension::Quadruple: return "quadruple";
    }
    return "?";
}

inline std::optional<Extension> parse_extension(std::string_view s) {
    if (s == "none") return Extension::None;
    if (s == "double") return Extension::Double;
    if (s == "quadruple") return Extension::Quadruple;
    return std::nullopt;
}

inline LinearOperator apply_extension(const LinearOperator& op, Extension e) {
    switch (e) {
    case Extension::None: return op;
    case Extension::Double: return extend_to_double(op);
    case Extension::Quadruple: return extend_to_quadruple(op);
    }
    return op;
}

inline double extension_factor(Extension e) {
    return e == Extension::None ? 1.0 : (e == Extension::Double ? 2.0 : 4.0);
}

/// big(offset * T + direction * t, s) with weight `coef`.
struct ReflectedTerm {
    double coef;
    double offset;
    double direction;
};

struct DecompositionRule {
    std::string_view tag;
    BCKind base;
    BCKind big;
    Extension extension;
    std::vector<ReflectedTerm> terms;
};

inline const std::vector<DecompositionRule>& decomposition_rules() {
    using B = BCKind;
    using E = Extension;
    auto two = [](double sign) { return std::vector<ReflectedTerm>{{1.0, 0.0, 1.0}, {sign, 2.0, -1.0}}; };
    // Terms t, 4T - t, 2T - t, 2T + t.
    auto four = [](double a, double b, double c) {
        return std::vector<ReflectedTerm>{{1.0, 0.0, 1.0}, {a, 4.0, -1.0}, {b, 2.0, -1.0}, {c, 2.0, 1.0}};
    };
    static const std::vector<DecompositionRule> rules = {
        {"N-P2T", B::Neumann, B::Periodic, E::Double, two(1.0)},
        {"N-N2T", B::Neumann, B::Neumann, E::Double, two(1.0)},
        {"N-P4T", B::Neumann, B::Periodic, E::Quadruple, four(1.0, 1.0, 1.0)},
        {"D-P2T", B::Dirichlet, B::Periodic, E::Double, two(-1.0)},
        {"D-D2T", B::Dirichlet, B::Dirichlet, E::Double, two(-1.0)},
        {"D-P4T", B::Dirichlet, B::Periodic, E::Quadruple, four(-1.0, -1.0, 1.0)},
        {"M1-A2T", B::Mixed1, B::Antiperiodic, E::Double, two(-1.0)},
        {"M2-A2T", B::Mixed2, B::Antiperiodic, E::Double, two(1.0)},
        {"M1-N2T", B::Mixed1, B::Neumann, E::Double, two(-1.0)},
        {"M2-D2T", B::Mixed2, B::Dirichlet, E::Double, two(1.0)},
        {"M1-P4T", B::Mixed1, B::Periodic, E::Quadruple, four(1.0, -1.0, -1.0)},
        {"M2-P4T", B::Mixed2, B::Periodic, E::Quadruple, four(-1.0, 1.0, -1.0)},
    };
    return rules;
}

/// big on the extended interval expressed through kernels on [0,T]:
/// big(t,s) = sum plus_coefs * G_k(t,s) and, for two-part relations,
/// big(2T - t, s) = sum minus_coefs * G_k(t,s).
struct ConnectingRule {
    std::string_view tag;
    BCKind big;
    Extension extension;
    std::vector<BCKind> parts;
    std::vector<double> plus_coefs;
    std::vector<double> minus_coefs; // empty: no reflected companion
};

inline const std::vector<ConnectingRule>& connecting_rules() {
    using B = BCKind;
    using E = Extension;
    static const std::vector<ConnectingRule> rules = {
        {"P2T-ND", B::Periodic, E::Double, {B::Neumann, B::Dirichlet}, {0.5, 0.5}, {0.5, -0.5}},
        {"A2T-M2M1", B::Antiperiodic, E::Double, {B::Mixed2, B::Mixed1}, {0.5, 0.5}, {0.5, -0.5}},
        {"N2T-NM1", B::Neumann, E::Double, {B::Neumann, B::Mixed1}, {0.5, 0.5}, {0.5, -0.5}},
        {"D2T-M2D", B::Dirichlet, E::Double, {B::Mixed2, B::Dirichlet}, {0.5, 0.5}, {0.5, -0.5}},
        {"P4T-NDM1M2",
         B::Periodic,
         E::Quadruple,
         {B::Neumann, B::Dirichlet, B::Mixed1, B::Mixed2},
         {0.25, 0.25, 0.25, 0.25},
         {}},
    };
    return rules;
}

inline const DecompositionRule* find_decomposition(std::string_view tag) {
    for (const auto& r : decomposition_rules())
        if (r.tag == tag) return &r;
    return nullptr;
}

inline const ConnectingRule* find_connecting(std::string_view tag) {
    for (const auto& r : connecting_rules())
        if (r.tag == tag) return &r;
    return nullptr;
}

/// Symmetry, mixed reflection and slope-one tags are handled separately.
inline std::vector<std::string> all_identity_tags() {
    std::vector<std::string> out;
    for (const auto& r : decomposition_rules()) out.emplace_back(r.tag);
    for (const auto& r : connecting_rules()) out.emplace_back(r.tag);
    out.emplace_back("mixed-reflection");
    for (BCKind k : {BCKind::Periodic, BCKind::Neumann, BCKind::Dirichlet, BCKind::Antiperiodic})
        out.push_back("symmetry-" + std::string(to_string(k)));
    return out;
}

namespace detail {

inline void record_max(IdentityReport& rep, const Matrix& diff, const std::vector<double>& ts,
                       const std::vector<double>& ss) {
    Eigen::Index r = 0, c = 0;
    const double v = diff.cwiseAbs().maxCoeff(&r, &c);
    if (v > rep.residual || rep.grid == 0) {
        rep.residual = v;
        rep.at_t = ts[static_cast<std::size_t>(r)];
        rep.at_s = ss[static_cast<std::size_t>(c)];
    }
}

inline void finish(IdentityReport& rep, std::size_t m, double tol) {
    rep.grid = m;
    rep.tolerance = tol;
    rep.pass = rep.residual <= tol;
}

inline std::vector<double> mapped(const std::vector<double>& ts, double offset, double direction) {
    std::vector<double> out(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) out[i] = offset + direction * ts[i];
    return out;
}

inline void check_length(const GreensEvaluator& g, double expected, const char* what) {
    if (std::fabs(g.length() - expected) > 1e-12 * expected)
        throw ConfigError(std::string("mismatched intervals: ") + what + " has length " +
                          std::to_string(g.length()) + ", expected " + std::to_string(expected));
}

} // namespace detail

/// max |G(t,s) - G(2T-t, 2T-s)| over the m x m grid of the kernel's own interval.
inline IdentityReport check_symmetry(const GreensEvaluator& g2t, std::size_t m = default_identity_grid,
                                     double tol = default_identity_tol) {
    IdentityReport rep;
    rep.tag = "symmetry-" + std::string(to_string(g2t.problem().kind));
    rep.lambda = g2t.problem().lambda;
    const auto pts = uniform_grid(g2t.length(), m);
    const Matrix grid = g2t.block(pts, pts);
    const Matrix flipped = grid.reverse();
    detail::record_max(rep, grid - flipped, pts, pts);
    detail::finish(rep, m, tol);
    return rep;
}

/// Residual of one labelled decomposition of `base` on [0,T] in terms of `big`.
inline IdentityReport check_decomposition(std::string_view tag, const GreensEvaluator& base,
                                          const GreensEvaluator& big, std::size_t m = default_identity_grid,
                                          double tol = default_identity_tol) {
    const DecompositionRule* rule = find_decomposition(tag);
    if (!rule) throw ConfigError("unknown decomposition tag '" + std::string(tag) + "'");
    const double len = base.length();
    detail::check_length(big, extension_factor(rule->extension) * len, "extended kernel");
    IdentityReport rep;
    rep.tag = std::string(tag);
    rep.lambda = base.problem().lambda;
    const auto pts = uniform_grid(len, m);
    Matrix diff = base.block(pts, pts);
    for (const auto& term : rule->terms) diff -= term.coef * big.block(detail::mapped(pts, term.offset * len, term.direction), pts);
    detail::record_max(rep, diff, pts, pts);
    detail::finish(rep, m, tol);
    return rep;
}

/// Residual of one connecting relation; `parts` follow the order of the rule.
inline IdentityReport check_connecting(std::string_view tag, const std::vector<const GreensEvaluator*>& parts,
                                       const GreensEvaluator& big, std::size_t m = default_identity_grid,
                                       double tol = default_identity_tol) {
    const ConnectingRule* rule = find_connecting(tag);
    if (!rule) throw ConfigError("unknown connecting tag '" + std::string(tag) + "'");
    if (parts.size() != rule->parts.size())
        throw ConfigError("connecting relation " + std::string(tag) + " needs " +
                          std::to_string(rule->parts.size()) + " kernels");
    const double len = parts.front()->length();
    for (const auto* p : parts) detail::check_length(*p, len, "base kernel");
    detail::check_length(big, extension_factor(rule->extension) * len, "extended kernel");
    IdentityReport rep;
    rep.tag = std::string(tag);
    rep.lambda = big.problem().lambda;
    const auto pts = uniform_grid(len, m);
    std::vector<Matrix> base(parts.size());
    for (std::size_t k = 0; k < parts.size(); ++k) base[k] = parts[k]->block(pts, pts);
    Matrix diff = big.block(pts, pts);
    for (std::size_t k = 0; k < parts.size(); ++k) diff -= rule->plus_coefs[k] * base[k];
    detail::record_max(rep, diff, pts, pts);
    if (!rule->minus_coefs.empty()) {
        Matrix refl = big.block(detail::mapped(pts, 2.0 * len, -1.0), pts);
        for (std::size_t k = 0; k < parts.size(); ++k) refl -= rule->minus_coefs[k] * base[k];
        detail::record_max(rep, refl, pts, pts);
    }
    detail::finish(rep, m, tol);
    return rep;
}

/// max |a(T-t, T-s) - b(t,s)| over the m x m grid.
inline IdentityReport check_reflection_pair(const GreensEvaluator& a, const GreensEvaluator& b,
                                            std::size_t m = default_identity_grid,
                                            double tol = default_identity_tol) {
    detail::check_length(b, a.length(), "reflected kernel");
    IdentityReport rep;
    rep.tag = "reflection";
    rep.lambda = a.problem().lambda;
    const auto pts = uniform_grid(a.length(), m);
    const Matrix lhs = a.block(pts, pts).reverse();
    detail::record_max(rep, lhs - b.block(pts, pts), pts, pts);
    detail::finish(rep, m, tol);
    return rep;
}

/// G_M1 of L against G_M2 of the reflected operator, and G_M2 of L against G_M1 of it.
inline IdentityReport check_mixed_reflection(const LinearOperator& op, double lam,
                                             std::size_t m = default_identity_grid,
                                             double tol = default_identity_tol) {
    const LinearOperator r = reflect(op);
    const GreensEvaluator m1(ProblemSpec{op, BCKind::Mixed1, lam});
    const GreensEvaluator m2(ProblemSpec{op, BCKind::Mixed2, lam});
    const GreensEvaluator rm1(ProblemSpec{r, BCKind::Mixed1, lam});
    const GreensEvaluator rm2(ProblemSpec{r, BCKind::Mixed2, lam});
    IdentityReport a = check_reflection_pair(m1, rm2, m, tol);
    const IdentityReport b = check_reflection_pair(m2, rm1, m, tol);
    if (b.residual > a.residual) {
        a.residual = b.residual;
        a.at_t = b.at_t;
        a.at_s = b.at_s;
    }
    a.tag = "mixed-reflection";
    detail::finish(a, m, tol);
    return a;
}

/// G(t,s) against G(t-s, 0) for s <= t and G(T+t-s, 0) otherwise.
inline IdentityReport check_slope_constancy(const GreensEvaluator& g, std::size_t m = default_identity_grid,
                                            double tol = 1e-7) {
    IdentityReport rep;
    rep.tag = "slope-one";
    rep.lambda = g.problem().lambda;
    const auto pts = uniform_grid(g.length(), m);
    // On a uniform grid t_i - s_j and T + t_i - s_j are grid points again.
    const Matrix grid = g.block(pts, pts);
    Matrix diff(grid.rows(), grid.cols());
    const auto n = static_cast<Eigen::Index>(m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Index k = i >= j ? i - j : n - 1 + i - j;
            diff(i, j) = grid(i, j) - grid(k, 0);
        }
    detail::record_max(rep, diff, pts, pts);
    detail::finish(rep, m, tol);
    return rep;
}

/// Builds and caches the kernels an identity needs for one operator and lambda.
/// Kernels with |char_det| < identity_skip_det are reported as resonant.
class KernelCache {
public:
    KernelCache(LinearOperator op, double lambda, double tol = default_integrator_tol)
        : op_(std::move(op)), lambda_(lambda), tol_(tol) {}

    double lambda() const noexcept { return lambda_; }
    const LinearOperator& op() const noexcept { return op_; }

    /// nullptr when the problem is resonant.
    const GreensEvaluator* get(BCKind kind, Extension ext) {
        const auto key = std::make_pair(static_cast<int>(kind), static_cast<int>(ext));
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            std::optional<GreensEvaluator> g;
            const ProblemSpec spec{apply_extension(op_, ext), kind, lambda_};
            if (std::fabs(char_det(spec, tol_)) >= identity_skip_det) g.emplace(spec, tol_);
            it = cache_.emplace(key, std::move(g)).first;
        }
        return it->second ? &*it->second : nullptr;
    }

private:
    LinearOperator op_;
    double lambda_;
    double tol_;
    std::map<std::pair<int, int>, std::optional<GreensEvaluator>> cache_;
};

namespace detail {

inline IdentityReport skipped_report(std::string_view tag, double lambda, std::size_t m, double tol,
                                     std::string note) {
    IdentityReport rep;
    rep.tag = std::string(tag);
    rep.lambda = lambda;
    rep.grid = m;
    rep.tolerance = tol;
    rep.skipped = true;
    rep.note = std::move(note);
    return rep;
}

inline std::string resonant_note(BCKind kind, Extension ext) {
    return "resonant: " + std::string(to_string(kind)) + " (" + std::string(to_string(ext)) + ")";
}

} // namespace detail

/// Runs one identity by tag (see all_identity_tags) on the operator L over [0,T].
inline IdentityReport run_identity(std::string_view tag, KernelCache& cache, std::size_t m = default_identity_grid,
                                   double tol = default_identity_tol) {
    const double lam = cache.lambda();
    if (const auto* rule = find_decomposition(tag)) {
        const auto* base = cache.get(rule->base, Extension::None);
        if (!base) return detail::skipped_report(tag, lam, m, tol, detail::resonant_note(rule->base, Extension::None));
        const auto* big = cache.get(rule->big, rule->extension);
        if (!big) return detail::skipped_report(tag, lam, m, tol, detail::resonant_note(rule->big, rule->extension));
        return check_decomposition(tag, *base, *big, m, tol);
    }
    if (const auto* rule = find_connecting(tag)) {
        std::vector<const GreensEvaluator*> parts;
        for (BCKind k : rule->parts) {
            const auto* g = cache.get(k, Extension::None);
            if (!g) return detail::skipped_report(tag, lam, m, tol, detail::resonant_note(k, Extension::None));
            parts.push_back(g);
        }
        const auto* big = cache.get(rule->big, rule->extension);
        if (!big) return detail::skipped_report(tag, lam, m, tol, detail::resonant_note(rule->big, rule->extension));
        return check_connecting(tag, parts, *big, m, tol);
    }
    if (tag == "mixed-reflection") {
        const LinearOperator r = reflect(cache.op());
        for (BCKind k : {BCKind::Mixed1, BCKind::Mixed2}) {
            if (!cache.get(k, Extension::None))
                return detail::skipped_report(tag, lam, m, tol, detail::resonant_note(k, Extension::None));
            if (std::fabs(char_det(ProblemSpec{r, k, lam})) < identity_skip_det)
                return detail::skipped_report(tag, lam, m, tol, "resonant: reflected " + std::string(to_string(k)));
        }
        return check_mixed_reflection(cache.op(), lam, m, tol);
    }
    if (tag.starts_with("symmetry-")) {
        const auto kind = parse_bc_kind(tag.substr(9));
        if (!kind) throw ConfigError("unknown identity tag '" + std::string(tag) + "'");
        const auto* g = cache.get(*kind, Extension::Double);
        if (!g) return detail::skipped_report(tag, lam, m, tol, detail::resonant_note(*kind, Extension::Double));
        return check_symmetry(*g, m, tol);
    }
    throw ConfigError("unknown identity tag '" + std::string(tag) + "'");
}

inline IdentityReport run_identity(std::string_view tag, const LinearOperator& op, double lambda,
                                   std::size_t m = default_identity_grid, double tol = default_identity_tol) {
    KernelCache cache(op, lambda);
    return run_identity(tag, cache, m, tol);
}

/// Every tag of all_identity_tags() at every lambda.
inline std::vector<IdentityReport> verify_all_identities(const LinearOperator& op, const std::vector<double>& lambdas,
                                                         std::size_t m = default_identity_grid,
                                                         double tol = default_identity_tol) {
    std::vector<IdentityReport> out;
    for (double lam : lambdas) {
        KernelCache cache(op, lam);
        for (const auto& tag : all_identity_tags()) out.push_back(run_identity(tag, cache, m, tol));
    }
    return out;
}

} // namespace greenkit
