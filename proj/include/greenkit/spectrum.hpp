/**
 * @file spectrum.hpp
 * @brief Eigenvalues as zeros of the characteristic determinant, eigenfunctions,
 * principal eigenvalues, and the spectral decomposition identities.
 *
 * Simple eigenvalues are bracketed by sign changes of the normalized boundary
 * determinant on a uniform lambda scan and refined by bisection plus secant
 * polishing. Zeros without a sign change are found as local minima of |det|
 * that dip below `dip_threshold`; they are kept and flagged as suspected
 * even-multiplicity roots (multiplicity itself is not resolved).
 */
#pragma once

#include <greenkit/error.hpp>
#include <greenkit/greens.hpp>
#include <greenkit/linear_operator.hpp>
#include <greenkit/ode.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace greenkit {

struct EigenvalueEntry {
    double lambda = 0.0;
    int sign_changes = -1;             // -1 when the eigenfunction was not determined
    double bracket_width = 0.0;
    bool even_multiplicity_suspected = false;
    double det = 0.0;                  // char_det at lambda
};

struct Spectrum {
    BCKind kind = BCKind::Dirichlet;
    double window_lo = 0.0;
    double window_hi = 0.0;
    std::vector<EigenvalueEntry> eigenvalues; // strictly increasing
    std::vector<std::string> warnings;

    std::vector<double> values() const {
        std::vector<double> out;
        out.reserve(eigenvalues.size());
        for (const auto& e : eigenvalues) out.push_back(e.lambda);
        return out;
    }
};

struct SpectrumOptions {
    double scan_step = 0.0;   // 0: window width / 400
    double lambda_tol = 1e-6;
    double dip_threshold = 1e-8;
    double integrator_tol = default_integrator_tol;
    bool eigenfunctions = true; // fill sign_changes
};

struct Eigenfunction {
    double lambda = 0.0;
    std::vector<double> t;
    std::vector<double> u; // normalized to max |u| = 1
    int sign_changes = 0;
    double smallest_singular_value = 0.0;
};

namespace detail {

inline int count_sign_changes(const std::vector<double>& u, double ignore_below) {
    int changes = 0;
    int last = 0;
    for (double v : u) {
        if (std::fabs(v) < ignore_below) continue;
        const int s = v > 0 ? 1 : -1;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

class DetFunction {
public:
    DetFunction(const LinearOperator& op, BCKind kind, double tol) : op_(op), kind_(kind), tol_(tol) {}
    double operator()(double lambda) const { return char_det(ProblemSpec{op_, kind_, lambda}, tol_); }

private:
    const LinearOperator& op_;
    BCKind kind_;
    double tol_;
};

} // namespace detail

/// Null vector of the boundary matrix at lambda_star, reconstructed on a 401-point grid.
inline Eigenfunction eigenfunction_at(const LinearOperator& op, BCKind kind, double lambda_star,
                                      double tol = default_integrator_tol, std::size_t points = 401) {
    const FundamentalSystem fs(op, lambda_star, tol);
    const auto sys = detail::assemble_boundary(kind, fs);
    const Eigen::JacobiSVD<Matrix> svd(sys.balanced, Eigen::ComputeFullV);
    const Vector sv = svd.singularValues();
    const int m = static_cast<int>(sv.size());
    if (sv(m - 2) < 1e-4 * sv(0))
        throw NumericalError("null space of dimension >= 2 at lambda = " + std::to_string(lambda_star));
    // B = balanced * trace_r up to row scaling, so the null vector of B is trace_r^{-1} v.
    const Vector c = sys.trace_r.triangularView<Eigen::Upper>().solve(Vector(svd.matrixV().col(m - 1)));

    Eigenfunction ef;
    ef.lambda = lambda_star;
    ef.smallest_singular_value = sv(m - 1);
    ef.t = uniform_grid(fs.length(), points);
    ef.u.resize(points);
    double peak = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        ef.u[i] = fs.at(ef.t[i]).row(0).dot(c);
        peak = std::max(peak, std::fabs(ef.u[i]));
    }
    if (peak > 0.0)
        for (double& v : ef.u) v /= peak;
    ef.sign_changes = detail::count_sign_changes(ef.u, 1e-6);
    return ef;
}

inline Spectrum find_eigenvalues(const LinearOperator& op, BCKind kind, double lo, double hi,
                                 const SpectrumOptions& opt = {}) {
    if (!(lo < hi)) throw ConfigError("eigenvalue window must satisfy lo < hi");
    const double step = opt.scan_step > 0.0 ? opt.scan_step : (hi - lo) / 400.0;
    const detail::DetFunction det(op, kind, opt.integrator_tol);
    Spectrum spec{kind, lo, hi, {}, {}};

    // Resonant endpoints are nudged inward.
    double a = lo, b = hi;
    double fa = det(a), fb = det(b);
    for (int tries = 0; std::fabs(fa) < opt.dip_threshold && tries < 8; ++tries) {
        a += step / 10.0;
        fa = det(a);
    }
    for (int tries = 0; std::fabs(fb) < opt.dip_threshold && tries < 8; ++tries) {
        b -= step / 10.0;
        fb = det(b);
    }
    if (a != lo || b != hi) {
        spec.warnings.push_back("window endpoint resonant; scanned [" + std::to_string(a) + ", " +
                                std::to_string(b) + "]");
        spec.window_lo = a;
        spec.window_hi = b;
    }

    const auto count = static_cast<std::size_t>(std::ceil((b - a) / step));
    std::vector<double> xs(count + 1), fs(count + 1);
    for (std::size_t i = 0; i <= count; ++i) xs[i] = i == count ? b : a + step * static_cast<double>(i);
    fs.front() = fa;
    fs.back() = fb;
    for (std::size_t i = 1; i < count; ++i) fs[i] = det(xs[i]);

    auto refine_bracket = [&](double x0, double f0, double x1, double f1) {
        while (x1 - x0 > opt.lambda_tol) {
            const double xm = 0.5 * (x0 + x1);
            const double fm = det(xm);
            if (fm == 0.0) return EigenvalueEntry{xm, -1, 0.0, false, 0.0};
            if ((fm > 0) == (f0 > 0)) {
                x0 = xm;
                f0 = fm;
            } else {
                x1 = xm;
                f1 = fm;
            }
        }
        double best = std::fabs(f0) < std::fabs(f1) ? x0 : x1;
        double fbest = std::min(std::fabs(f0), std::fabs(f1));
        for (int k = 0; k < 3 && f1 != f0; ++k) {
            const double xs_ = x1 - f1 * (x1 - x0) / (f1 - f0);
            if (!(xs_ > x0 && xs_ < x1)) break;
            const double fs_ = det(xs_);
            if (std::fabs(fs_) < fbest) {
                best = xs_;
                fbest = std::fabs(fs_);
            }
            if (fs_ == 0.0) break;
            if ((fs_ > 0) == (f0 > 0)) {
                x0 = xs_;
                f0 = fs_;
            } else {
                x1 = xs_;
                f1 = fs_;
            }
        }
        return EigenvalueEntry{best, -1, x1 - x0, false, fbest};
    };

    for (std::size_t i = 0; i < count; ++i) {
        if (fs[i] == 0.0) {
            spec.eigenvalues.push_back({xs[i], -1, 0.0, false, 0.0});
            continue;
        }
        if (fs[i + 1] != 0.0 && (fs[i] > 0) != (fs[i + 1] > 0))
            spec.eigenvalues.push_back(refine_bracket(xs[i], fs[i], xs[i + 1], fs[i + 1]));
    }
    if (fs[count] == 0.0) spec.eigenvalues.push_back({xs[count], -1, 0.0, false, 0.0});

    // Touching zeros: local minima of |det| without a sign change.
    for (std::size_t i = 1; i < count; ++i) {
        const double l = std::fabs(fs[i - 1]), c = std::fabs(fs[i]), r = std::fabs(fs[i + 1]);
        if (!(c <= l && c <= r) || c == 0.0) continue;
        if ((fs[i - 1] > 0) != (fs[i] > 0) || (fs[i] > 0) != (fs[i + 1] > 0)) continue;
        double x0 = xs[i - 1], x1 = xs[i + 1];
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double p = x1 - g * (x1 - x0), q = x0 + g * (x1 - x0);
        double fp = std::fabs(det(p)), fq = std::fabs(det(q));
        while (x1 - x0 > 0.1 * opt.lambda_tol) {
            if (fp < fq) {
                x1 = q;
                q = p;
                fq = fp;
                p = x1 - g * (x1 - x0);
                fp = std::fabs(det(p));
            } else {
                x0 = p;
                p = q;
                fp = fq;
                q = x0 + g * (x1 - x0);
                fq = std::fabs(det(q));
            }
        }
        const double xm = fp < fq ? p : q;
        const double fm = std::min(fp, fq);
        if (fm < opt.dip_threshold) spec.eigenvalues.push_back({xm, -1, x1 - x0, true, fm});
    }

    std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end(),
              [](const EigenvalueEntry& x, const EigenvalueEntry& y) { return x.lambda < y.lambda; });
    // Collapse duplicates from adjacent brackets sharing an exact zero.
    std::vector<EigenvalueEntry> unique;
    for (const auto& e : spec.eigenvalues)
        if (unique.empty() || e.lambda - unique.back().lambda > opt.lambda_tol) unique.push_back(e);
    spec.eigenvalues = std::move(unique);

    if (opt.eigenfunctions) {
        for (auto& e : spec.eigenvalues) {
            if (e.even_multiplicity_suspected) continue;
            try {
                e.sign_changes = eigenfunction_at(op, kind, e.lambda, opt.integrator_tol).sign_changes;
            } catch (const NumericalError& err) {
                spec.warnings.push_back(err.what());
            }
        }
    }
    return spec;
}

/// Eigenvalue in the window whose eigenfunction has no interior sign change; the largest if several.
inline double principal_eigenvalue(const LinearOperator& op, BCKind kind, double lo, double hi,
                                   const SpectrumOptions& opt = {}, std::vector<std::string>* warnings = nullptr) {
    SpectrumOptions o = opt;
    o.eigenfunctions = true;
    const Spectrum spec = find_eigenvalues(op, kind, lo, hi, o);
    std::vector<double> candidates;
    for (const auto& e : spec.eigenvalues)
        if (e.sign_changes == 0) candidates.push_back(e.lambda);
    if (candidates.empty())
        throw NumericalError("no constant-sign eigenfunction for " + std::string(to_string(kind)) + " in [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "]");
    if (candidates.size() > 1 && warnings != nullptr)
        warnings->push_back(std::to_string(candidates.size()) + " constant-sign eigenfunctions for " +
                            std::string(to_string(kind)) + "; taking the largest eigenvalue");
    return candidates.back();
}

// ---------------------------------------------------------------------------
// Spectral decomposition identities

struct SetIdentityResult {
    std::string name;
    std::vector<double> lhs;
    std::vector<double> rhs;
    std::vector<double> only_lhs;
    std::vector<double> only_rhs;
    bool applicable = true;
    bool pass = false;
};

struct SpectrumUnionReport {
    std::vector<SetIdentityResult> identities;
    std::vector<std::string> warnings;
    bool pass() const {
        return std::all_of(identities.begin(), identities.end(),
                           [](const SetIdentityResult& r) { return !r.applicable || r.pass; });
    }
};

namespace detail {

inline std::vector<double> merge_sets(std::vector<std::vector<double>> sets, double tol) {
    std::vector<double> all;
    for (auto& s : sets) all.insert(all.end(), s.begin(), s.end());
    std::sort(all.begin(), all.end());
    std::vector<double> out;
    for (double v : all)
        if (out.empty() || v - out.back() > tol) out.push_back(v);
    return out;
}

inline SetIdentityResult compare_sets(std::string name, std::vector<double> lhs, std::vector<double> rhs,
                                      double tol) {
    SetIdentityResult r{std::move(name), std::move(lhs), std::move(rhs), {}, {}, true, false};
    auto unmatched = [tol](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> out;
        for (double x : a)
            if (std::none_of(b.begin(), b.end(), [&](double y) { return std::fabs(x - y) <= tol; }))
                out.push_back(x);
        return out;
    };
    r.only_lhs = unmatched(r.lhs, r.rhs);
    r.only_rhs = unmatched(r.rhs, r.lhs);
    r.pass = r.only_lhs.empty() && r.only_rhs.empty();
    return r;
}

/// True when a_k(t) = (-1)^k a_k(T - t) at sample points (reflection-invariant operator).
inline bool reflection_invariant(const LinearOperator& op, double lambda, double tol = 1e-12) {
    const LinearOperator r = reflect(op);
    for (int k = 0; k < op.order(); ++k)
        for (int i = 0; i <= 50; ++i) {
            const double t = op.length() * i / 50.0;
            const double a = op.coefficient(k, t, lambda);
            const double b = r.coefficient(k, t, lambda);
            if (std::fabs(a - b) > tol * (1.0 + std::fabs(a))) return false;
        }
    return true;
}

} // namespace detail

inline SpectrumUnionReport verify_spectrum_unions(const LinearOperator& op, double lo, double hi,
                                                  double lambda_tol = 1e-6, SpectrumOptions opt = {}) {
    opt.lambda_tol = lambda_tol;
    opt.eigenfunctions = false;
    const double match = 10.0 * lambda_tol;
    const LinearOperator dbl = extend_to_double(op);
    const LinearOperator quad = extend_to_quadruple(op);
    const LinearOperator chk = reflect(op);

    SpectrumUnionReport report;
    auto spectrum = [&](const LinearOperator& o, BCKind k) {
        Spectrum s = find_eigenvalues(o, k, lo, hi, opt);
        for (auto& w : s.warnings) report.warnings.push_back(std::string(to_string(k)) + ": " + w);
        return s.values();
    };
    const auto n = spectrum(op, BCKind::Neumann);
    const auto d = spectrum(op, BCKind::Dirichlet);
    const auto m1 = spectrum(op, BCKind::Mixed1);
    const auto m2 = spectrum(op, BCKind::Mixed2);
    const auto p2 = spectrum(dbl, BCKind::Periodic);
    const auto a2 = spectrum(dbl, BCKind::Antiperiodic);
    const auto n2 = spectrum(dbl, BCKind::Neumann);
    const auto d2 = spectrum(dbl, BCKind::Dirichlet);
    const auto p4 = spectrum(quad, BCKind::Periodic);
    const auto m1c = spectrum(chk, BCKind::Mixed1);
    const auto m2c = spectrum(chk, BCKind::Mixed2);

    using detail::compare_sets;
    using detail::merge_sets;
    auto& ids = report.identities;
    ids.push_back(compare_sets("N[T] u D[T] = P[2T]", merge_sets({n, d}, match), p2, match));
    ids.push_back(compare_sets("N[T] u M1[T] = N[2T]", merge_sets({n, m1}, match), n2, match));
    ids.push_back(compare_sets("D[T] u M2[T] = D[2T]", merge_sets({d, m2}, match), d2, match));
    ids.push_back(compare_sets("M1[T] u M2[T] = A[2T]", merge_sets({m1, m2}, match), a2, match));
    ids.push_back(compare_sets("N[T] u D[T] u M1[T] u M2[T] = P[4T]", merge_sets({n, d, m1, m2}, match), p4, match));
    ids.push_back(compare_sets("M1[T] = reflected M2[T]", m1, m2c, match));
    ids.push_back(compare_sets("M2[T] = reflected M1[T]", m2, m1c, match));
    auto mixed = compare_sets("M1[T] = M2[T] (reflection-invariant coefficients)", m1, m2, match);
    mixed.applicable = detail::reflection_invariant(op, 0.5 * (lo + hi));
    ids.push_back(std::move(mixed));
    return report;
}

struct FirstEigenvalueReport {
    struct Relation {
        std::string name;
        bool applicable = true;
        bool pass = false;
        std::string detail;
    };
    std::optional<double> n, d, m1, m2, p2, a2, n2, d2, p4;
    std::vector<Relation> equalities;
    std::vector<Relation> orderings; // reported only
    std::vector<std::string> warnings;

    bool pass() const {
        return std::all_of(equalities.begin(), equalities.end(),
                           [](const Relation& r) { return !r.applicable || r.pass; });
    }
};

/// Principal-eigenvalue equalities between the nine problems. Orderings are recorded, not asserted.
inline FirstEigenvalueReport verify_first_eigenvalue_relations(const LinearOperator& op, double lo, double hi,
                                                               double tol = 1e-5, SpectrumOptions opt = {}) {
    const LinearOperator dbl = extend_to_double(op);
    const LinearOperator quad = extend_to_quadruple(op);
    FirstEigenvalueReport rep;
    auto principal = [&](const LinearOperator& o, BCKind k, const char* label) -> std::optional<double> {
        try {
            return principal_eigenvalue(o, k, lo, hi, opt, &rep.warnings);
        } catch (const Error& e) {
            rep.warnings.push_back(std::string(label) + ": " + e.what());
            return std::nullopt;
        }
    };
    rep.n = principal(op, BCKind::Neumann, "N[T]");
    rep.d = principal(op, BCKind::Dirichlet, "D[T]");
    rep.m1 = principal(op, BCKind::Mixed1, "M1[T]");
    rep.m2 = principal(op, BCKind::Mixed2, "M2[T]");
    rep.p2 = principal(dbl, BCKind::Periodic, "P[2T]");
    rep.a2 = principal(dbl, BCKind::Antiperiodic, "A[2T]");
    rep.n2 = principal(dbl, BCKind::Neumann, "N[2T]");
    rep.d2 = principal(dbl, BCKind::Dirichlet, "D[2T]");
    rep.p4 = principal(quad, BCKind::Periodic, "P[4T]");

    auto fmt = [](const std::optional<double>& v) { return v ? std::to_string(*v) : std::string("n/a"); };
    auto equal = [&](const char* name, const std::optional<double>& x, const std::optional<double>& y) {
        FirstEigenvalueReport::Relation r{name, x && y, false, fmt(x) + " vs " + fmt(y)};
        if (r.applicable) r.pass = std::fabs(*x - *y) <= tol;
        else throw NumericalError(std::string("missing principal eigenvalue for ") + name);
        rep.equalities.push_back(r);
    };
    equal("lambda0 N[T] = P[2T]", rep.n, rep.p2);
    equal("lambda0 N[T] = N[2T]", rep.n, rep.n2);
    equal("lambda0 N[T] = P[4T]", rep.n, rep.p4);
    equal("lambda0 M2[T] = D[2T]", rep.m2, rep.d2);
    {
        FirstEigenvalueReport::Relation r{"lambda0 A[2T] in {M1[T], M2[T]}", rep.a2 && (rep.m1 || rep.m2), false,
                                          fmt(rep.a2) + " vs {" + fmt(rep.m1) + ", " + fmt(rep.m2) + "}"};
        if (r.applicable)
            r.pass = (rep.m1 && std::fabs(*rep.a2 - *rep.m1) <= tol) || (rep.m2 && std::fabs(*rep.a2 - *rep.m2) <= tol);
        rep.equalities.push_back(r);
    }
    auto order = [&](const char* name, const std::optional<double>& x, const std::optional<double>& y) {
        FirstEigenvalueReport::Relation r{name, x && y, true, ""};
        if (r.applicable) r.detail = *x < *y - tol ? "<" : (*x > *y + tol ? ">" : "=");
        else r.detail = "n/a";
        r.detail = fmt(x) + " " + r.detail + " " + fmt(y);
        rep.orderings.push_back(r);
    };
    order("lambda0 N[T] vs D[T]", rep.n, rep.d);
    order("lambda0 N[T] vs M1[T]", rep.n, rep.m1);
    order("lambda0 N[T] vs M2[T]", rep.n, rep.m2);
    order("lambda0 M2[T] vs D[T]", rep.m2, rep.d);
    return rep;
}

} // namespace greenkit
