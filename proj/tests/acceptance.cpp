// Acceptance runner: one PASS/FAIL line per criterion, exit status 0 iff all pass.
#include <greenkit/comparison.hpp>
#include <greenkit/identities.hpp>
#include <greenkit/signscan.hpp>
#include <greenkit/spectrum.hpp>

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>

using namespace greenkit;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

LinearOperator quartic_well() { return LinearOperator::from_strings(2, 2.0, {"(t-2)^4", "0", "0", "0"}); }
LinearOperator parabola() { return LinearOperator::from_strings(2, 1.5, {"t*(t-3)", "0", "0", "0"}); }
LinearOperator beam(double T) { return LinearOperator::from_strings(2, T, {"0", "0", "0", "0"}); }
LinearOperator string_op(double T) { return LinearOperator::from_strings(1, T, {"0", "0"}); }

const std::map<std::string, LinearOperator>& named() {
    static const std::map<std::string, LinearOperator> ops{{"quartic_well", quartic_well()},
                                                           {"parabola", parabola()},
                                                           {"beam_1_5", beam(1.5)},
                                                           {"beam_1", beam(1.0)}};
    return ops;
}

GreensEvaluator kernel(const LinearOperator& op, BCKind kind, double lam) {
    return GreensEvaluator(ProblemSpec{op, kind, lam});
}

struct Outcome {
    bool pass;
    std::string detail;
};

// 1
Outcome closed_forms() {
    const auto t0 = Clock::now();
    const auto s = string_op(1.0);
    double e2 = 0.0;
    e2 = std::max(e2, oracle::sup_error(kernel(s, BCKind::Dirichlet, 0.0), oracle::string_dirichlet, 21));
    e2 = std::max(e2, oracle::sup_error(kernel(s, BCKind::Dirichlet, -1.0), oracle::cosh_dirichlet, 21));
    e2 = std::max(e2, oracle::sup_error(kernel(s, BCKind::Neumann, -1.0), oracle::cosh_neumann, 21));
    e2 = std::max(e2, oracle::sup_error(kernel(string_op(2.0), BCKind::Periodic, -1.0), oracle::cosh_periodic(2.0), 21));
    const double e4 = oracle::sup_error(kernel(beam(1.0), BCKind::Dirichlet, 0.0), oracle::beam_dirichlet, 21);
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << "second order " << e2 << " (<= 1e-8), beam " << e4 << " (<= 1e-7), " << secs << " s (< 5)";
    return {e2 <= 1e-8 && e4 <= 1e-7 && secs < 5.0, d.str()};
}

// 2
Outcome analytic_eigenvalues() {
    const double pi = oracle::pi, p4 = std::pow(pi, 4);
    struct Case {
        LinearOperator op;
        BCKind kind;
        double lo, hi, exact;
    };
    const Case cases[] = {{string_op(1.0), BCKind::Dirichlet, 0.0, 20.0, pi * pi},
                          {beam(1.0), BCKind::Dirichlet, -200.0, -1e-3, -p4},
                          {beam(1.0), BCKind::Mixed2, -10.0, -1e-3, -p4 / 16}};
    double worst = 0.0;
    for (const auto& c : cases) {
        const auto s = find_eigenvalues(c.op, c.kind, c.lo, c.hi);
        double best = INFINITY;
        for (double v : s.values()) best = std::min(best, std::fabs(v - c.exact) / std::fabs(c.exact));
        worst = std::max(worst, best);
    }
    std::ostringstream d;
    d << "worst relative error " << worst << " (<= 1e-6)";
    return {worst <= 1e-6, d.str()};
}

// 3
Outcome symmetry() {
    double worst = 0.0;
    int checked = 0, skipped = 0;
    for (const auto& op : {quartic_well(), parabola()})
        for (double lam : {-2.0, 0.5, 2.0})
            for (BCKind k : {BCKind::Periodic, BCKind::Neumann, BCKind::Dirichlet, BCKind::Antiperiodic}) {
                const ProblemSpec spec{extend_to_double(op), k, lam};
                if (std::fabs(char_det(spec)) < identity_skip_det) {
                    ++skipped;
                    continue;
                }
                worst = std::max(worst, check_symmetry(GreensEvaluator(spec), 41, 1e-7).residual);
                ++checked;
            }
    std::ostringstream d;
    d << checked << " kernels, " << skipped << " resonant skipped, worst residual " << worst << " (<= 1e-7)";
    return {checked > 0 && worst <= 1e-7, d.str()};
}

// 4
Outcome decompositions() {
    const auto t0 = Clock::now();
    std::vector<std::string> tags;
    for (const auto& r : decomposition_rules()) tags.emplace_back(r.tag);
    for (const auto& r : connecting_rules()) tags.emplace_back(r.tag);
    double worst = 0.0;
    int checked = 0;
    bool ok = tags.size() == 17;
    std::string failed;
    for (const auto& op : {quartic_well(), parabola()})
        for (double lam : {-2.0, 0.5, 2.0}) {
            KernelCache cache(op, lam);
            for (const auto& tag : tags) {
                const auto r = run_identity(tag, cache, 41, 1e-6);
                if (!r.pass) {
                    ok = false;
                    failed += " " + tag;
                }
                worst = std::max(worst, r.residual);
                ++checked;
            }
        }
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << checked << " checks (17 tags x 2 operators x 3 lambdas), worst residual " << worst << " (<= 1e-6), " << secs
      << " s (< 120)" << (failed.empty() ? "" : "; failed:" + failed);
    return {ok && secs < 120.0, d.str()};
}

// 5
Outcome spectral_unions() {
    const auto r = verify_spectrum_unions(beam(1.0), -110.0, 1.0, 1e-6); // matching at 10 * lambda_tol = 1e-5
    int applicable = 0;
    for (const auto& id : r.identities) applicable += id.applicable ? 1 : 0;
    std::ostringstream d;
    d << applicable << "/" << r.identities.size() << " set identities applicable, all "
      << (r.pass() ? "hold" : "do not hold");
    return {r.pass() && applicable >= 6, d.str()};
}

// 6
Outcome first_eigenvalues() {
    bool ok = true;
    std::ostringstream d;
    for (const auto& [name, op] : {std::pair{"quartic well", quartic_well()}, std::pair{"parabola", parabola()}}) {
        const auto r = verify_first_eigenvalue_relations(op, -60.0, 10.0, 1e-5);
        ok = ok && r.pass() && r.n && r.m2;
        d << name << ": N=P2=N2=P4=" << (r.n ? *r.n : NAN) << ", M2=D2=" << (r.m2 ? *r.m2 : NAN) << "; ";
    }
    d << "orderings reported only";
    return {ok, d.str()};
}

// 7
Outcome thresholds() {
    struct Row {
        const char* label;
        const char* op;
        Extension ext;
        BCKind kind;
        SignSide side;
        double lo, hi, expect;
    };
    const Row rows[] = {
        {"lambda1", "quartic_well", Extension::None, BCKind::Neumann, SignSide::NonpositiveBelow, -12, 8, -2.26},
        {"lambda1", "quartic_well", Extension::Double, BCKind::Periodic, SignSide::NonpositiveBelow, -12, 8, -2.26},
        {"lambda2", "quartic_well", Extension::Double, BCKind::Periodic, SignSide::NonnegativeAbove, -12, 8, 4.11},
        {"lambda3", "quartic_well", Extension::None, BCKind::Neumann, SignSide::NonnegativeAbove, -12, 8, 5.95},
        {"lambda4", "beam_1_5", Extension::None, BCKind::Neumann, SignSide::NonpositiveBelow, -20, 40, -6.1798},
        {"lambda5", "beam_1_5", Extension::None, BCKind::Neumann, SignSide::NonnegativeAbove, -20, 40, 24.7192},
        {"lambda6", "beam_1_5", Extension::Double, BCKind::Neumann, SignSide::NonpositiveBelow, -5, 5, -0.3862},
        {"lambda7", "beam_1_5", Extension::Double, BCKind::Neumann, SignSide::NonnegativeAbove, -5, 5, 1.5449},
        {"lambda8", "beam_1", Extension::None, BCKind::Mixed2, SignSide::NonpositiveBelow, -60, 440, -31.2852},
        {"lambda9", "beam_1", Extension::None, BCKind::Mixed2, SignSide::NonnegativeAbove, -60, 440, 389.6365},
        {"lambda10", "beam_1", Extension::Double, BCKind::Dirichlet, SignSide::NonpositiveBelow, -40, 80, -14.8576},
        {"lambda11", "beam_1", Extension::Double, BCKind::Dirichlet, SignSide::NonnegativeAbove, -40, 80, 59.4303},
    };
    bool ok = true;
    double worst_rel = 0.0, worst_secs = 0.0;
    std::string failed;
    for (const auto& r : rows) {
        const auto t0 = Clock::now();
        const auto res = sign_interval(apply_extension(named().at(r.op), r.ext), r.kind, r.side, r.lo, r.hi, 1e-4);
        const double secs = seconds_since(t0);
        const double rel = std::fabs(res.threshold - r.expect) / std::fabs(r.expect);
        worst_rel = std::max(worst_rel, rel);
        worst_secs = std::max(worst_secs, secs);
        if (res.status != EndpointStatus::ThresholdFound || rel > 1e-2 || secs > 60.0) {
            ok = false;
            failed += std::string(" ") + r.label;
        }
    }
    // lambda0 of the quartic well
    const double l0 = principal_eigenvalue(quartic_well(), BCKind::Neumann, -12.0, 8.0);
    const double rel0 = std::fabs(l0 + 1.746) / 1.746;
    worst_rel = std::max(worst_rel, rel0);
    if (rel0 > 1e-2) {
        ok = false;
        failed += " lambda0";
    }
    std::ostringstream d;
    d << std::size(rows) << " threshold searches + lambda0, worst relative error " << worst_rel
      << " (<= 1e-2), slowest " << worst_secs << " s (<= 60)" << (failed.empty() ? "" : "; failed:" + failed);
    return {ok, d.str()};
}

// 8
Outcome classifications() {
    struct Row {
        const char* scenario;
        const char* op;
        Extension ext;
        BCKind kind;
        double lambda;
        SignClass expect;
    };
    const Row rows[] = {
        {"parabola, lambda=-1.5", "parabola", Extension::Double, BCKind::Periodic, -1.5, SignClass::Nonpositive},
        {"parabola, lambda=-1.5", "parabola", Extension::Double, BCKind::Dirichlet, -1.5, SignClass::SignChanging},
        {"parabola, lambda=15", "parabola", Extension::Double, BCKind::Periodic, 15, SignClass::Nonnegative},
        {"parabola, lambda=15", "parabola", Extension::Double, BCKind::Dirichlet, 15, SignClass::SignChanging},
        {"quartic well, lambda=-2", "quartic_well", Extension::Double, BCKind::Periodic, -2, SignClass::Nonpositive},
        {"quartic well, lambda=-2", "quartic_well", Extension::None, BCKind::Neumann, -2, SignClass::Nonpositive},
        {"quartic well, lambda=-2", "quartic_well", Extension::None, BCKind::Dirichlet, -2, SignClass::Nonnegative},
        {"quartic well, lambda=-2", "quartic_well", Extension::None, BCKind::Mixed1, -2, SignClass::Nonnegative},
        {"quartic well, lambda=2", "quartic_well", Extension::Double, BCKind::Periodic, 2, SignClass::Nonnegative},
        {"quartic well, lambda=2", "quartic_well", Extension::None, BCKind::Neumann, 2, SignClass::Nonnegative},
        {"quartic well, lambda=2", "quartic_well", Extension::None, BCKind::Dirichlet, 2, SignClass::Nonnegative},
        {"quartic well, lambda=2", "quartic_well", Extension::None, BCKind::Mixed1, 2, SignClass::Nonnegative},
        {"quartic well, lambda=2", "quartic_well", Extension::None, BCKind::Mixed2, 2, SignClass::Nonnegative},
        {"parabola, lambda=1.5", "parabola", Extension::Double, BCKind::Periodic, 1.5, SignClass::Nonpositive},
        {"parabola, lambda=1.5", "parabola", Extension::None, BCKind::Neumann, 1.5, SignClass::Nonpositive},
        {"parabola, lambda=1.5", "parabola", Extension::None, BCKind::Mixed2, 1.5, SignClass::Nonnegative},
        {"quartic well, lambda=-6", "quartic_well", Extension::None, BCKind::Mixed1, -6, SignClass::Nonpositive},
        {"quartic well, lambda=-6", "quartic_well", Extension::None, BCKind::Dirichlet, -6, SignClass::Nonnegative},
        {"quartic well, lambda=-2 (M2)", "quartic_well", Extension::None, BCKind::Mixed2, -2, SignClass::Nonpositive},
        {"quartic well, lambda=-2 (M2)", "quartic_well", Extension::None, BCKind::Dirichlet, -2, SignClass::Nonnegative},
    };
    int matched = 0;
    std::string failed;
    for (const auto& r : rows) {
        const auto rep = classify_at(apply_extension(named().at(r.op), r.ext), r.kind, r.lambda);
        if (rep && rep->classification == r.expect) ++matched;
        else failed += std::string(" [") + r.scenario + " " + std::string(to_string(r.kind)) + "]";
    }
    std::ostringstream d;
    d << matched << "/" << std::size(rows) << " classifications match" << failed;
    return {matched == static_cast<int>(std::size(rows)), d.str()};
}

// 9
Outcome comparisons() {
    struct Setting {
        ComparisonTheorem th;
        LinearOperator op;
        double lam_nonneg, lam_nonpos;
    };
    const Setting settings[] = {{ComparisonTheorem::ND, quartic_well(), 2.0, -2.0},
                                {ComparisonTheorem::NM1, beam(1.5), 1.0, -0.2},
                                {ComparisonTheorem::M2D, beam(1.0), 10.0, -10.0}};
    const std::pair<const char*, const char*> pairs[3][3] = {
        {{"2", "sin(3*t)"}, {"1+t", "t"}, {"exp(t)", "cos(5*t)"}},
        {{"1", "t/2"}, {"2", "1"}, {"1+t^2", "t^2"}},
        {{"-1", "-t/2"}, {"-2", "-1"}, {"-1-t^2", "-t^2"}}};
    int passed = 0, total = 0;
    double worst = INFINITY;
    std::string failed;
    for (const auto& st : settings) {
        for (double lam : {st.lam_nonneg, st.lam_nonpos}) {
            const auto dom = check_kernel_domination(st.th, st.op, lam);
            ++total;
            if (dom.applicable && dom.pass) ++passed;
            else failed += " " + std::string(to_string(st.th)) + "-kernel@" + std::to_string(lam);
        }
        for (int c = 1; c <= 3; ++c)
            for (const auto& [s1, s2] : pairs[c - 1]) {
                const double lam = c == 1 ? st.lam_nonneg : st.lam_nonpos;
                const auto r = check_solution_comparison(st.th, c, st.op, lam, parse_expression(s1), parse_expression(s2));
                ++total;
                for (const auto& chk : r.checks) worst = std::min(worst, chk.worst_slack / std::max(r.scale, 1e-300));
                if (r.applicable && r.pass) ++passed;
                else failed += " " + std::string(to_string(st.th)) + ":" + std::to_string(c);
            }
    }
    std::ostringstream d;
    d << passed << "/" << total << " (27 solution cases + 6 kernel dominations), worst relative slack " << worst
      << " (>= -1e-9)" << failed;
    return {passed == total, d.str()};
}

// 10
Outcome slope_one() {
    const double c1 = check_slope_constancy(kernel(beam(3.0), BCKind::Periodic, 1.0)).residual;
    const double c2 = check_slope_constancy(kernel(string_op(2.0), BCKind::Periodic, -1.0)).residual;
    const double neg = check_slope_constancy(kernel(extend_to_double(parabola()), BCKind::Periodic, 1.0)).residual;
    std::ostringstream d;
    d << "constant coefficients " << std::max(c1, c2) << " (<= 1e-7), variable-coefficient control " << neg
      << " (> 1e-2)";
    return {std::max(c1, c2) <= 1e-7 && neg > 1e-2, d.str()};
}

} // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"closed-form kernels", closed_forms},
        {"analytic eigenvalues", analytic_eigenvalues},
        {"doubled-interval symmetry", symmetry},
        {"decomposition and connecting identities", decompositions},
        {"spectral unions", spectral_unions},
        {"first-eigenvalue equalities", first_eigenvalues},
        {"sign thresholds", thresholds},
        {"sign classifications", classifications},
        {"comparison principles", comparisons},
        {"slope-one constancy", slope_one},
    };
    int failures = 0;
    int index = 0;
    for (const auto& [name, fn] : criteria) {
        ++index;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
