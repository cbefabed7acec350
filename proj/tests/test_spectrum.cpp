#include <greenkit/spectrum.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace greenkit;
using oracle::pi;

namespace {

LinearOperator string_op() { return LinearOperator::from_strings(1, 1.0, {"0", "0"}); }
LinearOperator beam(double T) { return LinearOperator::from_strings(2, T, {"0", "0", "0", "0"}); }

} // namespace

TEST(Spectrum, StringDirichlet) {
    const auto s = find_eigenvalues(string_op(), BCKind::Dirichlet, 0.0, 50.0);
    ASSERT_EQ(s.eigenvalues.size(), 2U);
    EXPECT_NEAR(s.eigenvalues[0].lambda, pi * pi, 1e-6 * pi * pi);
    EXPECT_NEAR(s.eigenvalues[1].lambda, 4 * pi * pi, 1e-6 * 4 * pi * pi);
    EXPECT_EQ(s.eigenvalues[0].sign_changes, 0);
    EXPECT_EQ(s.eigenvalues[1].sign_changes, 1);
    for (const auto& e : s.eigenvalues) {
        EXPECT_LE(e.bracket_width, 1e-6);
        EXPECT_LE(std::fabs(e.det), 1e-8);
    }
}

TEST(Spectrum, BeamDirichletAndMixed) {
    const double p4 = std::pow(pi, 4);
    const auto d = find_eigenvalues(beam(1.0), BCKind::Dirichlet, -200.0, -1e-3);
    ASSERT_EQ(d.eigenvalues.size(), 1U);
    EXPECT_NEAR(d.eigenvalues[0].lambda, -p4, 1e-6 * p4);
    const auto m = find_eigenvalues(beam(1.0), BCKind::Mixed2, -10.0, -1e-3);
    ASSERT_EQ(m.eigenvalues.size(), 1U);
    EXPECT_NEAR(m.eigenvalues[0].lambda, -p4 / 16, 1e-6 * p4 / 16);
}

TEST(Spectrum, Eigenfunctions) {
    const auto e = eigenfunction_at(string_op(), BCKind::Dirichlet, pi * pi);
    EXPECT_EQ(e.sign_changes, 0);
    EXPECT_EQ(e.t.size(), 401U);
    for (std::size_t i = 0; i < e.t.size(); i += 50) EXPECT_NEAR(std::fabs(e.u[i]), std::sin(pi * e.t[i]), 1e-6);
    EXPECT_EQ(eigenfunction_at(string_op(), BCKind::Dirichlet, 4 * pi * pi).sign_changes, 1);
    const auto c = eigenfunction_at(beam(1.0), BCKind::Neumann, 0.0);
    EXPECT_EQ(c.sign_changes, 0);
    EXPECT_NEAR(*std::min_element(c.u.begin(), c.u.end()) * *std::max_element(c.u.begin(), c.u.end()), 1.0, 1e-8);
}

TEST(Spectrum, EigenfunctionResidual) {
    // u'' + (t + lambda) u: residual by central differences.
    const auto op = LinearOperator::from_strings(1, 1.0, {"t", "0"});
    const auto s = find_eigenvalues(op, BCKind::Dirichlet, 0.0, 20.0);
    ASSERT_FALSE(s.eigenvalues.empty());
    const double lam = s.eigenvalues[0].lambda;
    const auto e = eigenfunction_at(op, BCKind::Dirichlet, lam, 1e-10, 401);
    const double h = e.t[1];
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < e.t.size(); ++i) {
        const double upp = (e.u[i + 1] - 2 * e.u[i] + e.u[i - 1]) / (h * h);
        worst = std::max(worst, std::fabs(upp + (e.t[i] + lam) * e.u[i]));
    }
    EXPECT_LE(worst, 1e-3); // second-order differences on h = 1/400
}

TEST(Spectrum, Principal) {
    EXPECT_NEAR(principal_eigenvalue(beam(1.5), BCKind::Neumann, -10.0, 5.0), 0.0, 1e-8);
    EXPECT_NEAR(principal_eigenvalue(beam(1.0), BCKind::Mixed2, -10.0, 0.0), -std::pow(pi, 4) / 16, 1e-5);
    EXPECT_NEAR(principal_eigenvalue(beam(1.0), BCKind::Dirichlet, -200.0, 0.0), -std::pow(pi, 4), 1e-4);
    EXPECT_THROW(principal_eigenvalue(beam(1.0), BCKind::Dirichlet, -50.0, 0.0), NumericalError);
}

TEST(Spectrum, BadWindow) { EXPECT_THROW(find_eigenvalues(beam(1.0), BCKind::Neumann, 1.0, -1.0), ConfigError); }

TEST(Spectrum, Unions) {
    const auto r = verify_spectrum_unions(beam(1.0), -110.0, 1.0, 1e-6);
    EXPECT_TRUE(r.pass());
    EXPECT_GE(r.identities.size(), 5U);
    for (const auto& id : r.identities) EXPECT_TRUE(!id.applicable || id.pass) << id.name;
}

TEST(Spectrum, FirstEigenvalueEqualities) {
    const auto r = verify_first_eigenvalue_relations(LinearOperator::from_strings(2, 2.0, {"(t-2)^4", "0", "0", "0"}),
                                                     -12.0, 8.0, 1e-5);
    EXPECT_TRUE(r.pass());
    ASSERT_TRUE(r.n && r.p2);
    EXPECT_NEAR(*r.n, -1.746, 1e-2);
    EXPECT_NEAR(*r.n, *r.p2, 1e-5);
}

TEST(SpectrumProperty, FinerScanKeepsEigenvalues) {
    const auto op = LinearOperator::from_strings(2, 1.5, {"t*(t-3)", "0", "0", "0"});
    SpectrumOptions coarse, fine;
    fine.scan_step = 40.0 / 1600;
    const auto a = find_eigenvalues(op, BCKind::Neumann, -30.0, 10.0, coarse).values();
    const auto b = find_eigenvalues(op, BCKind::Neumann, -30.0, 10.0, fine).values();
    for (double x : a)
        EXPECT_TRUE(std::any_of(b.begin(), b.end(), [&](double y) { return std::fabs(x - y) < 1e-5; })) << x;
}
