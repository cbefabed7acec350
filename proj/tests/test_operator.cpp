#include <greenkit/linear_operator.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace greenkit;

namespace {

LinearOperator quartic_well() { return LinearOperator::from_strings(2, 2.0, {"(t-2)^4", "0", "0", "0"}); }

void expect_same(const LinearOperator& a, const LinearOperator& b, double lam = 0.3) {
    ASSERT_EQ(a.order(), b.order());
    ASSERT_DOUBLE_EQ(a.length(), b.length());
    for (int k = 0; k < a.order(); ++k)
        for (int i = 0; i <= 40; ++i) {
            const double t = a.length() * i / 40.0;
            EXPECT_NEAR(a.coefficient(k, t, lam), b.coefficient(k, t, lam), 1e-13) << "k=" << k << " t=" << t;
        }
}

LinearOperator random_operator(std::mt19937& rng) {
    std::uniform_real_distribution<double> c(-2.0, 2.0);
    auto poly = [&] {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.6f + %.6f*t + %.6f*t^2", c(rng), c(rng), c(rng));
        return std::string(buf);
    };
    return LinearOperator::from_strings(2, 1.0 + (rng() % 3), {poly(), poly(), poly(), poly()});
}

} // namespace

TEST(Operator, ShiftLambda) {
    const auto op = quartic_well();
    expect_same(shift_lambda(op, 0.0), op);
    EXPECT_DOUBLE_EQ(shift_lambda(op, -2.0).coefficient(0, 0.5, 0.0), std::pow(0.5 - 2.0, 4) - 2.0);
    expect_same(shift_lambda(shift_lambda(op, 3.0), -3.0), op);
}

TEST(Operator, LambdaIdentifierFollowsShift) {
    const auto op = LinearOperator::from_strings(1, 1.0, {"lambda*t", "0"});
    // a_0 = lambda*t + lambda
    EXPECT_DOUBLE_EQ(op.coefficient(0, 0.5, 2.0), 3.0);
    EXPECT_DOUBLE_EQ(shift_lambda(op, 1.0).coefficient(0, 0.5, 1.0), 3.0);
}

TEST(Operator, DoubleExtension) {
    const auto ext = extend_to_double(quartic_well());
    EXPECT_DOUBLE_EQ(ext.length(), 4.0);
    for (double t : {0.0, 0.7, 2.0, 3.1, 4.0}) EXPECT_NEAR(ext.coefficient(0, t, 0.0), std::pow(t - 2.0, 4), 1e-12);

    const auto c = LinearOperator::from_strings(1, 1.0, {"0", "2.5"});
    const auto ce = extend_to_double(c);
    EXPECT_DOUBLE_EQ(ce.coefficient(1, 0.5, 0.0), 2.5);
    EXPECT_DOUBLE_EQ(ce.coefficient(1, 1.5, 0.0), -2.5);

    const auto p = extend_to_double(LinearOperator::from_strings(2, 1.5, {"t*(t-3)", "0", "0", "0"}));
    for (double t : {0.0, 1.0, 2.2, 3.0}) EXPECT_NEAR(p.coefficient(0, t, 0.0), t * (t - 3.0), 1e-12);
}

TEST(Operator, QuadrupleExtension) {
    const auto q = extend_to_quadruple(quartic_well());
    EXPECT_DOUBLE_EQ(q.length(), 8.0);
    EXPECT_NEAR(q.coefficient(0, 5.0, 0.0), 1.0, 1e-12);
    EXPECT_NEAR(q.coefficient(0, 4.0, 0.0), 16.0, 1e-12);
    for (double t : {0.3, 1.7, 2.9}) EXPECT_NEAR(q.coefficient(0, t, 0.0), q.coefficient(0, 8.0 - t, 0.0), 1e-12);

    const auto c = extend_to_quadruple(LinearOperator::from_strings(1, 1.0, {"0", "1"}));
    EXPECT_DOUBLE_EQ(c.coefficient(1, 0.5, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(c.coefficient(1, 1.5, 0.0), -1.0);
    EXPECT_DOUBLE_EQ(c.coefficient(1, 2.5, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(c.coefficient(1, 3.5, 0.0), -1.0);
}

TEST(Operator, Reflect) {
    const auto c = LinearOperator::from_strings(1, 1.0, {"3", "1"});
    EXPECT_DOUBLE_EQ(reflect(c).coefficient(0, 0.2, 0.0), 3.0);
    EXPECT_DOUBLE_EQ(reflect(c).coefficient(1, 0.2, 0.0), -1.0);
    const auto lin = LinearOperator::from_strings(1, 1.0, {"t", "0"});
    EXPECT_NEAR(reflect(lin).coefficient(0, 0.25, 0.0), 0.75, 1e-15);
}

TEST(Operator, CoefficientValues) {
    const auto ext = extend_to_double(quartic_well());
    EXPECT_DOUBLE_EQ(coeff_value(ext, 0, 4.0, 0.0), 16.0);
    EXPECT_DOUBLE_EQ(coeff_value(quartic_well(), 0, 2.0, 5.0), 5.0);
    EXPECT_THROW(coeff_value(ext, 4, 1.0, 0.0), DomainError);
    EXPECT_THROW(coeff_value(ext, 0, 4.5, 0.0), DomainError);
}

TEST(Operator, RejectsBadShapes) {
    EXPECT_THROW(LinearOperator::from_strings(0, 1.0, {}), ConfigError);
    EXPECT_THROW(LinearOperator::from_strings(1, -1.0, {"0", "0"}), ConfigError);
    EXPECT_THROW(LinearOperator::from_strings(2, 1.0, {"0", "0"}), ConfigError);
}

TEST(OperatorProperty, Extensions) {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const auto op = random_operator(rng);
        const auto ext = extend_to_double(op);
        const double T = op.length();
        for (int i = 0; i < 40; ++i) { // t = T sits on the odd-coefficient jump
            const double t = T * i / 40.0;
            for (int k = 0; k < 4; ++k) {
                EXPECT_EQ(ext.coefficient(k, t, 0.1), op.coefficient(k, t, 0.1));
                const double mirrored = ext.coefficient(k, 2.0 * T - t, 0.1);
                const double sign = k % 2 == 0 ? 1.0 : -1.0;
                // the lambda offset only enters a_0, which is even
                EXPECT_NEAR(ext.coefficient(k, t, 0.1), sign * mirrored, 1e-12);
            }
        }
        expect_same(reflect(reflect(op)), op);
        expect_same(extend_to_double(shift_lambda(op, 1.7)), shift_lambda(ext, 1.7));
        expect_same(reflect(shift_lambda(op, -0.4)), shift_lambda(reflect(op), -0.4));
    }
}
