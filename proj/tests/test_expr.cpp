#include "whitney/expr.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace whitney;

TEST(Decimal, ExactValues) {
    EXPECT_EQ(parse_decimal("0.1"), rational(1, 10));
    EXPECT_EQ(parse_decimal("-12.5e-3"), rational(-1, 80));
    EXPECT_EQ(parse_decimal("3/6"), rational(1, 2));
    EXPECT_EQ(parse_decimal("2E2"), rational(200));
    EXPECT_THROW(parse_decimal("1.2.3"), std::invalid_argument);
    EXPECT_THROW(parse_decimal("abc"), std::invalid_argument);
    EXPECT_THROW(parse_decimal("1/0"), std::invalid_argument);
}

TEST(Expression, ValuesMatchClosedForms) {
    const auto e = Expression::parse("x^2*y - 3*x/(1 + y^2) + 0.5");
    for (double x : {-0.7, 0.2, 1.3})
        for (double y : {-1.0, 0.0, 0.4}) EXPECT_NEAR(e.value({x, y}), x * x * y - 3 * x / (1 + y * y) + 0.5, 1e-13);
    const auto g = Expression::parse("x1^3 - (1 + x3^2)*x2^3", ExprScope{3, {}});
    EXPECT_NEAR(g.value({0.5, -0.2, 2.0}), 0.125 + 5 * 0.008, 1e-14);
}

TEST(Expression, PrecedenceAndUnaryMinus) {
    EXPECT_DOUBLE_EQ(Expression::parse("-x^2").value({3, 0}), -9.0);
    EXPECT_DOUBLE_EQ(Expression::parse("2 - 3 - 4").value({0, 0}), -5.0);
    EXPECT_DOUBLE_EQ(Expression::parse("8 / 4 / 2").value({0, 0}), 1.0);
    EXPECT_DOUBLE_EQ(Expression::parse("x^-1").value({4, 0}), 0.25);
}

TEST(Expression, TaylorCoefficientsMatchDerivatives) {
    // f = x^2 y + sin-free rational mix; compare every coefficient with a hand-computed derivative
    const auto e = Expression::parse("x^2*y + y^3 / x");
    const double x = 0.8, y = -0.5;
    const auto J = e.jet_at({x, y}, 3);
    EXPECT_NEAR(J.coeff({0, 0}), x * x * y + y * y * y / x, 1e-13);
    EXPECT_NEAR(J.derivative_at_base({1, 0}), 2 * x * y - y * y * y / (x * x), 1e-12);
    EXPECT_NEAR(J.derivative_at_base({0, 1}), x * x + 3 * y * y / x, 1e-12);
    EXPECT_NEAR(J.derivative_at_base({1, 1}), 2 * x - 3 * y * y / (x * x), 1e-12);
    EXPECT_NEAR(J.derivative_at_base({0, 2}), 6 * y / x, 1e-12);
    EXPECT_NEAR(J.derivative_at_base({2, 1}), 2 + 6 * y * y / (x * x * x), 1e-11);
    EXPECT_NEAR(J.derivative_at_base({0, 3}), 6 / x, 1e-11);
    EXPECT_NEAR(J.derivative_at_base({3, 0}), -6 * y * y * y / std::pow(x, 4), 1e-11);
}

TEST(Expression, FractionalPowersAndCurves) {
    const Puiseux half = Puiseux::monomial(rational(1, 2), 1);
    const Puiseux cusp = Puiseux::monomial(rational(1), 3, 2);
    const ExprScope scope{2, {Puiseux(), half, cusp}};
    const auto e = Expression::parse("(y - psi1)^(3/2) + psi2", scope);
    const double x = 0.36, y = 0.3;
    EXPECT_NEAR(e.value({x, y}), std::pow(y - 0.5 * x, 1.5) + std::pow(x, 1.5), 1e-13);
    const auto J = e.jet_at({x, y}, 2);
    EXPECT_NEAR(J.derivative_at_base({0, 1}), 1.5 * std::sqrt(y - 0.5 * x), 1e-12);
    EXPECT_NEAR(J.derivative_at_base({1, 0}), -0.75 * std::sqrt(y - 0.5 * x) + 1.5 * std::sqrt(x), 1e-12);
    EXPECT_NEAR(J.derivative_at_base({2, 0}), 0.1875 / std::sqrt(y - 0.5 * x) + 0.75 / std::sqrt(x), 1e-11);
}

TEST(Expression, ErrorsCarryOffsets) {
    auto offset_of = [](const std::string& src, const ExprScope& s = {}) -> long {
        try {
            Expression::parse(src, s);
        } catch (const ExprError& e) {
            return static_cast<long>(e.position);
        }
        return -1;
    };
    EXPECT_EQ(offset_of("x + * y"), 4);
    EXPECT_EQ(offset_of("x + z"), 4);
    EXPECT_EQ(offset_of("(x + y"), 6);
    EXPECT_EQ(offset_of("x ^ y"), 4);
    EXPECT_EQ(offset_of("psi3", ExprScope{2, {Puiseux()}}), 0);
    EXPECT_EQ(offset_of("x4", ExprScope{3, {}}), 0);
    EXPECT_EQ(offset_of("x y"), 2);
    EXPECT_EQ(offset_of(""), 0);
    EXPECT_EQ(offset_of("x^(1/0)"), 5);
}

TEST(Expression, FieldPieceEvaluatesInTaylorMode) {
    const auto e = Expression::parse("x*y");
    const auto F = expression_field(e, '+');
    EXPECT_EQ(F.side, '+');
    EXPECT_NEAR(F.value({0.3, 0.2}), 0.06, 1e-15);
    EXPECT_THROW(expression_field(Expression::parse("x1", ExprScope{3, {}})), ExprError);
}
