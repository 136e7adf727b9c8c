#include <whitney/puiseux.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

using namespace whitney;
using Q = whitney::rational;

namespace {

// Oracle: series as a map from rational exponent to coefficient, no ramification bookkeeping.
using ExpMap = std::map<Q, Q>;

ExpMap as_map(const Puiseux& p) {
    ExpMap m;
    for (const auto& [q, c] : p.terms()) m[Q(q, p.N())] = c;
    return m;
}

ExpMap map_mul(const ExpMap& a, const ExpMap& b) {
    ExpMap out;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) out[ea + eb] += ca * cb;
    for (auto it = out.begin(); it != out.end();) it = it->second == 0 ? out.erase(it) : std::next(it);
    return out;
}

Puiseux random_series(std::mt19937_64& rng, bool monomial_leading = false) {
    std::uniform_int_distribution<int> Nd(1, 6), qd(0, 12), cd(-5, 5), terms(1, 4);
    const int N = Nd(rng);
    Puiseux p(N);
    const int t = terms(rng);
    for (int i = 0; i < t; ++i) {
        int c = cd(rng);
        if (c == 0) c = 1;
        p.add_term(qd(rng) + (monomial_leading ? N + 1 : 0), Q(c, 1 + static_cast<int>(rng() % 3)));
    }
    if (p.is_zero()) p.add_term(N + 1, Q(1));
    return p.canonical();
}

}  // namespace

TEST(PuiseuxArithmetic, AddZeroIsIdentity) {
    std::mt19937_64 rng(1);
    auto a = random_series(rng);
    EXPECT_EQ(puiseux_mul_add(a, Puiseux(3), PuiseuxOp::add), a);
}

TEST(PuiseuxArithmetic, RamificationCollapses) {
    auto h = Puiseux::monomial(Q(1), 1, 2);
    auto p = h * h;
    EXPECT_EQ(p.N(), 1);
    EXPECT_EQ(p, Puiseux::identity());
}

TEST(PuiseuxArithmetic, SquareOfBinomialMatchesExpansion) {
    auto a = Puiseux::monomial(Q(1), 1, 2) + Puiseux::identity();
    auto sq = puiseux_mul_add(a, a, PuiseuxOp::mul);
    ExpMap expected{{Q(1), Q(1)}, {Q(3, 2), Q(2)}, {Q(2), Q(1)}};
    EXPECT_EQ(as_map(sq), expected);
    EXPECT_EQ(as_map(sq), map_mul(as_map(a), as_map(a)));
}

TEST(PuiseuxArithmetic, RingAxiomsExact) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 100; ++t) {
        auto a = random_series(rng), b = random_series(rng), c = random_series(rng);
        EXPECT_EQ(a * b, b * a);
        EXPECT_EQ((a * b) * c, a * (b * c));
        EXPECT_EQ(a * (b + c), a * b + a * c);
        EXPECT_EQ(a + b, b + a);
        EXPECT_EQ(as_map(a * b), map_mul(as_map(a), as_map(b)));
        EXPECT_TRUE((a - a).is_zero());
    }
}

TEST(PuiseuxArithmetic, TruncationPropagates) {
    Puiseux a = Puiseux::identity();
    a.set_trunc(3);  // known through x^3
    Puiseux b = Puiseux::monomial(Q(1), 2, 1);
    EXPECT_EQ(*(a + b).trunc_exponent(), Q(3));
    EXPECT_EQ(*(a * b).trunc_exponent(), Q(5));
    EXPECT_FALSE((b * b).trunc().has_value());
}

TEST(PuiseuxDerivative, PowerRuleAndConstant) {
    auto d = puiseux_derivative(Puiseux::monomial(Q(1), 3, 2));
    EXPECT_EQ(d, Puiseux::monomial(Q(3, 2), 1, 2));
    EXPECT_TRUE(puiseux_derivative(Puiseux::constant(Q(7))).is_zero());
}

TEST(PuiseuxDerivative, LeadingOrderDropsByOne) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 100; ++t) {
        auto a = random_series(rng, true);
        EXPECT_EQ(leading_order(a.derivative()), leading_order(a) - 1);
        // repeated differentiation of a monomial-leading series
        auto b = a.derivative().derivative();
        if (leading_order(a) > 2) {
            EXPECT_EQ(leading_order(b), leading_order(a) - 2);
        }
    }
}

TEST(PuiseuxDerivative, NumericValueMatchesFiniteDifference) {
    auto a = Puiseux::monomial(Q(2), 5, 3) - Puiseux::monomial(Q(1), 2, 1);
    const double x = 0.3, h = 1e-6;
    EXPECT_NEAR(a.derivative().evaluate(x), (a.evaluate(x + h) - a.evaluate(x - h)) / (2 * h), 1e-6);
    EXPECT_NEAR(a.derivative_value(2, x), a.derivative().derivative().evaluate(x), 1e-12);
    auto tay = a.taylor(x, 3);
    EXPECT_NEAR(tay[2] * 2, a.derivative_value(2, x), 1e-12);
}

TEST(LeadingOrder, Examples) {
    EXPECT_EQ(leading_order(Puiseux::identity()), Q(1));
    EXPECT_EQ(leading_order(Puiseux::monomial(Q(1), 5, 3) - Puiseux::monomial(Q(1), 2, 1)), Q(5, 3));
    EXPECT_THROW(leading_order(Puiseux(1)), PuiseuxError);
}

TEST(LeadingOrder, ProductOrdersAdd) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 100; ++t) {
        auto a = random_series(rng), b = random_series(rng);
        EXPECT_EQ(leading_order(a * b), leading_order(a) + leading_order(b));
    }
}

TEST(CurveLadder, HalfDiagonal) {
    CurveLadder l{{Puiseux(1), Puiseux::monomial(Q(1, 2), 1), Puiseux::identity()}, 1.0};
    auto v = curve_ladder_validate(l);
    EXPECT_TRUE(v.valid) << v.reason;
    EXPECT_DOUBLE_EQ(v.delta_refined, 1.0);
}

TEST(CurveLadder, ParabolaLimitsRadius) {
    CurveLadder l{{Puiseux(1), Puiseux::monomial(Q(1), 2), Puiseux::identity()}, 2.0};
    auto v = curve_ladder_validate(l);
    ASSERT_TRUE(v.valid) << v.reason;
    // x^2 < x exactly on (0, 1)
    EXPECT_LT(v.delta_refined, 1.0);
    EXPECT_GT(v.delta_refined, 1.0 - 1e-9);
    auto again = curve_ladder_validate({l.curves, v.delta_refined});
    EXPECT_TRUE(again.valid);
    EXPECT_EQ(again.delta_refined, v.delta_refined);
}

TEST(CurveLadder, DuplicateRejected) {
    CurveLadder l{{Puiseux(1), Puiseux::identity(), Puiseux::identity()}, 1.0};
    EXPECT_FALSE(curve_ladder_validate(l).valid);
}

namespace {

std::vector<UniformitySample> log_grid(double (*f)(double, double)) {
    std::vector<UniformitySample> s;
    for (int i = 0; i < 64; ++i) {
        const double x = std::pow(10.0, -3.0 * i / 63.0);
        for (int j = 0; j < 64; ++j) {
            const double y = std::pow(10.0, -6.0 * j / 63.0);
            s.push_back({x, y, f(x, y)});
        }
    }
    return s;
}

}  // namespace

TEST(UniformityExponent, LinearGivesOne) {
    auto r = uniformity_exponent(log_grid([](double, double y) { return y; }));
    EXPECT_EQ(r.N, 1);
    for (double a : r.envelope) EXPECT_NEAR(a, 1.0, 1e-12);
}

TEST(UniformityExponent, CubeRootGivesThree) {
    auto r = uniformity_exponent(log_grid([](double, double y) { return std::cbrt(y); }));
    EXPECT_EQ(r.N, 3);
}

TEST(UniformityExponent, SquareRootEnvelopeIsX) {
    auto r = uniformity_exponent(log_grid([](double x, double y) { return x * std::sqrt(y); }));
    EXPECT_EQ(r.N, 2);
    for (std::size_t i = 0; i < r.xs.size(); ++i) EXPECT_NEAR(r.envelope[i] / r.xs[i], 1.0, 1e-9);
}

TEST(UniformityExponent, ConstantDoesNotTendToZero) {
    EXPECT_THROW(uniformity_exponent(log_grid([](double, double) { return 1.0; })), PuiseuxError);
}

TEST(UniformityExponent, LogarithmicDecayExceedsCap) {
    EXPECT_THROW(uniformity_exponent(log_grid([](double, double y) { return 1.0 / (1.0 - std::log(y)); }), 4), PuiseuxError);
}
