#include "bundle_fixtures.hpp"

#include <whitney/bundles.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace whitney;

namespace {

Vector unit(int n, int i) { return Vector::Unit(n, i); }

// Oracle: for the square data, brute-force the best slope at the origin on a dense
// grid, scoring each slope by the worst Whitney quotient against the exact jets of x^2
// at the neighbors (the neighbor slopes are free, so they follow x^2 exactly).
double best_slope_by_grid(double h) {
    double best = 0.0, best_score = 1e300;
    for (int i = -2000; i <= 2000; ++i) {
        const double s0 = i * 1e-3;
        // pair (0, h): value gap |0 - (h^2 - 2h*h)| / h and |s0 h - h^2| / h ; slope gap |s0 - 2h|
        const double score = std::max({std::abs(h), std::abs(s0 - h), std::abs(s0 - 2 * h)});
        if (score < best_score) {
            best_score = score;
            best = s0;
        }
    }
    return best;
}

}  // namespace

TEST(FiberFromConstraints, NoRowsIsFull) {
    auto f = fiber_from_constraints(JetSpace(2, 1, 2), {});
    EXPECT_EQ(f.flag, FiberFlag::full);
    EXPECT_EQ(f.dim(), 6);
}

TEST(FiberFromConstraints, ContradictoryRowsEmpty) {
    JetSpace s(1, 1, 1);
    auto f = fiber_from_constraints(s, {{unit(2, 0), 1.0}, {unit(2, 0), 2.0}});
    EXPECT_TRUE(f.is_empty());
}

TEST(FiberFromConstraints, OffsetIsMinimumNormAndGeneratorsOrthonormal) {
    JetSpace s(1, 2, 1);
    Vector r(3);
    r << 1, 1, 0;
    auto f = fiber_from_constraints(s, {{r, 2.0}});
    EXPECT_EQ(f.dim(), 2);
    EXPECT_NEAR(f.offset(0), 1.0, 1e-12);
    EXPECT_NEAR(f.offset(1), 1.0, 1e-12);
    EXPECT_NEAR((f.generators.transpose() * f.generators - Matrix::Identity(2, 2)).norm(), 0.0, 1e-12);
    EXPECT_NEAR((r.transpose() * f.generators).norm(), 0.0, 1e-12);
}

TEST(FiberFromConstraints, KollarNowakRowAtOneOneZero) {
    // x1^3 x2 P1 + (x1^3 - (1 + x3^2) x2^3) P2 = x1^4 at z = (1,1,0), m = 0, D = 2
    JetSpace s(3, 0, 2);
    Vector r(2);
    r << 1.0, 0.0;
    auto f = fiber_from_constraints(s, {{r, 1.0}});
    EXPECT_FALSE(f.is_empty());
    EXPECT_EQ(f.dim(), 1);
    // dense oracle: the row has rank 1 in R^2 and the system is consistent
    Eigen::FullPivLU<Matrix> lu(r.transpose());
    EXPECT_EQ(lu.rank(), 1);
}

TEST(ModuleClosure, ConstantGeneratorGrows) {
    JetSpace s(1, 1, 1);
    AffineFiber f = AffineFiber::make(Vector::Zero(2), unit(2, 0));
    auto c = module_closure(f, s);
    EXPECT_EQ(c.dim(), 2);
    // explicit oracle: x * 1 = x, so the span must contain e1
    EXPECT_NEAR(affine_distance(unit(2, 1), Vector::Zero(2), c.generators), 0.0, 1e-12);
}

TEST(ModuleClosure, ClosedSpanUnchanged) {
    // span{x, x^2} at order 2 in one variable is an ideal
    JetSpace s(1, 2, 1);
    Matrix G(3, 2);
    G << 0, 0, 1, 0, 0, 1;
    auto f = AffineFiber::make(Vector::Zero(3), G);
    EXPECT_EQ(module_closure(f, s).dim(), 2);
    EXPECT_EQ(module_closure(module_closure(f, s), s).dim(), 2);
}

TEST(ModuleClosure, FullStaysFullAndEmptyRejected) {
    JetSpace s(2, 1, 1);
    EXPECT_EQ(module_closure(AffineFiber::full(3), s).flag, FiberFlag::full);
    EXPECT_THROW(module_closure(AffineFiber::empty(3), s), BundleError);
}

TEST(ModuleClosure, MatchesExplicitMonomialMultiplication) {
    // generator (x + y) in two variables at order 2: closure adds x(x+y), y(x+y)
    JetSpace s(2, 2, 1);
    JetVector<double> g({Jet<double>(2, 2, {0.0, 0.0}, {0, 1, 1, 0, 0, 0})});
    auto f = AffineFiber::make(Vector::Zero(6), flat_jet(g));
    auto c = module_closure(f, s);
    EXPECT_EQ(c.dim(), 3);
    for (int v = 0; v < 2; ++v) {
        auto mono = Jet<double>::coordinate(2, 2, {0.0, 0.0}, v);
        JetVector<double> prod({mono.multiply(g[0])});
        EXPECT_NEAR(affine_distance(flat_jet(prod), Vector::Zero(6), c.generators), 0.0, 1e-12);
    }
}

TEST(GlaeserRefine, FullFibersUnchanged) {
    auto b = fixtures::square_bundle();
    for (auto& f : b.fibers) f = AffineFiber::full(2);
    auto [r, rep] = glaeser_refine_once(b);
    for (int p = 0; p < b.size(); ++p) EXPECT_EQ(r.fibers[p].flag, FiberFlag::full);
    EXPECT_TRUE(rep.emptied_points.empty());
}

TEST(GlaeserRefine, IsolatedPointUnchanged) {
    JetSpace s(1, 1, 1);
    SampledBundle b{s, {{0.0}}, {fixtures::value_fiber(s, 0.0)}};
    auto [r, rep] = glaeser_refine_once(b);
    EXPECT_EQ(r.fibers[0].dim(), 1);
}

TEST(GlaeserRefine, SquareDataPinsSlopeAtOrigin) {
    auto b = fixtures::square_bundle();
    auto [r, rep] = glaeser_refine_once(b);
    ASSERT_EQ(r.fibers[0].dim(), 0);
    EXPECT_NEAR(r.fibers[0].offset(1), 0.0, 1e-4);
    // grid oracle: the best slope against ever-closer neighbors tends to 0
    EXPECT_NEAR(best_slope_by_grid(1e-3), 0.0, 2e-3);
    EXPECT_NEAR(r.fibers[0].offset(1), best_slope_by_grid(1e-6), 1e-3);
}

TEST(GlaeserRefine, SquareDataStabilizesWithinTwoPasses) {
    auto [r, rep] = iterate_to_stability(fixtures::square_bundle(), 10);
    EXPECT_TRUE(rep.stable);
    EXPECT_LE(rep.iterations, 2);
    EXPECT_TRUE(rep.emptied_points.empty());
    EXPECT_NEAR(r.fibers[0].offset(1), 0.0, 1e-4);
}

TEST(GlaeserRefine, OscillatingDataEmptiesOrigin) {
    auto b = fixtures::oscillating_bundle();
    // oracle: divided differences f(2^-k)/2^-k alternate between +1 and -1, so no slope exists at 0
    for (int k = 0; k < 30; ++k) {
        const double x1 = std::ldexp(1.0, -k), x2 = std::ldexp(1.0, -k - 1);
        const double d1 = b.fibers[k + 1].offset(0) / x1, d2 = b.fibers[k + 2].offset(0) / x2;
        EXPECT_NEAR(std::abs(d1 - d2), 2.0, 1e-12);
    }
    auto [r, rep] = iterate_to_stability(b, 10);
    EXPECT_TRUE(r.fibers[0].is_empty());
    ASSERT_FALSE(rep.emptied_points.empty());
    EXPECT_EQ(rep.emptied_points.front(), 0);
}

TEST(GlaeserRefine, MonotoneAndSectionSurvivesOnEveryFixture) {
    struct Case {
        SampledBundle b;
        std::function<Vector(const Point&)> section;
    };
    std::vector<Case> cases{{fixtures::square_bundle(), [](const Point& p) { return fixtures::square_jet(p[0]); }},
                            {fixtures::planar_bundle(), [](const Point& p) { return fixtures::quadratic_jet(p); }},
                            {fixtures::oscillating_bundle(), nullptr}};
    for (auto& c : cases) {
        SampledBundle cur = c.b;
        for (int it = 0; it < 3; ++it) {
            auto [next, rep] = glaeser_refine_once(cur);
            for (int p = 0; p < cur.size(); ++p) {
                EXPECT_TRUE(fiber_contains(cur.fibers[p], next.fibers[p])) << "point " << p;
                if (c.section) EXPECT_LE(next.fibers[p].distance(c.section(cur.points[p])), 1e-8) << "point " << p;
            }
            cur = next;
        }
    }
}

TEST(GlaeserRefine, PlanarDataPinsGradientAtOrigin) {
    auto [r, rep] = iterate_to_stability(fixtures::planar_bundle(), 5);
    EXPECT_TRUE(rep.stable);
    EXPECT_EQ(r.fibers[0].dim(), 0);
    EXPECT_NEAR(r.fibers[0].offset.norm(), 0.0, 1e-4);
}

TEST(GlaeserRefine, IndependentOfGeneratorBasis) {
    auto b = fixtures::planar_bundle();
    for (auto& f : b.fibers) f = AffineFiber::full(3);
    // the origin fiber: {P : P(0) = 0}, the rest constrain nothing but the value
    b.fibers[0] = fixtures::value_fiber(b.space, 0.0);
    for (int p = 1; p < b.size(); ++p) b.fibers[p] = fixtures::value_fiber(b.space, fixtures::quadratic(b.points[p][0], b.points[p][1]));
    auto ref = glaeser_refine_once(b).first;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    auto rotated = b;
    for (auto& f : rotated.fibers) {
        if (f.dim() <= 0) continue;
        Matrix R(f.dim(), f.dim());
        for (int i = 0; i < R.rows(); ++i)
            for (int j = 0; j < R.cols(); ++j) R(i, j) = g(rng);
        Eigen::HouseholderQR<Matrix> qr(R);
        f.generators = f.generators * Matrix(qr.householderQ());
    }
    auto rot = glaeser_refine_once(rotated).first;
    for (int p = 0; p < b.size(); ++p) {
        ASSERT_EQ(ref.fibers[p].dim(), rot.fibers[p].dim());
        EXPECT_LT(max_principal_angle(ref.fibers[p].generators, rot.fibers[p].generators), 1e-6);
        EXPECT_LT((ref.fibers[p].offset - rot.fibers[p].offset).norm(), 1e-6);
    }
}

TEST(GlaeserRefine, IdempotentAtFixedPoint) {
    auto [r, rep] = iterate_to_stability(fixtures::square_bundle(), 10);
    auto [again, rep2] = glaeser_refine_once(r);
    EXPECT_TRUE(same_bundle(r, again, 1e-10));
}

TEST(FiniteCertificate, SinglePointBoundedFiber) {
    JetSpace s(1, 1, 1);
    SampledBundle b{s, {{0.5}}, {fixtures::value_fiber(s, 3.0)}};
    EXPECT_TRUE(finiteness_certificate(b, 3.5, 3));
    EXPECT_FALSE(finiteness_certificate(b, 2.5, 3));
}

TEST(FiniteCertificate, EmptiedBundleFails) {
    auto [r, rep] = iterate_to_stability(fixtures::oscillating_bundle(), 10);
    EXPECT_FALSE(finiteness_certificate(r, 1e6, 3));
}

TEST(FiniteCertificate, SquareDataHoldsWithModerateBound) {
    auto [r, rep] = iterate_to_stability(fixtures::square_bundle(), 10);
    auto cert = finiteness_certificate_report(r, 10.0, 3);
    EXPECT_TRUE(cert.holds);
    EXPECT_TRUE(cert.exhaustive);
    EXPECT_EQ(cert.tuples_checked, 4960);  // C(32, 3)
    // oracle: the jets of x^2 are an explicit witness for every tuple with M = 10
    for (int i = 0; i < r.size(); ++i) EXPECT_LE(std::abs(fixtures::square_jet(r.points[i][0])(1)), 10.0);
}
