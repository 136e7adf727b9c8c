#include "pipeline_fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace whitney;
using fixtures::monomial_field;

namespace {

PipelineParams quick_params() {
    PipelineParams p;
    p.helly.sphere_samples = 1000;
    return p;
}

AxisBundleSpec sqrt_spec() {
    AxisBundleSpec spec;
    spec.m = 1;
    spec.jmax = 1;
    spec.imax = 1;
    spec.A = {{FieldPiece{'w', [](const Jet<double>& X, const Jet<double>& Y) { return real_power(divide(Y, X), 0.5); }}}};
    spec.B = {zero_field()};
    spec.width = Puiseux::identity();
    return spec;
}

}  // namespace

TEST(PuiseuxFit, RecoversIntegerAndFractionalSeries) {
    const auto xs = geometric_ladder(0.5, std::sqrt(0.5), 24);
    std::vector<double> a, b, z;
    for (double x : xs) {
        a.push_back(0.5 * x * x - 3 * x * x * x);
        b.push_back(2 * std::pow(x, 1.5) + std::pow(x, 7.0 / 3.0));
        z.push_back(0.0);
    }
    const auto fa = fit_puiseux(xs, a);
    ASSERT_TRUE(fa.ok);
    EXPECT_EQ(fa.series, Puiseux::monomial(rational(1, 2), 2) + Puiseux::monomial(rational(-3), 3));
    const auto fb = fit_puiseux(xs, b);
    ASSERT_TRUE(fb.ok);
    EXPECT_EQ(fb.N, 6);
    for (double x : {0.01, 0.1, 0.3}) EXPECT_NEAR(fb.series.evaluate(x), 2 * std::pow(x, 1.5) + std::pow(x, 7.0 / 3.0), 1e-9);
    EXPECT_TRUE(fit_puiseux(xs, z).series.is_zero());
}

TEST(AxisBundle, RegularCoefficientsTakeTheTaylorRoute) {
    // q = (ybar / xbar) p + ybar^2: at order 1 this pins q0 = 0 and q1 = p0 / xbar.
    AxisBundleSpec spec;
    spec.m = 1;
    spec.jmax = 1;
    spec.imax = 1;
    spec.A = {{FieldPiece{'w', [](const Jet<double>& X, const Jet<double>& Y) { return divide(Y, X); }}}};
    spec.B = {monomial_field(1.0, 0, 2)};
    spec.width = Puiseux::identity();
    const auto ab = build_axis_bundle(spec, {0.5, 0.25});
    ASSERT_EQ(ab.bundle.size(), 3);
    EXPECT_EQ(ab.bundle.fibers[0].dim(), 0);
    for (int k = 0; k < 2; ++k) {
        const double xb = k == 0 ? 0.5 : 0.25;
        const auto& f = ab.fibers[k];
        EXPECT_TRUE(f.exact);
        EXPECT_EQ(f.fiber.dim(), 2);
        Vector u(4);
        u << 1.7, -0.3, 0.0, 1.7 / xb;  // p0, p1, q0, q1
        EXPECT_LT(f.fiber.distance(u), 1e-10);
        u(3) += 0.01;
        EXPECT_GT(f.fiber.distance(u), 1e-3);
    }
}

TEST(AxisBundle, SingularCoefficientsUseTheProbeLadder) {
    const auto spec = sqrt_spec();
    const auto ab = build_axis_bundle(spec, {0.5, 0.1});
    for (const auto& f : ab.fibers) {
        EXPECT_FALSE(f.exact);
        ASSERT_EQ(f.fiber.dim(), 1);
        // only the linear coefficient of p survives
        EXPECT_NEAR(std::abs(f.fiber.generators(1, 0)), 1.0, 1e-8);
        EXPECT_LT(f.fiber.offset.norm(), 1e-8);
        Vector u = Vector::Zero(4);
        u(1) = 3.0;
        EXPECT_LT(f.fiber.distance(u), 1e-8);
        u(0) = 1e-3;
        EXPECT_GT(f.fiber.distance(u), 1e-4);
    }
}

TEST(AxisBundle, RejectsShortProbeLadder) {
    auto spec = sqrt_spec();
    spec.probes = 5;
    EXPECT_THROW(build_axis_bundle(spec, {0.5}), PipelineError);
}

TEST(Heights, SelectedHeightsAreAdmissible) {
    const auto nf = fixtures::coupled_wedge();
    const auto xs = geometric_ladder(0.5, std::sqrt(0.5), 8);
    for (char side : {'+', '-'}) {
        auto spec = axis_spec(nf, 1, side);
        const auto ab = build_axis_bundle(spec, xs);
        SelectionParams sp;
        sp.sphere_samples = 1000;
        const auto hs = select_sample_heights(spec, ab, xs, sp);
        ASSERT_FALSE(hs.levels.empty());
        EXPECT_TRUE(hs.heights_valid);
        EXPECT_TRUE(hs.derivative_bounds);
        for (std::size_t i = 0; i < hs.levels.size(); ++i)
            for (double x : xs)
                EXPECT_NEAR(hs.heights[i].evaluate(x), (2.0 / 3.0) * std::pow(0.5, hs.levels[i]) * 0.5 * x, 1e-14);
    }
}

TEST(Assembly, RowCounts) {
    const auto nf = fixtures::coupled_wedge();
    const auto prep = prepare_traces(nf, 1.0, quick_params());
    ASSERT_EQ(prep.system.at.size(), 24u);
    EXPECT_EQ(prep.system.unknowns, 3 * 2 * 2);
    for (const auto& tr : prep.system.at) {
        EXPECT_EQ(tr.link.rows(), 2 * 2 * 2);
        EXPECT_EQ(tr.curve_rows, 2);
        // the lower strip pins one component to order 1 from each side
        EXPECT_EQ(tr.lambda_rows, 2 * 2);
        EXPECT_EQ(tr.exact.rows(), tr.curve_rows + tr.lambda_rows);
    }
}

TEST(Pipeline, XyWedgeSynthesizesAFlatSection) {
    const auto nf = fixtures::xy_wedge();
    const auto rep = run_pipeline(nf, quick_params());
    ASSERT_TRUE(rep.synthesis.has_value()) << rep.message;
    EXPECT_TRUE(rep.pass) << rep.message;
    EXPECT_TRUE(rep.selection.F_min_fit.exceeds(0.1));
    const auto& F = rep.synthesis->disc[0];
    for (double x : {0.4, 0.1, 0.02, 0.003}) EXPECT_NEAR(F.value({x, 0.5 * x}), 0.5 * x * x, 1e-6 * x * x + 1e-12);
    EXPECT_TRUE(rep.section->pass);
    EXPECT_LT(rep.synthesis->trace_error, 1e-6);
    for (const auto& c : rep.cm) EXPECT_TRUE(c.pass) << c.message;
    EXPECT_EQ(F.value({-0.2, 0.1}), 0.0);
}

TEST(Pipeline, CoupledWedgeSatisfiesTheStripEquation) {
    const auto nf = fixtures::coupled_wedge();
    const auto rep = run_pipeline(nf, quick_params());
    ASSERT_TRUE(rep.synthesis.has_value()) << rep.message;
    EXPECT_TRUE(rep.pass) << rep.message;
    const auto& F = rep.synthesis->disc;
    for (double x : {0.3, 0.05, 0.01})
        for (double c : {0.1, 0.3, 0.45}) {
            const double y = c * x;
            EXPECT_NEAR(F[0].value({x, y}) + (y / x) * F[1].value({x, y}), 2 * y * y, 1e-9);
        }
    for (double x : {0.3, 0.05}) {
        EXPECT_NEAR(F[1].value({x, 0.5 * x}), 0.5 * x * x, 1e-8);
        EXPECT_NEAR(F[0].value({x, x}), x * x, 1e-8);
    }
    for (const auto& c : rep.cm) EXPECT_TRUE(c.pass) << c.message;
}

TEST(Pipeline, PerturbedSectionFailsVerification) {
    const auto nf = fixtures::xy_wedge();
    const auto rep = run_pipeline(nf, quick_params());
    ASSERT_TRUE(rep.synthesis.has_value());
    const auto good = rep.synthesis->disc[0];
    const auto bumped = fixtures::sum_fields(good, monomial_field(1.0, 1, 1));  // adds x y
    const auto r1 = verify_section(nf, {bumped}, rep.delta);
    EXPECT_FALSE(r1.pass);
    // the row residual is the trace of x y on y = x/2 at the top of the ladder, x = 1/2
    EXPECT_NEAR(r1.curve_residual, 0.125, 1e-9);
    EXPECT_LT(r1.strip_residual, 1e-12);
    const auto lifted = fixtures::sum_fields(good, monomial_field(1.0, 0, 1));  // adds y, breaks flatness
    const auto r2 = verify_section(nf, {lifted}, rep.delta);
    EXPECT_FALSE(r2.pass);
}

TEST(Pipeline, SlopeObstructionIsReportedAsNonexistence) {
    const auto rep = run_pipeline(fixtures::slope_obstruction(), quick_params());
    EXPECT_FALSE(rep.pass);
    EXPECT_FALSE(rep.synthesis.has_value());
    EXPECT_TRUE(rep.selection.nonexistence.found);
    EXPECT_NE(rep.selection.nonexistence.reason.find("does not tend to zero"), std::string::npos);
}

TEST(Pipeline, ContradictoryRowsAreReportedAsNonexistence) {
    const auto rep = run_pipeline(fixtures::contradictory_rows(), quick_params());
    EXPECT_FALSE(rep.pass);
    EXPECT_TRUE(rep.selection.nonexistence.found);
    EXPECT_NE(rep.selection.nonexistence.reason.find("inconsistent"), std::string::npos);
}

TEST(Pipeline, MalformedNormalFormsAreRejected) {
    auto nf = fixtures::xy_wedge();
    nf.ladder.curves.back() = Puiseux::monomial(rational(1, 2), 1);
    EXPECT_THROW(validate_normal_form(nf), PipelineError);
    nf = fixtures::xy_wedge();
    nf.strips.pop_back();
    EXPECT_THROW(validate_normal_form(nf), PipelineError);
    nf = fixtures::xy_wedge();
    nf.origin_zero = false;
    EXPECT_THROW(validate_normal_form(nf), PipelineError);
}

TEST(Pipeline, BlowupBeyondTheEstimateIsFlagged) {
    auto nf = fixtures::coupled_wedge();
    // 1/y^2 grows like dist^-2 toward the lower curve
    nf.strips[0].A[0][0] = FieldPiece{'w', [](const Jet<double>&, const Jet<double>& Y) { return integer_power(Y, -2); }};
    EXPECT_FALSE(certify_strip_estimates(nf, 1.0).ok);
    EXPECT_TRUE(certify_strip_estimates(fixtures::coupled_wedge(), 1.0).ok);
}

TEST(Membership, DistanceToSampledFibers) {
    SampledBundle b;
    b.space = JetSpace(2, 0, 1);
    b.points = {{0.0, 0.0}, {0.5, 0.5}};
    b.fibers = {AffineFiber::make(Vector::Zero(1), Matrix(1, 0)), AffineFiber::make(Vector::Constant(1, 0.25), Matrix(1, 0))};
    const auto good = verify_membership(b, [](const Point& p) { return Vector::Constant(1, p[0] * p[1]); });
    EXPECT_TRUE(good.pass);
    const auto bad = verify_membership(b, [](const Point& p) { return Vector::Constant(1, p[0]); });
    EXPECT_FALSE(bad.pass);
    EXPECT_EQ(bad.worst_point, 1);
    EXPECT_NEAR(bad.worst_distance, 0.25, 1e-12);
}
