#include <whitney/lp.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace whitney;

namespace {

Matrix mat(int r, int c, std::initializer_list<double> v) {
    Matrix M(r, c);
    int k = 0;
    for (double x : v) M(k / c, k % c) = x, ++k;
    return M;
}

}  // namespace

TEST(SimplexLp, TextbookMaximization) {
    // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), value 36
    LinearProgram lp;
    lp.c = Vector(2);
    lp.c << -3, -5;
    lp.A_ub = mat(5, 2, {1, 0, 0, 2, 3, 2, -1, 0, 0, -1});
    lp.b_ub = Vector(5);
    lp.b_ub << 4, 12, 18, 0, 0;
    auto r = solve_lp(lp);
    ASSERT_EQ(r.status, LpStatus::optimal);
    EXPECT_NEAR(r.x(0), 2, 1e-9);
    EXPECT_NEAR(r.x(1), 6, 1e-9);
    EXPECT_NEAR(r.objective, -36, 1e-9);
}

TEST(SimplexLp, FreeVariablesAndEqualities) {
    // min |x - 3| via x - 3 <= t, 3 - x <= t, minimize t; plus x + y = 1
    LinearProgram lp;
    lp.c = Vector(3);
    lp.c << 0, 0, 1;
    lp.A_eq = mat(1, 3, {1, 1, 0});
    lp.b_eq = Vector::Ones(1);
    lp.A_ub = mat(2, 3, {1, 0, -1, -1, 0, -1});
    lp.b_ub = Vector(2);
    lp.b_ub << 3, -3;
    auto r = solve_lp(lp);
    ASSERT_EQ(r.status, LpStatus::optimal);
    EXPECT_NEAR(r.objective, 0, 1e-9);
    EXPECT_NEAR(r.x(0), 3, 1e-9);
    EXPECT_NEAR(r.x(1), -2, 1e-9);
}

TEST(SimplexLp, DetectsInfeasibleAndUnbounded) {
    LinearProgram bad;
    bad.c = Vector::Zero(1);
    bad.A_eq = mat(2, 1, {1, 1});
    bad.b_eq = Vector(2);
    bad.b_eq << 0, 1;
    EXPECT_EQ(solve_lp(bad).status, LpStatus::infeasible);
    LinearProgram unb;
    unb.c = Vector::Ones(1);
    EXPECT_EQ(solve_lp(unb).status, LpStatus::unbounded);
}

TEST(SimplexLp, RandomProgramsSatisfyConstraintsAndBeatFeasiblePoints) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int t = 0; t < 50; ++t) {
        const int n = 4, m = 8;
        LinearProgram lp;
        lp.c = Vector(n);
        for (int i = 0; i < n; ++i) lp.c(i) = u(rng);
        lp.A_ub = Matrix(m + 2 * n, n);
        lp.b_ub = Vector(m + 2 * n);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) lp.A_ub(i, j) = u(rng);
            lp.b_ub(i) = 1.0 + std::abs(u(rng));  // origin strictly feasible
        }
        for (int j = 0; j < n; ++j) {  // box keeps it bounded
            lp.A_ub.row(m + 2 * j) = Vector::Unit(n, j).transpose();
            lp.A_ub.row(m + 2 * j + 1) = -Vector::Unit(n, j).transpose();
            lp.b_ub(m + 2 * j) = lp.b_ub(m + 2 * j + 1) = 2.0;
        }
        auto r = solve_lp(lp);
        ASSERT_EQ(r.status, LpStatus::optimal);
        EXPECT_LE((lp.A_ub * r.x - lp.b_ub).maxCoeff(), 1e-9);
        for (int s = 0; s < 200; ++s) {
            Vector z(n);
            for (int j = 0; j < n; ++j) z(j) = 2 * u(rng);
            if ((lp.A_ub * z - lp.b_ub).maxCoeff() <= 0) EXPECT_LE(r.objective, lp.c.dot(z) + 1e-9);
        }
    }
}

TEST(ActiveSetQp, ProjectionOntoHalfspaceAndLine) {
    // min |x|^2 s.t. x0 + x1 = 2, x0 <= 0.5  ->  (0.5, 1.5)
    Matrix H = 2 * Matrix::Identity(2, 2);
    Vector g = Vector::Zero(2);
    Matrix Ae = mat(1, 2, {1, 1});
    Vector be = Vector::Constant(1, 2.0);
    Matrix Au = mat(1, 2, {1, 0});
    Vector bu = Vector::Constant(1, 0.5);
    Vector x0(2);
    x0 << -3, 5;
    auto r = solve_qp_active_set(H, g, Ae, be, Au, bu, x0);
    ASSERT_TRUE(r.ok);
    EXPECT_NEAR(r.x(0), 0.5, 1e-10);
    EXPECT_NEAR(r.x(1), 1.5, 1e-10);
}

TEST(ActiveSetQp, InactiveConstraintReleased) {
    // start on a constraint whose multiplier is negative: min |x - (1,1)|^2, x0 <= 2, start at (2, 0)
    Matrix H = 2 * Matrix::Identity(2, 2);
    Vector g(2);
    g << -2, -2;
    Matrix Au = mat(1, 2, {1, 0});
    Vector bu = Vector::Constant(1, 2.0);
    Vector x0(2);
    x0 << 2, 0;
    auto r = solve_qp_active_set(H, g, Matrix(0, 2), Vector(0), Au, bu, x0);
    ASSERT_TRUE(r.ok);
    EXPECT_NEAR(r.x(0), 1, 1e-10);
    EXPECT_NEAR(r.x(1), 1, 1e-10);
}
