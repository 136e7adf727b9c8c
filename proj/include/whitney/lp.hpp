// Small dense solvers for the selection step: a two-phase simplex method
// (Bland's rule) and a primal active-set method for strictly convex QPs.
#ifndef WHITNEY_LP_HPP
#define WHITNEY_LP_HPP

#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace whitney {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    Vector x;
    double objective = 0.0;
};

// minimize c.x over free x subject to A_eq x = b_eq and A_ub x <= b_ub.
struct LinearProgram {
    Vector c;
    Matrix A_eq;
    Vector b_eq;
    Matrix A_ub;
    Vector b_ub;
};

namespace detail {

// Tableau simplex on: min c.z, T z = r, z >= 0, with a starting basis.
class Tableau {
public:
    Tableau(Matrix T, Vector r, std::vector<int> basis, double tol) : T_(std::move(T)), r_(std::move(r)), basis_(std::move(basis)), tol_(tol) {}

    // Returns false when unbounded; `allowed` masks columns that may enter.
    LpStatus optimize(const Vector& cost, const std::vector<char>& allowed, int max_iter) {
        const int rows = static_cast<int>(T_.rows()), cols = static_cast<int>(T_.cols());
        for (int it = 0; it < max_iter; ++it) {
            // reduced costs d_j = c_j - c_B B^-1 A_j (tableau already holds B^-1 A)
            Vector cb(rows);
            for (int i = 0; i < rows; ++i) cb(i) = cost(basis_[i]);
            int enter = -1;
            for (int j = 0; j < cols; ++j) {
                if (!allowed[j]) continue;
                const double d = cost(j) - cb.dot(T_.col(j));
                if (d < -tol_) {
                    enter = j;  // Bland: smallest index
                    break;
                }
            }
            if (enter < 0) return LpStatus::optimal;
            int leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < rows; ++i) {
                const double a = T_(i, enter);
                if (a > tol_) {
                    const double ratio = r_(i) / a;
                    if (ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && leave >= 0 && basis_[i] < basis_[leave])) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) return LpStatus::unbounded;
            pivot(leave, enter);
        }
        return LpStatus::iteration_limit;
    }

    void pivot(int row, int col) {
        const double p = T_(row, col);
        T_.row(row) /= p;
        r_(row) /= p;
        for (int i = 0; i < T_.rows(); ++i) {
            if (i == row) continue;
            const double f = T_(i, col);
            if (f == 0.0) continue;
            T_.row(i) -= f * T_.row(row);
            r_(i) -= f * r_(row);
            if (std::abs(r_(i)) < 1e-15) r_(i) = std::max(r_(i), 0.0);
        }
        basis_[row] = col;
    }

    Vector solution(int cols) const {
        Vector z = Vector::Zero(cols);
        for (int i = 0; i < static_cast<int>(basis_.size()); ++i)
            if (basis_[i] < cols) z(basis_[i]) = r_(i);
        return z;
    }

    Matrix& T() { return T_; }
    Vector& r() { return r_; }
    std::vector<int>& basis() { return basis_; }

private:
    Matrix T_;
    Vector r_;
    std::vector<int> basis_;
    double tol_;
};

}  // namespace detail

inline LpResult solve_lp(const LinearProgram& lp, double tol = 1e-10, int max_iter = 20000) {
    const int n = static_cast<int>(lp.c.size());
    const int me = static_cast<int>(lp.A_eq.rows()), mu = static_cast<int>(lp.A_ub.rows());
    const int rows = me + mu;
    // z = (x+, x-, slack_ub, artificial)
    const int nz = 2 * n + mu;
    const int cols = nz + rows;
    Matrix T = Matrix::Zero(rows, cols);
    Vector r(rows);
    for (int i = 0; i < me; ++i) {
        T.block(i, 0, 1, n) = lp.A_eq.row(i);
        T.block(i, n, 1, n) = -lp.A_eq.row(i);
        r(i) = lp.b_eq(i);
    }
    for (int i = 0; i < mu; ++i) {
        T.block(me + i, 0, 1, n) = lp.A_ub.row(i);
        T.block(me + i, n, 1, n) = -lp.A_ub.row(i);
        T(me + i, 2 * n + i) = 1.0;
        r(me + i) = lp.b_ub(i);
    }
    for (int i = 0; i < rows; ++i) {
        if (r(i) < 0) {
            T.row(i) *= -1.0;
            r(i) *= -1.0;
        }
        T(i, nz + i) = 1.0;
    }
    std::vector<int> basis(rows);
    for (int i = 0; i < rows; ++i) basis[i] = nz + i;
    detail::Tableau tab(T, r, basis, tol);

    LpResult res;
    // phase one: drive the artificials to zero
    Vector cost1 = Vector::Zero(cols);
    cost1.tail(rows).setOnes();
    std::vector<char> all(cols, 1);
    if (tab.optimize(cost1, all, max_iter) == LpStatus::iteration_limit) {
        res.status = LpStatus::iteration_limit;
        return res;
    }
    double infeas = 0.0;
    for (int i = 0; i < rows; ++i)
        if (tab.basis()[i] >= nz) infeas += tab.r()(i);
    const double scale = 1.0 + (rows > 0 ? r.cwiseAbs().maxCoeff() : 0.0);
    if (infeas > 1e-8 * scale) {
        res.status = LpStatus::infeasible;
        return res;
    }
    // pivot remaining (zero-level) artificials out where possible
    for (int i = 0; i < rows; ++i) {
        if (tab.basis()[i] < nz) continue;
        for (int j = 0; j < nz; ++j)
            if (std::abs(tab.T()(i, j)) > 1e-9) {
                tab.pivot(i, j);
                break;
            }
    }
    std::vector<char> real(cols, 0);
    for (int j = 0; j < nz; ++j) real[j] = 1;
    Vector cost2 = Vector::Zero(cols);
    cost2.head(n) = lp.c;
    cost2.segment(n, n) = -lp.c;
    const LpStatus st = tab.optimize(cost2, real, max_iter);
    if (st != LpStatus::optimal) {
        res.status = st;
        return res;
    }
    const Vector z = tab.solution(cols);
    res.x = z.head(n) - z.segment(n, n);
    res.objective = lp.c.dot(res.x);
    res.status = LpStatus::optimal;
    return res;
}

struct QpResult {
    bool ok = false;
    Vector x;
    int iterations = 0;
};

// minimize 1/2 x'Hx + g'x subject to A_eq x = b_eq, A_ub x <= b_ub, starting from a
// feasible x0. H must be positive definite. Primal active-set method. Steps stay
// in the null space of A_eq, so b_eq is honoured through x0 and never read.
inline QpResult solve_qp_active_set(const Matrix& H, const Vector& g, const Matrix& A_eq, [[maybe_unused]] const Vector& b_eq,
                                    const Matrix& A_ub, const Vector& b_ub, const Vector& x0, int max_iter = 2000) {
    const int n = static_cast<int>(H.rows());
    const int me = static_cast<int>(A_eq.rows()), mu = static_cast<int>(A_ub.rows());
    QpResult res;
    Vector x = x0;
    const double tol = 1e-10;
    auto row_scale = [](const Matrix& A, int i) { return std::max(1.0, A.row(i).norm()); };

    // working set: indices of inequality rows treated as equalities
    std::vector<int> work;
    auto working_matrix = [&](const std::vector<int>& w) {
        Matrix W(me + static_cast<int>(w.size()), n);
        if (me) W.topRows(me) = A_eq;
        for (std::size_t k = 0; k < w.size(); ++k) W.row(me + static_cast<int>(k)) = A_ub.row(w[k]);
        return W;
    };
    auto independent_of = [&](const std::vector<int>& w, int cand) {
        Matrix W = working_matrix(w);
        Matrix W2(W.rows() + 1, n);
        W2.topRows(W.rows()) = W;
        W2.row(W.rows()) = A_ub.row(cand);
        Eigen::FullPivHouseholderQR<Matrix> q1(W), q2(W2);
        q1.setThreshold(1e-10);
        q2.setThreshold(1e-10);
        return W.rows() == 0 ? A_ub.row(cand).norm() > 1e-12 : q2.rank() > q1.rank();
    };
    for (int i = 0; i < mu; ++i)
        if (std::abs(A_ub.row(i).dot(x) - b_ub(i)) <= 1e-9 * row_scale(A_ub, i) && independent_of(work, i)) work.push_back(i);

    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it + 1;
        const Matrix W = working_matrix(work);
        const int mw = static_cast<int>(W.rows());
        // KKT: [H W'; W 0] [p; -lambda] = [-(Hx+g); 0]
        Matrix K = Matrix::Zero(n + mw, n + mw);
        K.topLeftCorner(n, n) = H;
        K.topRightCorner(n, mw) = W.transpose();
        K.bottomLeftCorner(mw, n) = W;
        Vector rhs = Vector::Zero(n + mw);
        rhs.head(n) = -(H * x + g);
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(K);
        cod.setThreshold(1e-13);
        const Vector sol = cod.solve(rhs);
        const Vector p = sol.head(n);
        const Vector lambda = -sol.tail(mw);
        if (p.norm() <= tol * (1.0 + x.norm())) {
            // multipliers of inequality rows must be non-negative (row <= b)
            int worst = -1;
            double most = -1e-10;
            for (std::size_t k = 0; k < work.size(); ++k) {
                const double l = -lambda(me + static_cast<int>(k));
                if (l < most) {
                    most = l;
                    worst = static_cast<int>(k);
                }
            }
            if (worst < 0) {
                res.ok = true;
                res.x = x;
                return res;
            }
            work.erase(work.begin() + worst);
            continue;
        }
        double alpha = 1.0;
        int blocking = -1;
        for (int i = 0; i < mu; ++i) {
            if (std::find(work.begin(), work.end(), i) != work.end()) continue;
            const double ap = A_ub.row(i).dot(p);
            if (ap > 1e-14 * row_scale(A_ub, i)) {
                const double step = (b_ub(i) - A_ub.row(i).dot(x)) / ap;
                if (step < alpha) {
                    alpha = std::max(step, 0.0);
                    blocking = i;
                }
            }
        }
        x += alpha * p;
        if (blocking >= 0) work.push_back(blocking);
    }
    res.x = x;
    return res;
}

}  // namespace whitney

#endif
