// Gaussian elimination with parameters: the sample set is partitioned by
// pivot history, and on every piece the system is reduced to echelon form
// with solved-row coefficients bounded by 2^k.
#ifndef WHITNEY_ELIMINATION_HPP
#define WHITNEY_ELIMINATION_HPP

#include "linalg.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace whitney {

using Point = std::vector<double>;

// sum_j C_ij(x) X_j = g_i(x), i < N, j < M, evaluated pointwise on the samples.
struct ParamLinearSystem {
    int N = 0;
    int M = 0;
    std::function<double(const Point&, int, int)> coeff;
    std::function<double(const Point&, int)> rhs;

    Matrix coeff_at(const Point& x) const {
        Matrix C(N, M);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < M; ++j) C(i, j) = coeff(x, i, j);
        return C;
    }
    Vector rhs_at(const Point& x) const {
        Vector g(N);
        for (int i = 0; i < N; ++i) g(i) = rhs(x, i);
        return g;
    }
};

// Coefficients below this magnitude are treated as vanishing.
inline constexpr double kZeroCoefficient = 1e-12;

// A system in k-echelon form on a set of sample points sharing one pivot history.
// Rows and columns are stored in current labels; row_of[r] / col_of[c] give the
// original equation / unknown. Each point keeps its augmented matrix [C | g].
struct WorkingPiece {
    std::vector<int> points;
    int k = 0;
    bool echelon = false;
    std::vector<int> row_of, col_of;
    std::vector<Matrix> augmented;
    std::vector<std::pair<int, int>> pivots;  // original (equation, unknown) per step
    double min_pivot = std::numeric_limits<double>::infinity();
    bool bound_ok = true;
};

struct EchelonPiece {
    std::vector<int> points;  // indices into the sample set
    int k = 0;
    std::vector<int> perm;    // perm[i] = original unknown in position i
    std::vector<int> row_perm;
    std::vector<Matrix> Atilde;  // per point, k x (M-k): coefficients of the free unknowns
    std::vector<Vector> gtilde;  // per point, length k
    std::vector<Vector> btilde;  // per point, length N-k: must vanish for consistency
    double min_pivot = 0.0;      // smallest raw pivot magnitude met (conditioning record)
    bool bound_ok = true;
};

namespace detail {

inline double solved_block_max(const Matrix& aug, int k, int M) {
    double worst = 0.0;
    for (int i = 0; i < k; ++i)
        for (int j = k; j < M; ++j) worst = std::max(worst, std::abs(aug(i, j)));
    return worst;
}

}  // namespace detail

// One elimination round on a k-echelon piece. Points whose remaining block
// vanishes form the echelon piece; the rest split by the first maximal pivot
// pair in row-major order.
inline std::vector<WorkingPiece> echelon_step(const WorkingPiece& in, int N, int M) {
    if (in.echelon || in.k >= std::min(N, M)) {
        WorkingPiece done = in;
        done.echelon = true;
        return {done};
    }
    const int k = in.k;
    std::map<std::pair<int, int>, WorkingPiece> split;
    std::optional<WorkingPiece> good;
    for (std::size_t p = 0; p < in.points.size(); ++p) {
        const Matrix& aug = in.augmented[p];
        double best = 0.0;
        int bi = -1, bj = -1;
        for (int i = k; i < N; ++i)
            for (int j = k; j < M; ++j)
                if (std::abs(aug(i, j)) > best) {
                    best = std::abs(aug(i, j));
                    bi = i;
                    bj = j;
                }
        if (best < kZeroCoefficient) {
            if (!good) {
                good = in;
                good->points.clear();
                good->augmented.clear();
                good->echelon = true;
            }
            good->points.push_back(in.points[p]);
            good->augmented.push_back(aug);
            continue;
        }
        auto it = split.find({bi, bj});
        if (it == split.end()) {
            WorkingPiece w = in;
            w.points.clear();
            w.augmented.clear();
            w.k = k + 1;
            std::swap(w.row_of[k], w.row_of[bi]);
            std::swap(w.col_of[k], w.col_of[bj]);
            w.pivots.push_back({in.row_of[bi], in.col_of[bj]});
            it = split.emplace(std::make_pair(bi, bj), std::move(w)).first;
        }
        WorkingPiece& w = it->second;
        Matrix a = aug;
        a.row(k).swap(a.row(bi));
        a.col(k).swap(a.col(bj));
        const double pivot = a(k, k);
        w.min_pivot = std::min(w.min_pivot, std::abs(pivot));
        a.row(k) /= pivot;
        a(k, k) = 1.0;
        for (int i = 0; i < N; ++i) {
            if (i == k) continue;
            const double f = a(i, k);
            if (f == 0.0) continue;
            for (int j = k + 1; j <= M; ++j) a(i, j) -= f * a(k, j);
            a(i, k) = 0.0;
        }
        if (detail::solved_block_max(a, k + 1, M) > std::ldexp(1.0, k + 1)) w.bound_ok = false;
        w.points.push_back(in.points[p]);
        w.augmented.push_back(std::move(a));
    }
    std::vector<WorkingPiece> out;
    if (good) out.push_back(std::move(*good));
    for (auto& [key, w] : split) out.push_back(std::move(w));
    return out;
}

inline std::vector<EchelonPiece> eliminate(const ParamLinearSystem& sys, const std::vector<Point>& samples) {
    const int N = sys.N, M = sys.M;
    WorkingPiece start;
    for (int i = 0; i < N; ++i) start.row_of.push_back(i);
    for (int j = 0; j < M; ++j) start.col_of.push_back(j);
    for (std::size_t p = 0; p < samples.size(); ++p) {
        start.points.push_back(static_cast<int>(p));
        Matrix aug(N, M + 1);
        if (N > 0) {
            aug.leftCols(M) = sys.coeff_at(samples[p]);
            aug.col(M) = sys.rhs_at(samples[p]);
        }
        start.augmented.push_back(std::move(aug));
    }
    std::vector<WorkingPiece> active{start}, finished;
    if (N == 0 || M == 0) {
        active.clear();
        start.echelon = true;
        finished.push_back(start);
    }
    // at most min(N, M) rounds
    for (int round = 0; round < std::min(N, M) && !active.empty(); ++round) {
        std::vector<WorkingPiece> next;
        for (const auto& w : active)
            for (auto& piece : echelon_step(w, N, M)) {
                if (piece.points.empty()) continue;
                if (piece.echelon || piece.k >= std::min(N, M)) {
                    piece.echelon = true;
                    finished.push_back(std::move(piece));
                } else {
                    next.push_back(std::move(piece));
                }
            }
        active = std::move(next);
    }
    for (auto& w : active) {
        w.echelon = true;
        finished.push_back(std::move(w));
    }

    std::vector<EchelonPiece> out;
    for (auto& w : finished) {
        if (w.points.empty() && !samples.empty()) continue;
        EchelonPiece e;
        e.points = w.points;
        e.k = w.k;
        e.perm = w.col_of;
        e.row_perm = w.row_of;
        e.min_pivot = std::isfinite(w.min_pivot) ? w.min_pivot : 0.0;
        e.bound_ok = w.bound_ok;
        for (const auto& a : w.augmented) {
            e.Atilde.push_back(a.block(0, e.k, e.k, M - e.k));
            e.gtilde.push_back(a.block(0, M, e.k, 1));
            e.btilde.push_back(a.block(e.k, M, N - e.k, 1));
            if (detail::solved_block_max(a, e.k, M) > std::ldexp(1.0, e.k)) e.bound_ok = false;
        }
        out.push_back(std::move(e));
    }
    return out;
}

struct EquivalenceReport {
    bool ok = true;
    int points_checked = 0;
    int inconsistent_points = 0;
    double worst_residual = 0.0;
    std::optional<Point> witness;
    std::string message;
};

// Pointwise comparison of each reduced system with a dense SVD solve of the original.
inline EquivalenceReport verify_equivalence(const ParamLinearSystem& sys, const std::vector<EchelonPiece>& pieces,
                                            const std::vector<Point>& samples, double tol = 1e-8) {
    EquivalenceReport rep;
    const int N = sys.N, M = sys.M;
    auto fail = [&](const Point& x, const std::string& why) {
        if (rep.ok) {
            rep.ok = false;
            rep.witness = x;
            rep.message = why;
        }
    };
    auto rel_residual = [](const Matrix& C, const Vector& X, const Vector& g) {
        if (C.rows() == 0) return 0.0;
        const double scale = C.norm() * X.norm() + g.norm();
        const double r = (C * X - g).norm();
        return scale == 0.0 ? r : r / scale;
    };
    std::vector<int> seen(samples.size(), 0);
    for (const auto& piece : pieces) {
        for (std::size_t p = 0; p < piece.points.size(); ++p) {
            const int idx = piece.points[p];
            ++seen[idx];
            const Point& x = samples[idx];
            const Matrix C = sys.coeff_at(x);
            const Vector g = sys.rhs_at(x);
            ++rep.points_checked;
            const int k = piece.k;
            const Matrix& At = piece.Atilde[p];
            const Vector& gt = piece.gtilde[p];
            const Vector& bt = piece.btilde[p];

            const double gscale = std::max(1.0, g.norm());
            const bool reduced_consistent = bt.size() == 0 || bt.cwiseAbs().maxCoeff() <= tol * gscale;
            AffineSolution dense = solve_affine(C, g, 1e-10, tol);
            if (!reduced_consistent) ++rep.inconsistent_points;
            if (reduced_consistent != dense.consistent) {
                fail(x, "consistency disagrees with the dense solve");
                continue;
            }
            if (!dense.consistent) continue;
            if (dense.rank != k) fail(x, "solution-set dimension disagrees with the dense rank");

            // full reduced matrix in original unknown labels: X_{perm i} + sum_j At_ij X_{perm(k+j)} = gt_i
            Matrix R = Matrix::Zero(k, M);
            for (int i = 0; i < k; ++i) {
                R(i, piece.perm[i]) = 1.0;
                for (int j = 0; j < M - k; ++j) R(i, piece.perm[k + j]) = At(i, j);
            }
            // dense solution satisfies the reduced system
            double worst = rel_residual(R, dense.offset, gt);
            // reduced particular solution and homogeneous directions satisfy the original
            Vector X0 = Vector::Zero(M);
            for (int i = 0; i < k; ++i) X0(piece.perm[i]) = gt(i);
            worst = std::max(worst, rel_residual(C, X0, g));
            for (int j = 0; j < M - k; ++j) {
                Vector v = Vector::Zero(M);
                v(piece.perm[k + j]) = 1.0;
                for (int i = 0; i < k; ++i) v(piece.perm[i]) = -At(i, j);
                worst = std::max(worst, rel_residual(C, v, Vector::Zero(N)));
            }
            rep.worst_residual = std::max(rep.worst_residual, worst);
            if (worst > tol) fail(x, "residual above tolerance");
        }
    }
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (seen[i] != 1) fail(samples[i], "pieces do not partition the sample set");
    return rep;
}

}  // namespace whitney

#endif
