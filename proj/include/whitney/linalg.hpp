// Dense linear-algebra helpers over Eigen: affine solution sets, kernels, angles.
#ifndef WHITNEY_LINALG_HPP
#define WHITNEY_LINALG_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace whitney {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Relative singular-value cutoff used for every numerical rank decision.
inline constexpr double kRankCutoff = 1e-8;

struct AffineSolution {
    bool consistent = true;
    Vector offset;       // minimum-norm least-squares solution
    Matrix kernel;       // orthonormal basis of the null space (columns)
    int rank = 0;
    double residual = 0; // |A x - b| at the offset
};

inline int numerical_rank(const Eigen::VectorXd& sv, double cutoff = kRankCutoff) {
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff * sv(0)) ++r;
    return r;
}

// Solve A x = b in the least-squares sense. The system is declared
// consistent when the residual is small relative to |b| and the scale of A.
inline AffineSolution solve_affine(const Matrix& A, const Vector& b, double cutoff = kRankCutoff, double consistency_tol = 1e-9) {
    const int cols = static_cast<int>(A.cols());
    AffineSolution out;
    if (A.rows() == 0) {
        out.offset = Vector::Zero(cols);
        out.kernel = Matrix::Identity(cols, cols);
        return out;
    }
    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    out.rank = numerical_rank(sv, cutoff);
    const Matrix& U = svd.matrixU();
    const Matrix& V = svd.matrixV();
    out.offset = Vector::Zero(cols);
    for (int i = 0; i < out.rank; ++i) out.offset += V.col(i) * (U.col(i).dot(b) / sv(i));
    out.kernel = V.rightCols(cols - out.rank);
    out.residual = (A * out.offset - b).norm();
    const double scale = std::max({1.0, b.norm(), sv.size() ? sv(0) : 0.0});
    out.consistent = out.residual <= consistency_tol * scale;
    return out;
}

// Orthonormal basis for the column span of G (columns with relative rank cutoff).
inline Matrix orthonormal_span(const Matrix& G, double cutoff = kRankCutoff) {
    if (G.cols() == 0 || G.rows() == 0) return Matrix(G.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(G, Eigen::ComputeThinU);
    const int r = numerical_rank(svd.singularValues(), cutoff);
    return svd.matrixU().leftCols(r);
}

// Orthonormal basis of the orthogonal complement of span(Q) in R^dim, Q orthonormal.
inline Matrix orthogonal_complement(const Matrix& Q, int dim) {
    if (Q.cols() == 0) return Matrix::Identity(dim, dim);
    Matrix P = Matrix::Identity(dim, dim) - Q * Q.transpose();
    return orthonormal_span(P, 1e-6);
}

// Largest principal angle (radians) between two subspaces with orthonormal bases.
inline double max_principal_angle(const Matrix& Q1, const Matrix& Q2) {
    if (Q1.cols() != Q2.cols()) return M_PI / 2;
    if (Q1.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(Q1.transpose() * Q2);
    const double smin = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
    return std::acos(smin);
}

// Distance from v to the affine set offset + span(Q), Q orthonormal.
inline double affine_distance(const Vector& v, const Vector& offset, const Matrix& Q) {
    Vector d = v - offset;
    if (Q.cols() > 0) d -= Q * (Q.transpose() * d);
    return d.norm();
}

inline Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }
inline std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace whitney

#endif
