// Affine jet fibers over finite point clouds, module closure, a discretized
// Glaeser refinement, and the finiteness certificate.
#ifndef WHITNEY_BUNDLES_HPP
#define WHITNEY_BUNDLES_HPP

#include "decay.hpp"
#include "jet.hpp"
#include "linalg.hpp"
#include "lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace whitney {

class BundleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Point = std::vector<double>;

enum class FiberFlag { empty, full, proper };

// offset + span(generators) in flat jet coordinates at the fiber's base point.
// Generators are kept orthonormal.
struct AffineFiber {
    FiberFlag flag = FiberFlag::full;
    Vector offset;
    Matrix generators;

    static AffineFiber full(int total_dim) {
        return {FiberFlag::full, Vector::Zero(total_dim), Matrix::Identity(total_dim, total_dim)};
    }
    static AffineFiber empty(int total_dim) { return {FiberFlag::empty, Vector::Zero(total_dim), Matrix(total_dim, 0)}; }
    static AffineFiber make(Vector offset, Matrix gens) {
        AffineFiber f{FiberFlag::proper, std::move(offset), orthonormal_span(gens)};
        f.refresh_flag();
        return f;
    }

    bool is_empty() const { return flag == FiberFlag::empty; }
    int total_dim() const { return static_cast<int>(offset.size()); }
    int dim() const { return is_empty() ? -1 : static_cast<int>(generators.cols()); }
    void refresh_flag() {
        if (flag == FiberFlag::empty) return;
        flag = generators.cols() == offset.size() ? FiberFlag::full : FiberFlag::proper;
        if (flag == FiberFlag::full) offset.setZero();
    }

    double distance(const Vector& v) const {
        if (is_empty()) return std::numeric_limits<double>::infinity();
        return affine_distance(v, offset, generators);
    }
};

// inner is contained in outer, up to tol
inline bool fiber_contains(const AffineFiber& outer, const AffineFiber& inner, double tol = 1e-8) {
    if (inner.is_empty()) return true;
    if (outer.is_empty()) return false;
    if (outer.distance(inner.offset) > tol * (1.0 + inner.offset.norm())) return false;
    for (int c = 0; c < inner.generators.cols(); ++c)
        if (affine_distance(inner.generators.col(c), Vector::Zero(outer.total_dim()), outer.generators) > tol) return false;
    return true;
}

// A linear functional on flat jet coordinates with its right-hand side.
struct JetConstraint {
    Vector functional;
    double rhs = 0.0;
};

inline AffineFiber fiber_from_constraints(const JetSpace& space, const std::vector<JetConstraint>& rows) {
    const int total = space.total_dim();
    if (rows.empty()) return AffineFiber::full(total);
    Matrix A(static_cast<int>(rows.size()), total);
    Vector b(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].functional.size() != total) throw BundleError("fiber_from_constraints: functional has wrong length");
        A.row(static_cast<int>(i)) = rows[i].functional.transpose();
        b(static_cast<int>(i)) = rows[i].rhs;
    }
    const AffineSolution sol = solve_affine(A, b);
    if (!sol.consistent) return AffineFiber::empty(total);
    AffineFiber f{FiberFlag::proper, sol.offset, sol.kernel};
    f.refresh_flag();
    return f;
}

// Matrix of multiplication by (x - base)^beta in flat Taylor coordinates at the base.
inline Matrix monomial_action(const JetSpace& s, const MultiIndex& beta) {
    const auto L = JetLayout::get(s.n, s.m);
    const int d = L->size();
    Matrix M = Matrix::Zero(s.total_dim(), s.total_dim());
    for (int i = 0; i < d; ++i) {
        MultiIndex a = L->at(i);
        for (int k = 0; k < s.n; ++k) a[k] += beta[k];
        if (order(a) > s.m) continue;
        const int t = L->find(a);
        for (int c = 0; c < s.D; ++c) M(c * d + t, c * d + i) = 1.0;
    }
    return M;
}

// Smallest submodule containing the generator span: close under every monomial
// (x - base)^beta, 0 < |beta| <= m.
inline AffineFiber module_closure(const AffineFiber& f, const JetSpace& space) {
    if (f.is_empty()) throw BundleError("module_closure: empty fiber");
    if (f.flag == FiberFlag::full) return f;
    const auto L = JetLayout::get(space.n, space.m);
    std::vector<Matrix> actions;
    for (int i = 1; i < L->size(); ++i) actions.push_back(monomial_action(space, L->at(i)));
    Matrix G = f.generators;
    for (int pass = 0; pass <= space.total_dim(); ++pass) {
        Matrix grown(G.rows(), G.cols() * (1 + static_cast<int>(actions.size())));
        grown.leftCols(G.cols()) = G;
        for (std::size_t a = 0; a < actions.size(); ++a) grown.middleCols(G.cols() * (a + 1), G.cols()) = actions[a] * G;
        Matrix next = orthonormal_span(grown);
        const bool stable = next.cols() == G.cols();
        G = next;
        if (stable) break;
    }
    AffineFiber out{FiberFlag::proper, f.offset, G};
    // keep the offset as the representative closest to the origin
    if (G.cols() > 0) out.offset = f.offset - G * (G.transpose() * f.offset);
    out.refresh_flag();
    return out;
}

struct SampledBundle {
    JetSpace space;
    std::vector<Point> points;
    std::vector<AffineFiber> fibers;

    int size() const { return static_cast<int>(points.size()); }
    SampledBundle restrict_to(const std::vector<int>& subset) const {
        SampledBundle out{space, {}, {}};
        for (int i : subset) {
            out.points.push_back(points.at(i));
            out.fibers.push_back(fibers.at(i));
        }
        return out;
    }
};

// Flat jet coordinates of a JetVector (component-major, graded-lex).
inline Vector flat_jet(const JetVector<double>& P) { return to_vector(P.flat()); }

// Matrix mapping flat coefficients at a base to the derivatives d^alpha of each
// component evaluated at base + h (rows: component-major, graded-lex alpha).
inline Matrix derivative_map(const JetSpace& s, const Point& h) {
    const auto L = JetLayout::get(s.n, s.m);
    const int d = L->size();
    Matrix B = Matrix::Zero(d, d);
    for (int a = 0; a < d; ++a) {
        const MultiIndex& al = L->at(a);
        for (int b = 0; b < d; ++b) {
            const MultiIndex& be = L->at(b);
            double v = 1.0;
            for (int k = 0; k < s.n && v != 0.0; ++k) {
                if (be[k] < al[k]) {
                    v = 0.0;
                    break;
                }
                for (int t = 0; t < al[k]; ++t) v *= (be[k] - t);
                v *= std::pow(h[k], be[k] - al[k]);
            }
            B(a, b) = v;
        }
    }
    Matrix M = Matrix::Zero(s.total_dim(), s.total_dim());
    for (int c = 0; c < s.D; ++c) M.block(c * d, c * d, d, d) = B;
    return M;
}

struct RefinementParams {
    int neighbors = -1;              // k; negative means 2 dim(P^D) + 1
    int ladder = 8;                  // number of radii
    double ratio = 0.5;              // radius ratio between consecutive rungs
    double decay_threshold = 0.25;   // slope above which a quantity "tends to 0"
    double min_octaves = 2.0;        // neighbor spread required to treat a point as an accumulation point
    double similarity_tol = 0.1;     // max Hausdorff gap between rescaled neighbor tuples on adjacent rungs
    double offset_tol = 1e-9;        // stability tolerance on offsets
    double rank_cutoff = 1e-10;      // relative cutoff for the neighbor least-squares solve
};

struct RefinementReport {
    int iterations = 0;
    std::vector<int> emptied_points;
    std::vector<int> fiber_dims_before, fiber_dims_after;
    std::vector<double> decay_fits;  // per point; NaN where the point was not refined
    std::vector<int> ill_conditioned;
    bool stable = false;
    bool cap_reached = false;
};

namespace detail {

inline double distance(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

// Whitney-quotient least-squares system over a tuple (x0 first).
// Rows are d^alpha(P_i - P_j)(x_i) / |x_i - x_j|^(m - |alpha|) for every ordered pair.
struct TupleSystem {
    Matrix A0;  // columns: generator coordinates at x0
    Matrix Ao;  // columns: generator coordinates at the neighbors
    Vector b;   // minus the offset contribution
};

inline TupleSystem tuple_system(const SampledBundle& bun, const std::vector<int>& tuple) {
    const JetSpace& s = bun.space;
    const int total = s.total_dim();
    const auto L = JetLayout::get(s.n, s.m);
    const int d = L->size();
    std::vector<int> col_start(tuple.size());
    int ncols = 0;
    for (std::size_t i = 0; i < tuple.size(); ++i) {
        col_start[i] = ncols;
        ncols += bun.fibers[tuple[i]].dim();
    }
    const int k1 = static_cast<int>(tuple.size());
    const int nrows = k1 * (k1 - 1) * total;
    Matrix A = Matrix::Zero(nrows, ncols);
    Vector b = Vector::Zero(nrows);
    const Matrix own = derivative_map(s, Point(s.n, 0.0));
    int row = 0;
    for (int i = 0; i < k1; ++i)
        for (int j = 0; j < k1; ++j) {
            if (i == j) continue;
            const Point& xi = bun.points[tuple[i]];
            const Point& xj = bun.points[tuple[j]];
            Point h(s.n);
            for (int q = 0; q < s.n; ++q) h[q] = xi[q] - xj[q];
            const double dist = distance(xi, xj);
            const Matrix other = derivative_map(s, h);
            Vector w(total);
            for (int c = 0; c < s.D; ++c)
                for (int a = 0; a < d; ++a) w(c * d + a) = 1.0 / std::pow(dist, s.m - order(L->at(a)));
            const AffineFiber& Fi = bun.fibers[tuple[i]];
            const AffineFiber& Fj = bun.fibers[tuple[j]];
            const Matrix Mi = w.asDiagonal() * own;
            const Matrix Mj = w.asDiagonal() * other;
            A.block(row, col_start[i], total, Fi.dim()) += Mi * Fi.generators;
            A.block(row, col_start[j], total, Fj.dim()) -= Mj * Fj.generators;
            b.segment(row, total) -= Mi * Fi.offset - Mj * Fj.offset;
            row += total;
        }
    TupleSystem out;
    const int g0 = bun.fibers[tuple[0]].dim();
    out.A0 = A.leftCols(g0);
    out.Ao = A.rightCols(ncols - g0);
    out.b = b;
    return out;
}

struct Reduced {
    Matrix A;  // residual map on x0 generator coordinates after optimizing the neighbors
    Vector b;
    bool ambiguous_rank = false;
    double raw_scale = 0.0;  // size of the system before elimination, for noise floors
};

inline Reduced eliminate_neighbors(const TupleSystem& t, double cutoff) {
    Reduced r{t.A0, t.b, false, 0.0};
    r.raw_scale = std::max({t.A0.size() ? t.A0.norm() : 0.0, t.Ao.size() ? t.Ao.norm() : 0.0, t.b.norm()});
    if (t.Ao.cols() == 0) return r;
    Vector norms = t.Ao.colwise().norm().transpose();
    Matrix scaled = t.Ao;
    for (int c = 0; c < scaled.cols(); ++c)
        if (norms(c) > 0) scaled.col(c) /= norms(c);
    Eigen::JacobiSVD<Matrix> svd(scaled, Eigen::ComputeThinU);
    const Vector& sv = svd.singularValues();
    const int rank = numerical_rank(sv, cutoff);
    for (int i = 0; i < sv.size(); ++i) {
        const double rel = sv(0) > 0 ? sv(i) / sv(0) : 0.0;
        if (rel > cutoff * 1e-2 && rel <= cutoff * 1e2) r.ambiguous_rank = true;
    }
    const Matrix U = svd.matrixU().leftCols(rank);
    r.A = t.A0 - U * (U.transpose() * t.A0);
    r.b = t.b - U * (U.transpose() * t.b);
    return r;
}

// Neighbor offsets rescaled by the rung radius.
inline std::vector<Point> normalized_tuple(const SampledBundle& b, const std::vector<int>& tuple, double r) {
    std::vector<Point> out;
    for (std::size_t i = 1; i < tuple.size(); ++i) {
        Point z(b.space.n);
        for (int q = 0; q < b.space.n; ++q) z[q] = (b.points[tuple[i]][q] - b.points[tuple[0]][q]) / r;
        out.push_back(z);
    }
    return out;
}

inline double hausdorff(const std::vector<Point>& a, const std::vector<Point>& b) {
    auto one_side = [](const std::vector<Point>& u, const std::vector<Point>& v) {
        double worst = 0.0;
        for (const auto& p : u) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : v) best = std::min(best, distance(p, q));
            worst = std::max(worst, best);
        }
        return worst;
    };
    if (a.empty() || b.empty()) return a.empty() && b.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    return std::max(one_side(a, b), one_side(b, a));
}

}  // namespace detail

// One pass of the refinement. Per accumulation point x0 the minimized Whitney
// seminorm over neighbor tuples is followed down a geometric radius ladder;
// generator directions whose residual map does not decay are pinned at the
// extrapolated minimizer, and the fiber empties when even the minimum fails to decay.
inline std::pair<SampledBundle, RefinementReport> glaeser_refine_once(const SampledBundle& b, const RefinementParams& params = {}) {
    if (b.points.empty()) throw BundleError("glaeser_refine_once: empty point set");
    const JetSpace& s = b.space;
    const int total = s.total_dim();
    const int k = params.neighbors > 0 ? params.neighbors : 2 * total + 1;
    const int T = params.ladder;
    SampledBundle out = b;
    RefinementReport rep;
    rep.iterations = 1;
    rep.decay_fits.assign(b.size(), std::numeric_limits<double>::quiet_NaN());
    for (const auto& f : b.fibers) rep.fiber_dims_before.push_back(f.dim());

    for (int p = 0; p < b.size(); ++p) {
        const AffineFiber& F0 = b.fibers[p];
        if (F0.is_empty()) continue;
        std::vector<std::pair<double, int>> nb;
        bool empty_nearby = false;
        for (int q = 0; q < b.size(); ++q) {
            if (q == p) continue;
            const double d = detail::distance(b.points[p], b.points[q]);
            if (d == 0.0) throw BundleError("glaeser_refine_once: duplicate points");
            nb.push_back({d, q});
        }
        std::sort(nb.begin(), nb.end());
        std::vector<std::pair<double, int>> live;
        for (const auto& e : nb)
            if (!b.fibers[e.second].is_empty()) live.push_back(e);
        const int keff = std::min<int>(k, static_cast<int>(live.size()));
        if (keff < 1) continue;
        const double d1 = live.front().first, dk = live[keff - 1].first;
        if (std::log2(dk / d1) < params.min_octaves) continue;  // isolated at the sampled scale
        for (const auto& e : nb)
            if (b.fibers[e.second].is_empty() && e.first <= dk * (1 + 1e-12)) empty_nearby = true;
        if (empty_nearby) {
            out.fibers[p] = AffineFiber::empty(total);
            continue;
        }
        const std::vector<double> radii = geometric_ladder(dk * std::pow(1.0 / params.ratio, T - 1), params.ratio, T);
        std::vector<std::vector<int>> tuples;
        for (double r : radii) {
            std::vector<int> inside;
            for (const auto& e : live)
                if (e.first <= r * (1 + 1e-12)) inside.push_back(e.second);
            // the k outermost points of the ball
            std::vector<int> tuple{p};
            const int take = std::min<int>(keff, static_cast<int>(inside.size()));
            for (int t = static_cast<int>(inside.size()) - take; t < static_cast<int>(inside.size()); ++t) tuple.push_back(inside[t]);
            tuples.push_back(std::move(tuple));
        }
        // An accumulation point sees the same neighbor configuration at every scale;
        // the last points of a finite geometric sequence do not.
        bool similar = true;
        for (int t = 0; t + 1 < T && similar; ++t)
            similar = detail::hausdorff(detail::normalized_tuple(b, tuples[t], radii[t]),
                                        detail::normalized_tuple(b, tuples[t + 1], radii[t + 1])) <= params.similarity_tol;
        if (!similar) continue;
        std::vector<detail::Reduced> reduced;
        bool ambiguous = false;
        for (const auto& tuple : tuples) {
            reduced.push_back(detail::eliminate_neighbors(detail::tuple_system(b, tuple), params.rank_cutoff));
            ambiguous = ambiguous || reduced.back().ambiguous_rank;
        }
        if (ambiguous) {
            rep.ill_conditioned.push_back(p);
            continue;
        }
        const int g0 = F0.dim();
        // minimizers and their residuals along the ladder
        std::vector<Vector> smin;
        std::vector<double> eps;
        std::vector<double> eps_floor;
        for (const auto& r : reduced) {
            eps_floor.push_back(1e-10 * (1.0 + r.raw_scale));
            Vector sm = Vector::Zero(g0);
            if (g0 > 0) sm = solve_affine(r.A, r.b, params.rank_cutoff).offset;
            smin.push_back(sm);
            eps.push_back((g0 > 0 ? Vector(r.A * sm - r.b) : Vector(-r.b)).norm());
        }
        for (int t = 0; t < T; ++t)
            if (eps[t] <= eps_floor[t]) eps[t] = 0.0;
        const DecayFit efit = fit_decay(radii, eps, 1e-300);
        rep.decay_fits[p] = efit.slope;
        if (!efit.exceeds(params.decay_threshold) && eps.back() > 0.0) {
            out.fibers[p] = AffineFiber::empty(total);
            continue;
        }
        if (g0 == 0) continue;
        // split x0 generator directions into decaying (free) and pinned ones
        Eigen::JacobiSVD<Matrix> svd(reduced.back().A, Eigen::ComputeFullV);
        const Matrix V = svd.matrixV();
        std::vector<int> free_dirs, pinned_dirs;
        for (int c = 0; c < g0; ++c) {
            std::vector<double> n;
            for (int t = 0; t < T; ++t) {
                const double v = (reduced[t].A * V.col(c)).norm();
                n.push_back(v <= 1e-10 * reduced[t].raw_scale ? 0.0 : v);
            }
            const DecayFit f = fit_decay(radii, n, 1e-300);
            (f.exceeds(params.decay_threshold) || n.back() == 0.0 ? free_dirs : pinned_dirs).push_back(c);
        }
        if (pinned_dirs.empty()) continue;
        Matrix Vp(g0, pinned_dirs.size()), Vf(g0, free_dirs.size());
        for (std::size_t i = 0; i < pinned_dirs.size(); ++i) Vp.col(i) = V.col(pinned_dirs[i]);
        for (std::size_t i = 0; i < free_dirs.size(); ++i) Vf.col(i) = V.col(free_dirs[i]);
        // Richardson step on the minimizer sequence, which is linear in the radius at leading order
        const Vector s_inf = 2.0 * smin[T - 1] - smin[T - 2];
        const Vector shift = Vp * (Vp.transpose() * s_inf);
        AffineFiber nf{FiberFlag::proper, F0.offset + F0.generators * shift, F0.generators * Vf};
        nf.refresh_flag();
        out.fibers[p] = nf;
    }
    for (int p = 0; p < out.size(); ++p) {
        rep.fiber_dims_after.push_back(out.fibers[p].dim());
        if (out.fibers[p].is_empty() && !b.fibers[p].is_empty()) rep.emptied_points.push_back(p);
    }
    return {out, rep};
}

inline bool same_bundle(const SampledBundle& a, const SampledBundle& b, double tol) {
    for (int p = 0; p < a.size(); ++p) {
        if (a.fibers[p].dim() != b.fibers[p].dim()) return false;
        if (a.fibers[p].is_empty()) continue;
        if ((a.fibers[p].offset - b.fibers[p].offset).norm() > tol * (1.0 + a.fibers[p].offset.norm())) return false;
    }
    return true;
}

inline std::pair<SampledBundle, RefinementReport> iterate_to_stability(const SampledBundle& b, int lstar_cap,
                                                                       const RefinementParams& params = {}) {
    if (lstar_cap < 1) throw BundleError("iterate_to_stability: cap must be at least 1");
    RefinementReport total;
    for (const auto& f : b.fibers) total.fiber_dims_before.push_back(f.dim());
    SampledBundle cur = b;
    for (int it = 1; it <= lstar_cap; ++it) {
        auto [next, rep] = glaeser_refine_once(cur, params);
        total.iterations = it;
        total.emptied_points.insert(total.emptied_points.end(), rep.emptied_points.begin(), rep.emptied_points.end());
        total.decay_fits = rep.decay_fits;
        for (int p : rep.ill_conditioned)
            if (std::find(total.ill_conditioned.begin(), total.ill_conditioned.end(), p) == total.ill_conditioned.end())
                total.ill_conditioned.push_back(p);
        const bool unchanged = same_bundle(cur, next, params.offset_tol);
        cur = std::move(next);
        if (unchanged) {
            total.stable = true;
            break;
        }
    }
    total.cap_reached = !total.stable;
    for (const auto& f : cur.fibers) total.fiber_dims_after.push_back(f.dim());
    std::sort(total.emptied_points.begin(), total.emptied_points.end());
    return {cur, total};
}

struct CertificateReport {
    bool holds = false;
    bool exhaustive = true;
    int tuples_checked = 0;
    bool looked_stable = true;            // one extra refinement pass changed nothing
    std::vector<int> failing_tuple;
    double worst_scaled_violation = 0.0;  // smallest achievable max-ratio on the worst tuple
};

namespace detail {

// min t such that some P_i in H(x_i) meets every bound scaled by t.
inline double tuple_feasibility(const SampledBundle& b, const std::vector<int>& tuple, double M) {
    const JetSpace& s = b.space;
    const int total = s.total_dim();
    const auto L = JetLayout::get(s.n, s.m);
    const int d = L->size();
    std::vector<int> start;
    int ncols = 0;
    for (int i : tuple) {
        start.push_back(ncols);
        ncols += b.fibers[i].dim();
    }
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> consts, bounds;
    const Matrix own = derivative_map(s, Point(s.n, 0.0));
    auto add_rows = [&](const Matrix& Mi, int i, const Matrix* Mj, int j, double scale_of_alpha_base, bool pair) {
        for (int r = 0; r < total; ++r) {
            Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(ncols);
            const AffineFiber& Fi = b.fibers[tuple[i]];
            row.segment(start[i], Fi.dim()) += Mi.row(r) * Fi.generators;
            double c = Mi.row(r).dot(Fi.offset);
            if (Mj) {
                const AffineFiber& Fj = b.fibers[tuple[j]];
                row.segment(start[j], Fj.dim()) -= Mj->row(r) * Fj.generators;
                c -= Mj->row(r).dot(Fj.offset);
            }
            double bound = M;
            if (pair) bound *= std::pow(scale_of_alpha_base, s.m - order(L->at(r % d)));
            rows.push_back(row);
            consts.push_back(c);
            bounds.push_back(bound);
        }
    };
    const int k1 = static_cast<int>(tuple.size());
    for (int i = 0; i < k1; ++i) add_rows(own, i, nullptr, -1, 1.0, false);
    for (int i = 0; i < k1; ++i)
        for (int j = 0; j < k1; ++j) {
            if (i == j) continue;
            const Point& xi = b.points[tuple[i]];
            const Point& xj = b.points[tuple[j]];
            Point h(s.n);
            for (int q = 0; q < s.n; ++q) h[q] = xj[q] - xi[q];
            // d^alpha (P_i - P_j)(x_j)
            const Matrix Mi = derivative_map(s, h);
            add_rows(Mi, i, &own, j, distance(xi, xj), true);
        }
    const int R = static_cast<int>(rows.size());
    Matrix A(R, ncols);
    Vector c(R), w(R);
    for (int r = 0; r < R; ++r) {
        A.row(r) = rows[r] / bounds[r];
        c(r) = consts[r] / bounds[r];
    }
    // least-squares candidate first
    Vector x = ncols > 0 ? solve_affine(A, -c).offset : Vector::Zero(0);
    const double ls = R ? (A * x + c).cwiseAbs().maxCoeff() : 0.0;
    if (ls <= 1.0 || ncols == 0) return ls;
    // minimize t subject to -t <= A x + c <= t
    LinearProgram lp;
    lp.c = Vector::Zero(ncols + 1);
    lp.c(ncols) = 1.0;
    lp.A_ub = Matrix::Zero(2 * R, ncols + 1);
    lp.b_ub = Vector(2 * R);
    lp.A_ub.topLeftCorner(R, ncols) = A;
    lp.A_ub.block(0, ncols, R, 1).setConstant(-1.0);
    lp.b_ub.head(R) = -c;
    lp.A_ub.bottomLeftCorner(R, ncols) = -A;
    lp.A_ub.block(R, ncols, R, 1).setConstant(-1.0);
    lp.b_ub.tail(R) = c;
    const LpResult res = solve_lp(lp);
    if (res.status != LpStatus::optimal) return ls;
    return std::min(ls, res.x(ncols));
}

}  // namespace detail

inline CertificateReport finiteness_certificate_report(const SampledBundle& b, double M, int khash,
                                                       std::uint64_t seed = 20240601, int max_tuples = 10000) {
    CertificateReport rep;
    for (const auto& f : b.fibers)
        if (f.is_empty()) return rep;
    {
        auto once = glaeser_refine_once(b);
        rep.looked_stable = same_bundle(b, once.first, 1e-9);
    }
    const int n = b.size();
    const int kk = std::min(khash, n);
    double count = 1.0;
    for (int i = 0; i < kk; ++i) count = count * (n - i) / (i + 1);
    std::vector<std::vector<int>> tuples;
    if (count <= max_tuples) {
        std::vector<int> idx(kk);
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            tuples.push_back(idx);
            int i = kk - 1;
            while (i >= 0 && idx[i] == n - kk + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int j = i + 1; j < kk; ++j) idx[j] = idx[j - 1] + 1;
        }
    } else {
        rep.exhaustive = false;
        std::mt19937_64 rng(seed);
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);
        for (int t = 0; t < max_tuples; ++t) {
            for (int i = 0; i < kk; ++i) std::swap(all[i], all[i + std::uniform_int_distribution<int>(0, n - 1 - i)(rng)]);
            std::vector<int> tup(all.begin(), all.begin() + kk);
            std::sort(tup.begin(), tup.end());
            tuples.push_back(tup);
        }
    }
    rep.holds = true;
    for (const auto& t : tuples) {
        const double v = detail::tuple_feasibility(b, t, M);
        ++rep.tuples_checked;
        if (v > rep.worst_scaled_violation) rep.worst_scaled_violation = v;
        if (v > 1.0 + 1e-9) {
            rep.holds = false;
            rep.failing_tuple = t;
            break;
        }
    }
    return rep;
}

inline bool finiteness_certificate(const SampledBundle& b, double M, int khash) {
    return finiteness_certificate_report(b, M, khash).holds;
}

}  // namespace whitney

#endif
