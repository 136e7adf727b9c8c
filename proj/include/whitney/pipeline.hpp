// The planar section synthesizer. Input is a wedge normal form: critical
// curves 0 = psi_0 < ... < psi_smax = x, a triangular linear system on each
// strip between consecutive curves, and linear conditions on the y-derivative
// traces along each curve. Output is a C^m field on a disc around the origin
// together with the numerical evidence collected on the way.
#ifndef WHITNEY_PIPELINE_HPP
#define WHITNEY_PIPELINE_HPP

#include "bundles.hpp"
#include "decay.hpp"
#include "helly.hpp"
#include "linalg.hpp"
#include "lp.hpp"
#include "patching.hpp"
#include "puiseux.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace whitney {

class PipelineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// On the strip between psi_(s-1) and psi_s:
//   F_perm[i] + sum_(j >= k) A[i][j-k] F_perm[j] = phi[i],   i < k.
struct StripSystem {
    int k = 0;
    std::vector<int> perm;                    // component order, the k solved-for components first
    std::vector<std::vector<FieldPiece>> A;   // k x (D - k)
    std::vector<FieldPiece> phi;              // k
};

// sum_(c, l) theta[c * (m+1) + l](x) d_y^l F_c(x, psi_s(x)) = g(x)
struct CurveRow {
    std::vector<Puiseux> theta;
    Puiseux g;
};

struct WedgeNormalForm {
    std::string name;
    int D = 1;
    int m = 1;
    CurveLadder ladder;                              // psi_0 .. psi_smax
    std::vector<StripSystem> strips;                 // strips[s-1] lives between psi_(s-1) and psi_s
    std::vector<std::vector<CurveRow>> curve_rows;   // one list per curve
    bool origin_zero = true;                         // the fiber at the origin is {0}

    int smax() const { return static_cast<int>(ladder.curves.size()) - 1; }
    int unknowns() const { return (smax() + 1) * D * (m + 1); }
    int index(int s, int c, int l) const { return (s * D + c) * (m + 1) + l; }
};

// Structural checks plus curve-ladder validation; returns the validated radius.
inline double validate_normal_form(const WedgeNormalForm& nf) {
    if (nf.D < 1 || nf.m < 0) throw PipelineError("normal form: need D >= 1 and m >= 0");
    if (nf.smax() < 1) throw PipelineError("normal form: need at least two curves");
    if (!nf.origin_zero) throw PipelineError("normal form: the fiber at the origin must be {0}");
    if (!(nf.ladder.curves.front() == Puiseux())) throw PipelineError("normal form: the first curve must be y = 0");
    if (!(nf.ladder.curves.back() == Puiseux::identity())) throw PipelineError("normal form: the last curve must be y = x");
    if (static_cast<int>(nf.strips.size()) != nf.smax()) throw PipelineError("normal form: need one strip system per strip");
    if (static_cast<int>(nf.curve_rows.size()) != nf.smax() + 1) throw PipelineError("normal form: need one row list per curve");
    for (int s = 0; s < nf.smax(); ++s) {
        const auto& S = nf.strips[s];
        const std::string where = "strip " + std::to_string(s + 1);
        if (S.k < 0 || S.k > nf.D) throw PipelineError(where + ": k out of range");
        std::vector<int> p = S.perm;
        std::sort(p.begin(), p.end());
        for (int c = 0; c < nf.D; ++c)
            if (static_cast<int>(p.size()) != nf.D || p[c] != c) throw PipelineError(where + ": perm is not a permutation");
        if (static_cast<int>(S.A.size()) != S.k || static_cast<int>(S.phi.size()) != S.k) throw PipelineError(where + ": A/phi shape");
        for (const auto& row : S.A)
            if (static_cast<int>(row.size()) != nf.D - S.k) throw PipelineError(where + ": A row length");
    }
    for (const auto& rows : nf.curve_rows)
        for (const auto& r : rows)
            if (static_cast<int>(r.theta.size()) != nf.D * (nf.m + 1)) throw PipelineError("curve row: theta has wrong length");
    const auto v = curve_ladder_validate(nf.ladder);
    if (!v.valid) throw PipelineError("normal form: " + v.reason);
    return v.delta_refined;
}

// Probe check of |d^alpha A|, |d^alpha phi| <= C dist^(-|alpha|) near both
// curves bounding each strip: the scaled derivatives must not grow along a
// ladder approaching the curve.
struct EstimateReport {
    bool ok = true;
    double worst_growth = 0.0;  // most negative fitted exponent of the scaled derivative
    std::string message;
};

inline EstimateReport certify_strip_estimates(const WedgeNormalForm& nf, double delta, int order_cap = -1) {
    EstimateReport rep;
    const int top = order_cap >= 0 ? order_cap : nf.m;
    const auto& layout = *JetLayout::get(2, top);
    const auto dists = geometric_ladder(0.25, 0.5, 10);
    for (int s = 1; s <= nf.smax(); ++s) {
        const auto& S = nf.strips[s - 1];
        std::vector<std::pair<std::string, FieldPiece>> coeffs;
        for (int i = 0; i < S.k; ++i) {
            coeffs.push_back({"phi[" + std::to_string(i) + "]", S.phi[i]});
            for (int j = 0; j < nf.D - S.k; ++j) coeffs.push_back({"A[" + std::to_string(i) + "][" + std::to_string(j) + "]", S.A[i][j]});
        }
        for (const auto& [label, f] : coeffs)
            for (double x : {0.5 * delta, 0.2 * delta})
                for (int side = 0; side < 2; ++side) {
                    const double lo = nf.ladder.curves[s - 1].evaluate(x), hi = nf.ladder.curves[s].evaluate(x);
                    const double w = hi - lo;
                    std::vector<Jet<double>> jets;
                    std::vector<double> radii;
                    for (double d : dists) {
                        const double y = side == 0 ? lo + d * w : hi - d * w;
                        jets.push_back(f.jet_at({x, y}, top));
                        radii.push_back(d * w);
                    }
                    for (std::size_t a = 1; a < layout.indices().size(); ++a) {
                        std::vector<double> vals, scales(radii.size(), 0.0);
                        for (std::size_t t = 0; t < jets.size(); ++t)
                            vals.push_back(jets[t].derivative_at_base(layout.indices()[a]) * std::pow(radii[t], order(layout.indices()[a])));
                        const auto fit = fit_with_noise(radii, vals, scales);
                        if (fit.all_zero) continue;
                        rep.worst_growth = std::min(rep.worst_growth, fit.slope);
                        if (fit.slope < -0.1 && rep.ok) {
                            rep.ok = false;
                            rep.message = "strip " + std::to_string(s) + " " + label + ": derivative " + alpha_string(layout.indices()[a]) +
                                          " blows up faster than dist^-|alpha|";
                        }
                    }
                }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Sparse fitting of sampled one-variable functions by sums of powers x^(q/N).

struct PuiseuxFit {
    Puiseux series;
    int N = 1;
    double relative_residual = 0.0;
    bool ok = false;
};

namespace detail {

struct PowerFit {
    std::vector<std::pair<std::int64_t, double>> terms;  // (q, coefficient) for x^(q/N)
    int N = 1;
    double relative_residual = std::numeric_limits<double>::infinity();
    bool ok = false;
};

// Exponent of the smallest-x behavior, read off the three smallest samples.
inline double lead_exponent(const std::vector<double>& xs, const std::vector<double>& vals) {
    std::vector<std::pair<double, double>> pts;
    double vmax = 0.0;
    for (double v : vals) vmax = std::max(vmax, std::abs(v));
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (std::abs(vals[i]) > 1e-13 * vmax) pts.push_back({xs[i], std::abs(vals[i])});
    std::sort(pts.begin(), pts.end());
    if (pts.size() < 3) return 0.0;
    return std::log(pts[2].second / pts[0].second) / std::log(pts[2].first / pts[0].first);
}

// Least squares on the full window of exponents around the leading one,
// then backward elimination: drop the term whose removal costs least while
// the fit stays within tol. Sparse survivors (at most max_terms) are accepted.
inline PowerFit power_fit(const std::vector<double>& xs, const std::vector<double>& vals, int N, double tol, int max_terms = 6) {
    PowerFit out;
    out.N = N;
    const Vector v = to_vector(vals);
    const double vn = v.norm();
    if (vn == 0.0) {
        out.relative_residual = 0.0;
        out.ok = true;
        return out;
    }
    const double lead = lead_exponent(xs, vals);
    const std::int64_t q0 = static_cast<std::int64_t>(std::floor(lead * N + 1e-6)) - N;
    const int rows = static_cast<int>(xs.size());
    const int terms = std::min(rows - 4, 5 * N + 1);
    Matrix B(rows, terms);
    for (int i = 0; i < rows; ++i)
        for (int t = 0; t < terms; ++t) B(i, t) = std::pow(xs[i], static_cast<double>(q0 + t) / N);
    for (int t = 0; t < terms; ++t) B.col(t) /= B.col(t).norm();
    auto solve = [&](const std::vector<int>& set, Vector& coef) {
        Matrix K(rows, static_cast<int>(set.size()));
        for (std::size_t k = 0; k < set.size(); ++k) K.col(static_cast<int>(k)) = B.col(set[k]);
        coef = K.completeOrthogonalDecomposition().solve(v);
        return (v - K * coef).norm() / vn;
    };
    std::vector<int> set(terms);
    for (int t = 0; t < terms; ++t) set[t] = t;
    Vector coef;
    out.relative_residual = solve(set, coef);
    if (out.relative_residual > tol) return out;
    // removals must keep the fit near the full-window level, not merely under tol
    const double keep = std::min(tol, std::max(100.0 * out.relative_residual, 1e-3 * tol));
    while (!set.empty()) {
        double best = std::numeric_limits<double>::infinity();
        int drop = -1;
        Vector c;
        for (std::size_t k = 0; k < set.size(); ++k) {
            auto trial = set;
            trial.erase(trial.begin() + static_cast<long>(k));
            const double r = trial.empty() ? 1.0 : solve(trial, c);
            if (r < best) {
                best = r;
                drop = static_cast<int>(k);
            }
        }
        if (best > keep) break;
        set.erase(set.begin() + drop);
    }
    out.relative_residual = solve(set, coef);
    out.ok = out.relative_residual <= tol && static_cast<int>(set.size()) <= max_terms;
    for (std::size_t k = 0; k < set.size(); ++k) {
        const int t = set[k];
        double nrm = 0.0;
        for (int i = 0; i < rows; ++i) nrm += std::pow(xs[i], 2.0 * static_cast<double>(q0 + t) / N);
        out.terms.push_back({q0 + t, coef(static_cast<int>(k)) / std::sqrt(nrm)});
    }
    return out;
}

// On a geometric ladder x_i = x_0 rho^i a sum of powers c_k x^(e_k) is a sum
// of exponentials in i, so the matrix pencil of the sample Hankel matrix
// returns rho^(e_k). Exponents are then rounded to q/N and the coefficients
// refitted.
inline std::optional<PowerFit> pencil_fit(const std::vector<double>& xs, const std::vector<double>& vals, int max_N, double tol) {
    const int n = static_cast<int>(xs.size());
    if (n < 8) return std::nullopt;
    const double rho = xs[1] / xs[0];
    for (int i = 1; i < n; ++i)
        if (std::abs(xs[i] / xs[i - 1] - rho) > 1e-10 * rho) return std::nullopt;
    const Vector v = to_vector(vals);
    const double vn = v.norm();
    const int L = n / 2;
    Matrix Y(n - L, L + 1);
    for (int i = 0; i < n - L; ++i)
        for (int j = 0; j <= L; ++j) Y(i, j) = v(i + j);
    Eigen::JacobiSVD<Matrix> svd(Y, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    int K = 0;
    while (K < sv.size() && sv(K) > 1e-11 * sv(0)) ++K;
    if (K == 0 || K > 8 || K >= L) return std::nullopt;
    const Matrix VK = svd.matrixV().leftCols(K);
    const Matrix V1 = VK.topRows(L), V2 = VK.bottomRows(L);
    const Matrix P = V1.completeOrthogonalDecomposition().solve(V2);
    Eigen::EigenSolver<Matrix> es(P.transpose());
    std::vector<std::pair<std::int64_t, int>> exps;  // (q, N)
    int Nall = 1;
    for (int k = 0; k < K; ++k) {
        const auto z = es.eigenvalues()(k);
        if (std::abs(z.imag()) > 1e-6 * std::abs(z) || z.real() <= 0) return std::nullopt;
        const double e = std::log(z.real()) / std::log(rho);
        bool found = false;
        for (int N = 1; N <= max_N && !found; ++N) {
            const double q = std::round(e * N);
            if (std::abs(e - q / N) <= 1e-4 * (1 + std::abs(e))) {
                exps.push_back({static_cast<std::int64_t>(q), N});
                Nall = std::lcm(Nall, N);
                found = true;
            }
        }
        if (!found) return std::nullopt;
    }
    PowerFit out;
    out.N = Nall;
    std::vector<std::int64_t> qs;
    for (const auto& [q, N] : exps) qs.push_back(q * (Nall / N));
    std::sort(qs.begin(), qs.end());
    qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
    Matrix B(n, static_cast<int>(qs.size()));
    for (int i = 0; i < n; ++i)
        for (std::size_t k = 0; k < qs.size(); ++k) B(i, static_cast<int>(k)) = std::pow(xs[i], static_cast<double>(qs[k]) / Nall);
    const Vector coef = B.colPivHouseholderQr().solve(v);
    out.relative_residual = (v - B * coef).norm() / vn;
    out.ok = out.relative_residual <= tol;
    for (std::size_t k = 0; k < qs.size(); ++k)
        if (coef(static_cast<int>(k)) != 0.0) out.terms.push_back({qs[k], coef(static_cast<int>(k))});
    return out;
}

inline PowerFit power_expansion(const std::vector<double>& xs, const std::vector<double>& vals, int max_N, double tol) {
    if (to_vector(vals).norm() > 0)
        if (auto pf = pencil_fit(xs, vals, max_N, tol); pf && pf->ok) return *pf;
    PowerFit best;
    for (int N = 1; N <= max_N; ++N) {
        auto f = power_fit(xs, vals, N, tol);
        if (f.ok) return f;
        if (f.relative_residual < best.relative_residual) best = f;
    }
    return best;
}

// Snap c to a nearby rational with a small denominator when that changes it
// by less than a relative 1e-9; otherwise keep the exact binary value.
inline rational snap_rational(double c) {
    if (c == 0.0) return rational(0);
    for (int den = 1; den <= 720; ++den) {
        const double num = std::round(c * den);
        if (std::abs(num / den - c) <= 1e-9 * std::abs(c) && std::abs(num) < 1e15)
            return rational(static_cast<long long>(num), den);
    }
    return rational(c);
}

}  // namespace detail

inline PuiseuxFit fit_puiseux(const std::vector<double>& xs, const std::vector<double>& vals, int max_N = 8, double tol = 1e-9) {
    const auto pf = detail::power_expansion(xs, vals, max_N, tol);
    PuiseuxFit f;
    f.N = pf.N;
    f.series = Puiseux(pf.N);
    for (const auto& [q, c] : pf.terms) f.series.add_term(q, detail::snap_rational(c));
    f.series = f.series.canonical();
    f.N = f.series.N();
    const double vn = to_vector(vals).norm();
    double rs = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) rs += std::pow(f.series.evaluate(xs[i]) - vals[i], 2);
    f.relative_residual = vn > 0 ? std::sqrt(rs) / vn : std::sqrt(rs);
    f.ok = vn > 0 ? f.relative_residual <= tol : true;
    return f;
}

// ---------------------------------------------------------------------------
// Axis bundles. Coordinates on the transversal jet space are the Taylor
// coefficients at ybar = 0 of p_1..p_jmax, q_1..q_imax (each of degree m).

struct AxisBundleSpec {
    int m = 1;
    int jmax = 0;
    int imax = 0;
    std::vector<std::vector<FieldPiece>> A;  // imax x jmax, functions of (xbar, ybar)
    std::vector<FieldPiece> B;               // imax
    Puiseux width;                           // probes live in 0 < ybar < (2/3) width(xbar)
    int probes = 12;
    double probe_ratio = 0.5;

    int dim() const { return (jmax + imax) * (m + 1); }
    int p_index(int j, int b) const { return j * (m + 1) + b; }
    int q_index(int i, int b) const { return (jmax + i) * (m + 1) + b; }
    double probe(double xbar, int t) const { return (2.0 / 3.0) * width.evaluate(xbar) * std::pow(probe_ratio, t); }
};

// Strip s seen from curve psi_s ('+', ybar = psi_s - y) or from psi_(s-1)
// ('-', ybar = y - psi_(s-1)). The solved-for components play the role of q,
// so the coefficients are A -> -A and B -> phi.
inline AxisBundleSpec axis_spec(const WedgeNormalForm& nf, int s, char side) {
    const auto& S = nf.strips.at(s - 1);
    AxisBundleSpec spec;
    spec.m = nf.m;
    spec.jmax = nf.D - S.k;
    spec.imax = S.k;
    spec.width = nf.ladder.curves[s] - nf.ladder.curves[s - 1];
    const Puiseux curve = side == '+' ? nf.ladder.curves[s] : nf.ladder.curves[s - 1];
    const double sign = side == '+' ? -1.0 : 1.0;
    auto moved = [curve, sign](const FieldPiece& f, double scale) {
        return FieldPiece{'w', [f, curve, sign, scale](const Jet<double>& X, const Jet<double>& Yb) {
                              return f.eval(X, curve.compose(X) + Yb * sign) * scale;
                          }};
    };
    for (int i = 0; i < S.k; ++i) {
        std::vector<FieldPiece> row;
        for (int j = 0; j < spec.jmax; ++j) row.push_back(moved(S.A[i][j], -1.0));
        spec.A.push_back(row);
        spec.B.push_back(moved(S.phi[i], 1.0));
    }
    return spec;
}

namespace detail {

inline Jet<double> axis_eval(const FieldPiece& f, double xbar, double ybar, int m) {
    const auto Y = Jet<double>::coordinate(1, m, {ybar}, 0);
    const auto X = Jet<double>::constant(1, m, {ybar}, xbar);
    return f.eval(X, Y);
}

inline bool finite_jet(const Jet<double>& J) {
    for (double c : J.coeffs())
        if (!std::isfinite(c)) return false;
    return true;
}

}  // namespace detail

// Rows (i, a) of ybar^(a-m) d^a { sum_j A_ij p_j + B_i - q_i }(xbar, ybar) as M u + b.
inline std::pair<Matrix, Vector> axis_defect(const AxisBundleSpec& spec, double xbar, double ybar) {
    const int m = spec.m;
    Matrix M = Matrix::Zero(spec.imax * (m + 1), spec.dim());
    Vector b = Vector::Zero(spec.imax * (m + 1));
    const auto Y = Jet<double>::coordinate(1, m, {ybar}, 0);
    std::vector<Jet<double>> mono;
    for (int e = 0; e <= m; ++e) mono.push_back(integer_power(Y, e));
    for (int i = 0; i < spec.imax; ++i) {
        const auto TB = detail::axis_eval(spec.B[i], xbar, ybar, m);
        for (int a = 0; a <= m; ++a) {
            const double w = std::pow(ybar, a - m) * static_cast<double>(factorial(a));
            const int row = i * (m + 1) + a;
            b(row) = w * TB[a];
            for (int e = 0; e <= m; ++e) M(row, spec.q_index(i, e)) = -w * mono[e][a];
            for (int j = 0; j < spec.jmax; ++j) {
                const auto TA = detail::axis_eval(spec.A[i][j], xbar, ybar, m);
                for (int e = 0; e <= m; ++e) M(row, spec.p_index(j, e)) = w * TA.multiply(mono[e])[a];
            }
        }
    }
    return {M, b};
}

struct AxisFiber {
    AffineFiber fiber;
    Matrix lambda;      // fiber = { u : lambda u = lambda_rhs }
    Vector lambda_rhs;
    bool exact = true;  // regular coefficients: Taylor route
};

// Fiber of jets whose scaled defect tends to zero as ybar -> 0+.
inline AxisFiber axis_fiber(const AxisBundleSpec& spec, double xbar) {
    if (spec.probes < 6) throw PipelineError("build_axis_bundle: probe ladder too short (need at least 6 probes)");
    const int m = spec.m, dim = spec.dim();
    AxisFiber out;
    if (spec.imax == 0) {
        out.fiber = AffineFiber::full(dim);
        out.lambda = Matrix(0, dim);
        out.lambda_rhs = Vector(0);
        return out;
    }
    // Taylor route: coefficients with finite jets at ybar = 0.
    bool regular = true;
    std::vector<std::vector<Jet<double>>> TA(spec.imax);
    std::vector<Jet<double>> TB;
    try {
        for (int i = 0; i < spec.imax && regular; ++i) {
            TB.push_back(detail::axis_eval(spec.B[i], xbar, 0.0, m));
            regular = regular && detail::finite_jet(TB.back());
            for (int j = 0; j < spec.jmax && regular; ++j) {
                TA[i].push_back(detail::axis_eval(spec.A[i][j], xbar, 0.0, m));
                regular = regular && detail::finite_jet(TA[i].back());
            }
        }
    } catch (const std::exception&) {
        regular = false;
    }
    if (regular) {
        Matrix R = Matrix::Zero(spec.imax * (m + 1), dim);
        Vector r = Vector::Zero(spec.imax * (m + 1));
        for (int i = 0; i < spec.imax; ++i)
            for (int a = 0; a <= m; ++a) {
                const int row = i * (m + 1) + a;
                r(row) = -TB[i][a];
                R(row, spec.q_index(i, a)) = -1.0;
                for (int j = 0; j < spec.jmax; ++j)
                    for (int e = 0; e <= a; ++e) R(row, spec.p_index(j, e)) += TA[i][j][a - e];
            }
        const auto sol = solve_affine(R, r);
        out.fiber = sol.consistent ? AffineFiber{FiberFlag::proper, sol.offset, sol.kernel} : AffineFiber::empty(dim);
        out.fiber.refresh_flag();
        out.lambda = R;
        out.lambda_rhs = r;
        return out;
    }

    // Probe-ladder surrogate. Each defect entry is expanded in powers of
    // ybar; the coefficients of non-positive powers must cancel.
    out.exact = false;
    std::vector<double> ys;
    std::vector<Matrix> Ms;
    std::vector<Vector> bs;
    for (int t = 1; t <= spec.probes; ++t) {
        ys.push_back(spec.probe(xbar, t));
        auto [M, b] = axis_defect(spec, xbar, ys.back());
        Ms.push_back(M);
        bs.push_back(b);
    }
    const int rows = static_cast<int>(Ms.front().rows());
    // (row, exponent) -> coefficients on u and the constant
    std::map<std::pair<int, std::int64_t>, Vector> pinned;
    constexpr std::int64_t kGrid = 840;  // common denominator for exponents
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c <= dim; ++c) {
            std::vector<double> vals;
            for (std::size_t t = 0; t < Ms.size(); ++t) vals.push_back(c < dim ? Ms[t](r, c) : bs[t](r));
            auto pf = detail::power_expansion(ys, vals, 8, 1e-9);
            if (!pf.ok) {
                // not of power type: keep it whole when it fails to decay
                const auto fit = fit_decay(ys, vals, 0.0);
                pf.terms.clear();
                pf.N = 1;
                if (fit.slope <= 0.25) pf.terms.push_back({0, vals.back()});
            }
            for (const auto& [q, coef] : pf.terms) {
                if (q > 0) continue;
                const std::int64_t key = q * (kGrid / pf.N);
                auto& row = pinned[{r, key}];
                if (row.size() == 0) row = Vector::Zero(dim + 1);
                row(c) += coef;
            }
        }
    Matrix R(static_cast<int>(pinned.size()), dim);
    Vector rhs(static_cast<int>(pinned.size()));
    int k = 0;
    for (const auto& [key, row] : pinned) {
        const double nrm = std::max(row.head(dim).norm(), 1e-300);
        R.row(k) = row.head(dim).transpose() / nrm;
        rhs(k) = -row(dim) / nrm;
        ++k;
    }
    const auto sol = solve_affine(R, rhs, kRankCutoff, 1e-7);
    if (!sol.consistent) {
        out.fiber = AffineFiber::empty(dim);
        out.lambda = R;
        out.lambda_rhs = rhs;
        return out;
    }
    out.fiber = AffineFiber{FiberFlag::proper, sol.offset, sol.kernel};
    out.fiber.refresh_flag();
    const Matrix C = orthogonal_complement(sol.kernel, dim);
    out.lambda = C.transpose();
    out.lambda_rhs = C.transpose() * sol.offset;
    return out;
}

struct AxisBundle {
    SampledBundle bundle;          // 1-D jets over {(xbar, 0)}; the origin carries {0}
    std::vector<AxisFiber> fibers; // aligned with bundle points after the origin
};

inline AxisBundle build_axis_bundle(const AxisBundleSpec& spec, const std::vector<double>& xbars) {
    AxisBundle out;
    out.bundle.space = JetSpace(1, spec.m, spec.jmax + spec.imax);
    out.bundle.points.push_back({0.0});
    out.bundle.fibers.push_back(AffineFiber{FiberFlag::proper, Vector::Zero(spec.dim()), Matrix(spec.dim(), 0)});
    for (double xb : xbars) {
        out.fibers.push_back(axis_fiber(spec, xb));
        out.bundle.points.push_back({xb});
        out.bundle.fibers.push_back(out.fibers.back().fiber);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sample heights.

struct HeightSelection {
    std::vector<int> levels;           // probe levels t, heights (2/3) width ratio^t
    std::vector<Puiseux> heights;
    std::vector<double> constants;     // verified domination constant per xbar
    double worst_ratio = 1.0;
    bool heights_valid = true;         // 0 < y_sigma < width <= x on the ladder
    bool derivative_bounds = true;     // |(d/dx)^a y_sigma| <= C x^(1-a)
};

inline SeminormFamily height_family(const AxisBundleSpec& spec, const AxisFiber& af, double xbar) {
    // R . H(xbar) spanned by (generator, 0) columns and (offset, 1)
    const int dim = spec.dim();
    const int g = af.fiber.dim();
    Matrix hull = Matrix::Zero(dim + 1, g + 1);
    if (g > 0) hull.topLeftCorner(dim, g) = af.fiber.generators;
    hull.block(0, g, dim, 1) = af.fiber.offset;
    hull(dim, g) = 1.0;
    SeminormFamily fam;
    fam.dim = g + 1;
    fam.mode = SeminormMode::max_abs;
    for (int t = 1; t <= spec.probes; ++t) {
        auto [M, b] = axis_defect(spec, xbar, spec.probe(xbar, t));
        Matrix Mb(M.rows(), dim + 1);
        Mb.leftCols(dim) = M;
        Mb.col(dim) = b;
        fam.members.emplace_back(Mb * hull);
    }
    return fam;
}

inline HeightSelection select_sample_heights(const AxisBundleSpec& spec, const AxisBundle& axis, const std::vector<double>& xbars,
                                             const SelectionParams& params = {}) {
    HeightSelection out;
    if (spec.imax == 0) return out;
    std::set<int> levels;
    for (std::size_t k = 0; k < xbars.size(); ++k) {
        const auto& af = axis.fibers[k];
        if (af.fiber.is_empty()) throw PipelineError("select_sample_heights: empty axis fiber at xbar = " + std::to_string(xbars[k]));
        const auto fam = height_family(spec, af, xbars[k]);
        const auto sel = select_representatives(fam, params);
        const auto dom = verify_domination(fam, sel, 2000, params.seed + k);
        out.worst_ratio = std::max(out.worst_ratio, dom.worst_ratio);
        if (!dom.ok)
            throw PipelineError("select_sample_heights: domination fails at xbar = " + std::to_string(xbars[k]) +
                                ", worst ratio " + std::to_string(dom.worst_ratio));
        out.constants.push_back(sel.C);
        for (int i : sel.indices) levels.insert(i + 1);
    }
    for (int t : levels) {
        out.levels.push_back(t);
        rational c(2, 3);
        for (int k = 0; k < t; ++k) c *= rational(spec.probe_ratio);
        out.heights.push_back(c * spec.width);
    }
    for (const auto& h : out.heights)
        for (double x : xbars) {
            const double y = h.evaluate(x), w = spec.width.evaluate(x);
            out.heights_valid = out.heights_valid && 0 < y && y < w && w <= x * (1 + 1e-12);
        }
    for (const auto& h : out.heights)
        for (int a = 0; a <= spec.m + 2; ++a) {
            std::vector<double> scaled;
            for (double x : xbars) scaled.push_back(std::abs(h.derivative_value(a, x)) * std::pow(x, a - 1));
            std::vector<double> noise(scaled.size(), 0.0);
            const auto fit = fit_with_noise(xbars, scaled, noise);
            out.derivative_bounds = out.derivative_bounds && fit.exceeds(-0.05);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Trace functionals on one strip side at one xbar.

struct TraceFunctionals {
    Matrix lambda;  // exact: lambda u = lambda_rhs
    Vector lambda_rhs;
    Matrix mu;      // asymptotic: mu u + mu_const -> 0
    Vector mu_const;
    bool fiber_empty = false;
};

inline TraceFunctionals build_trace_functionals(const AxisBundleSpec& spec, const AxisFiber& af, const HeightSelection& hs, double xbar) {
    TraceFunctionals tf;
    tf.fiber_empty = af.fiber.is_empty();
    tf.lambda = af.lambda;
    tf.lambda_rhs = af.lambda_rhs;
    const int rows = static_cast<int>(hs.heights.size()) * spec.imax * (spec.m + 1);
    tf.mu = Matrix::Zero(rows, spec.dim());
    tf.mu_const = Vector::Zero(rows);
    int r = 0;
    for (const auto& h : hs.heights) {
        auto [M, b] = axis_defect(spec, xbar, h.evaluate(xbar));
        tf.mu.middleRows(r, M.rows()) = M;
        tf.mu_const.segment(r, b.size()) = b;
        r += static_cast<int>(M.rows());
    }
    return tf;
}

// ---------------------------------------------------------------------------
// Constraint assembly in the trace unknowns xi(s, c, l) = d_y^l F_c(x, psi_s(x)).

struct TraceRows {
    double x = 0.0;
    Matrix exact;       // exact rows . xi = exact_rhs
    Vector exact_rhs;
    Matrix asym;        // asym rows . xi - asym_rhs -> 0
    Vector asym_rhs;
    Matrix link;        // Taylor links, already divided by width^(m-l)
    int curve_rows = 0;
    int lambda_rows = 0;
    bool side_fiber_empty = false;
};

struct TraceConstraintSystem {
    int unknowns = 0;
    std::vector<TraceRows> at;
};

struct SideData {
    AxisBundleSpec spec;
    AxisBundle axis;
    HeightSelection heights;
};

namespace detail {

// Map from side coordinates u to trace unknowns xi.
inline Matrix side_map(const WedgeNormalForm& nf, int s, char side) {
    const auto& S = nf.strips[s - 1];
    const int m = nf.m, D = nf.D;
    const int curve = side == '+' ? s : s - 1;
    const double sign = side == '+' ? -1.0 : 1.0;
    Matrix T = Matrix::Zero(D * (m + 1), nf.unknowns());
    for (int pos = 0; pos < D; ++pos) {
        const int c = S.perm[pos];
        // q_i sit after the p_j in side coordinates
        const int block = pos < S.k ? (D - S.k) + pos : pos - S.k;
        for (int b = 0; b <= m; ++b)
            T(block * (m + 1) + b, nf.index(curve, c, b)) = std::pow(sign, b) / static_cast<double>(factorial(b));
    }
    return T;
}

}  // namespace detail

inline TraceRows assemble_constraints_at(const WedgeNormalForm& nf, const std::vector<std::pair<SideData, SideData>>& sides,
                                         const std::vector<double>& xbars, int k) {
    const double x = xbars[k];
    const int n = nf.unknowns(), m = nf.m, D = nf.D;
    TraceRows tr;
    tr.x = x;
    std::vector<Vector> ex_rows, as_rows, ln_rows;
    std::vector<double> ex_rhs, as_rhs;
    for (int s = 0; s <= nf.smax(); ++s)
        for (const auto& row : nf.curve_rows[s]) {
            Vector v = Vector::Zero(n);
            for (int c = 0; c < D; ++c)
                for (int l = 0; l <= m; ++l) v(nf.index(s, c, l)) = row.theta[c * (m + 1) + l].evaluate(x);
            ex_rows.push_back(v);
            ex_rhs.push_back(row.g.evaluate(x));
            ++tr.curve_rows;
        }
    for (int s = 1; s <= nf.smax(); ++s)
        for (char side : {'+', '-'}) {
            const SideData& sd = side == '+' ? sides[s - 1].first : sides[s - 1].second;
            const auto& af = sd.axis.fibers[k];
            tr.side_fiber_empty = tr.side_fiber_empty || af.fiber.is_empty();
            const auto tf = build_trace_functionals(sd.spec, af, sd.heights, x);
            const Matrix T = detail::side_map(nf, s, side);
            const Matrix L = tf.lambda * T;
            for (int r = 0; r < L.rows(); ++r) {
                ex_rows.push_back(L.row(r).transpose());
                ex_rhs.push_back(tf.lambda_rhs(r));
                ++tr.lambda_rows;
            }
            const Matrix Mu = tf.mu * T;
            for (int r = 0; r < Mu.rows(); ++r) {
                as_rows.push_back(Mu.row(r).transpose());
                as_rhs.push_back(-tf.mu_const(r));
            }
        }
    // flatness at the origin: x^(l-m) d_y^l F_c on every curve
    for (int s = 0; s <= nf.smax(); ++s)
        for (int c = 0; c < D; ++c)
            for (int l = 0; l <= m; ++l) {
                Vector v = Vector::Zero(n);
                v(nf.index(s, c, l)) = std::pow(x, l - m);
                as_rows.push_back(v);
                as_rhs.push_back(0.0);
            }
    for (int s = 1; s <= nf.smax(); ++s) {
        const double w = nf.ladder.curves[s].evaluate(x) - nf.ladder.curves[s - 1].evaluate(x);
        for (int c = 0; c < D; ++c)
            for (int l = 0; l <= m; ++l) {
                Vector v = Vector::Zero(n);
                v(nf.index(s, c, l)) = 1.0;
                double wk = 1.0;
                for (int kk = 0; kk <= m - l; ++kk) {
                    v(nf.index(s - 1, c, l + kk)) -= wk / static_cast<double>(factorial(kk));
                    wk *= w;
                }
                ln_rows.push_back(v / std::pow(w, m - l));
            }
    }
    auto stack = [n](const std::vector<Vector>& rows) {
        Matrix M(static_cast<int>(rows.size()), n);
        for (std::size_t r = 0; r < rows.size(); ++r) M.row(static_cast<int>(r)) = rows[r].transpose();
        return M;
    };
    tr.exact = stack(ex_rows);
    tr.exact_rhs = to_vector(ex_rhs);
    tr.asym = stack(as_rows);
    tr.asym_rhs = to_vector(as_rhs);
    tr.link = stack(ln_rows);
    return tr;
}

struct PipelineParams {
    int ladder_points = 24;
    double ladder_ratio = 0.70710678118654752;  // 2^(-1/2)
    int probes = 12;
    SelectionParams helly;
    int max_ramification = 8;
    double fit_tolerance = 1e-6;
    double decay_margin = 0.1;
};

inline std::vector<double> x_ladder(double delta, const PipelineParams& p) {
    return geometric_ladder(0.5 * delta, p.ladder_ratio, p.ladder_points);
}

struct TracePreparation {
    std::vector<std::pair<SideData, SideData>> sides;  // per strip: ('+', '-')
    TraceConstraintSystem system;
    std::vector<double> xs;
};

inline TracePreparation prepare_traces(const WedgeNormalForm& nf, double delta, const PipelineParams& p) {
    TracePreparation prep;
    prep.xs = x_ladder(delta, p);
    for (int s = 1; s <= nf.smax(); ++s) {
        std::pair<SideData, SideData> pr;
        for (char side : {'+', '-'}) {
            SideData& sd = side == '+' ? pr.first : pr.second;
            sd.spec = axis_spec(nf, s, side);
            sd.spec.probes = p.probes;
            sd.axis = build_axis_bundle(sd.spec, prep.xs);
            bool any_empty = false;
            for (const auto& af : sd.axis.fibers) any_empty = any_empty || af.fiber.is_empty();
            if (!any_empty) sd.heights = select_sample_heights(sd.spec, sd.axis, prep.xs, p.helly);
        }
        prep.sides.push_back(std::move(pr));
    }
    prep.system.unknowns = nf.unknowns();
    for (std::size_t k = 0; k < prep.xs.size(); ++k) prep.system.at.push_back(assemble_constraints_at(nf, prep.sides, prep.xs, static_cast<int>(k)));
    return prep;
}

// ---------------------------------------------------------------------------
// Selection.

struct NonexistenceEvidence {
    bool found = false;
    std::string reason;
    double x = 0.0;
};

struct SelectionOutcome {
    std::vector<double> xs;
    Matrix xi;                     // rows: ladder points, columns: unknowns
    std::vector<double> F_min;
    DecayFit F_min_fit;
    std::vector<PuiseuxFit> fits;  // one per unknown
    bool fits_ok = true;
    NonexistenceEvidence nonexistence;
};

struct SelectionAtX {
    bool feasible = false;
    double F_min = 0.0;
    Vector xi;
};

// Unknowns are rescaled as xi_i = scale_i eta_i with scale = x^(m-l), which
// turns the weighted norm into the plain one and keeps every block O(1).
inline SelectionAtX select_at(const TraceRows& tr, const Vector& scale) {
    SelectionAtX out;
    const int n = static_cast<int>(scale.size());
    Matrix R(tr.asym.rows() + tr.link.rows(), n);
    R << tr.asym, tr.link;
    R = R * scale.asDiagonal();
    Vector g(R.rows());
    g << tr.asym_rhs, Vector::Zero(tr.link.rows());
    Matrix E = tr.exact * scale.asDiagonal();
    Vector e = tr.exact_rhs;
    for (int i = 0; i < E.rows(); ++i) {
        const double nrm = E.row(i).norm();
        if (nrm > 0) {
            E.row(i) /= nrm;
            e(i) /= nrm;
        }
    }
    const int r = static_cast<int>(R.rows());
    // LP over (eta, t): min sum t, -t <= R eta - g <= t, exact rows as equalities.
    LinearProgram lp;
    lp.c = Vector::Zero(n + r);
    lp.c.tail(r).setOnes();
    lp.A_eq = Matrix::Zero(E.rows(), n + r);
    lp.A_eq.leftCols(n) = E;
    lp.b_eq = e;
    lp.A_ub = Matrix::Zero(2 * r, n + r);
    lp.A_ub.topLeftCorner(r, n) = R;
    lp.A_ub.bottomLeftCorner(r, n) = -R;
    lp.A_ub.topRightCorner(r, r) = -Matrix::Identity(r, r);
    lp.A_ub.bottomRightCorner(r, r) = -Matrix::Identity(r, r);
    lp.b_ub = Vector(2 * r);
    lp.b_ub << g, -g;
    const auto res = solve_lp(lp);
    if (res.status != LpStatus::optimal) return out;
    out.feasible = true;
    out.F_min = res.objective;

    // Minimum norm over the near-minimizers, sum t <= F_min + x.
    Matrix H = Matrix::Zero(n + r, n + r);
    H.topLeftCorner(n, n) = 2.0 * Matrix::Identity(n, n);
    H.bottomRightCorner(r, r) = 2e-10 * Matrix::Identity(r, r);
    Matrix A_ub(2 * r + 1, n + r);
    A_ub.topRows(2 * r) = lp.A_ub;
    A_ub.row(2 * r).setZero();
    A_ub.row(2 * r).tail(r).setOnes();
    Vector b_ub(2 * r + 1);
    b_ub << lp.b_ub, out.F_min + tr.x;
    const auto qp = solve_qp_active_set(H, Vector::Zero(n + r), lp.A_eq, lp.b_eq, A_ub, b_ub, res.x);
    Vector eta = (qp.ok ? qp.x : res.x).head(n);
    const double floor = 1e-9 * (out.F_min + tr.x);
    for (int i = 0; i < n; ++i)
        if (std::abs(eta(i)) <= floor) eta(i) = 0.0;
    out.xi = scale.asDiagonal() * eta;
    return out;
}

inline SelectionOutcome solve_selection(const WedgeNormalForm& nf, const TraceConstraintSystem& sys, const PipelineParams& p = {}) {
    SelectionOutcome out;
    const int n = sys.unknowns;
    out.xi = Matrix::Zero(static_cast<int>(sys.at.size()), n);
    for (std::size_t k = 0; k < sys.at.size(); ++k) {
        const auto& tr = sys.at[k];
        out.xs.push_back(tr.x);
        if (tr.side_fiber_empty && !out.nonexistence.found) {
            out.nonexistence = {true, "an axis fiber is empty", tr.x};
        }
        Vector scale(n);
        for (int s = 0; s <= nf.smax(); ++s)
            for (int c = 0; c < nf.D; ++c)
                for (int l = 0; l <= nf.m; ++l) scale(nf.index(s, c, l)) = std::pow(tr.x, nf.m - l);
        const auto sel = select_at(tr, scale);
        if (!sel.feasible) {
            if (!out.nonexistence.found) out.nonexistence = {true, "exact trace constraints are inconsistent (W(x) is empty)", tr.x};
            out.F_min.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        out.F_min.push_back(sel.F_min);
        out.xi.row(static_cast<int>(k)) = sel.xi.transpose();
    }
    if (out.nonexistence.found) return out;
    out.F_min_fit = fit_decay(out.xs, out.F_min, 1e-13);
    if (!out.F_min_fit.exceeds(p.decay_margin)) {
        out.nonexistence = {true, "minimal objective does not tend to zero (fitted exponent " + std::to_string(out.F_min_fit.slope) + ")",
                            out.xs.back()};
        return out;
    }
    for (int i = 0; i < n; ++i) {
        std::vector<double> col(out.xs.size());
        for (std::size_t k = 0; k < out.xs.size(); ++k) col[k] = out.xi(static_cast<int>(k), i);
        out.fits.push_back(fit_puiseux(out.xs, col, p.max_ramification, p.fit_tolerance));
        out.fits_ok = out.fits_ok && out.fits.back().ok;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthesis.

struct SynthesisResult {
    std::vector<FieldPiece> wedge;  // components on the closed wedge
    std::vector<FieldPiece> disc;   // extended components
    double delta = 0.0;
    std::vector<CompatibilityReport> compatibility;  // per strip and component
    double trace_error = 0.0;                        // worst |d_y^l F_c(x, psi_s) - xi fit|
};

namespace detail {

struct StripFieldData {
    WedgeNormalForm nf;
    std::vector<Puiseux> xi;  // fitted traces, indexed like the unknowns
    CutoffProfile prof;
};

// Polynomial-in-y field built from the traces on curve s, as a jet.
inline Jet<double> trace_polynomial(const StripFieldData& d, int s, int c, const Jet<double>& X, const Jet<double>& Y) {
    const auto dy = Y - d.nf.ladder.curves[s].compose(X);
    Jet<double> out(2, X.m(), X.base());
    Jet<double> pw = Jet<double>::constant(X.n(), X.m(), X.base(), 1.0);
    for (int l = 0; l <= d.nf.m; ++l) {
        out += d.xi[d.nf.index(s, c, l)].compose(X).multiply(pw) * (1.0 / static_cast<double>(factorial(l)));
        pw = pw.multiply(dy);
    }
    return out;
}

// All D components of one side of strip s: free components from traces,
// solved-for ones from the strip equations.
inline std::vector<Jet<double>> side_components(const StripFieldData& d, int s, int curve, const Jet<double>& X, const Jet<double>& Y) {
    const auto& S = d.nf.strips[s - 1];
    std::vector<Jet<double>> F(d.nf.D, Jet<double>(X.n(), X.m(), X.base()));
    for (int pos = S.k; pos < d.nf.D; ++pos) F[S.perm[pos]] = trace_polynomial(d, curve, S.perm[pos], X, Y);
    for (int i = 0; i < S.k; ++i) {
        Jet<double> v = S.phi[i].eval(X, Y);
        for (int j = 0; j < d.nf.D - S.k; ++j) v -= S.A[i][j].eval(X, Y).multiply(F[S.perm[S.k + j]]);
        F[S.perm[i]] = v;
    }
    return F;
}

inline int strip_of(const WedgeNormalForm& nf, double x, double y) {
    int s = 1;
    while (s < nf.smax() && y > nf.ladder.curves[s].evaluate(x)) ++s;
    return s;
}

inline std::vector<Jet<double>> wedge_components(const StripFieldData& d, const Jet<double>& X, const Jet<double>& Y) {
    const double x0 = X[0];
    if (x0 <= 0.0) return std::vector<Jet<double>>(d.nf.D, Jet<double>(X.n(), X.m(), X.base()));
    const int s = strip_of(d.nf, x0, Y[0]);
    const auto lo = d.nf.ladder.curves[s - 1].compose(X);
    const auto t = divide(Y - lo, d.nf.ladder.curves[s].compose(X) - lo);
    if (t[0] <= 1.0 / 3.0) return side_components(d, s, s - 1, X, Y);
    if (t[0] >= 2.0 / 3.0) return side_components(d, s, s, X, Y);
    const auto th = d.prof.compose(t);
    const auto up = side_components(d, s, s, X, Y), down = side_components(d, s, s - 1, X, Y);
    const auto& S = d.nf.strips[s - 1];
    std::vector<Jet<double>> F(d.nf.D, Jet<double>(X.n(), X.m(), X.base()));
    for (int pos = S.k; pos < d.nf.D; ++pos) {
        const int c = S.perm[pos];
        F[c] = down[c] + (Jet<double>::constant(X.n(), X.m(), X.base(), 1.0) - th).multiply(up[c] - down[c]);
    }
    for (int i = 0; i < S.k; ++i) {
        Jet<double> v = S.phi[i].eval(X, Y);
        for (int j = 0; j < d.nf.D - S.k; ++j) v -= S.A[i][j].eval(X, Y).multiply(F[S.perm[S.k + j]]);
        F[S.perm[i]] = v;
    }
    return F;
}

}  // namespace detail

inline SynthesisResult synthesize_section(const WedgeNormalForm& nf, const SelectionOutcome& sel, double delta, const PipelineParams& p = {}) {
    if (sel.nonexistence.found) throw PipelineError("synthesize_section: no section: " + sel.nonexistence.reason);
    if (static_cast<int>(sel.fits.size()) != nf.unknowns()) throw PipelineError("synthesize_section: missing trace fits");
    auto data = std::make_shared<detail::StripFieldData>();
    data->nf = nf;
    for (const auto& f : sel.fits) data->xi.push_back(f.series);
    data->prof = make_cutoff(default_smoothness(nf.m), nf.m);

    SynthesisResult out;
    out.delta = delta;
    LadderSpec lad;
    lad.start = 0.5 * delta;
    lad.margin = p.decay_margin;
    for (int s = 1; s <= nf.smax(); ++s) {
        const CuspRegion R{nf.ladder.curves[s - 1], nf.ladder.curves[s], delta};
        for (int c = 0; c < nf.D; ++c) {
            FieldPiece up{'+', [data, s, c](const Jet<double>& X, const Jet<double>& Y) { return detail::side_components(*data, s, s, X, Y)[c]; }};
            FieldPiece dn{'-', [data, s, c](const Jet<double>& X, const Jet<double>& Y) {
                              return detail::side_components(*data, s, s - 1, X, Y)[c];
                          }};
            auto rep = compatibility_check(up, dn, R, nf.m, lad);
            if (!rep.pass)
                throw PipelineError("synthesize_section: strip " + std::to_string(s) + " component " + std::to_string(c) +
                                    " fails the Taylor link at l = " + std::to_string(rep.failing_l));
            out.compatibility.push_back(std::move(rep));
        }
    }
    for (int c = 0; c < nf.D; ++c) {
        out.wedge.push_back({'w', [data, c](const Jet<double>& X, const Jet<double>& Y) { return detail::wedge_components(*data, X, Y)[c]; }});
        out.disc.push_back(wedge_extend(out.wedge.back(), nf.m, delta, data->prof, lad).field);
    }
    for (double x : geometric_ladder(0.5 * delta, p.ladder_ratio, p.ladder_points))
        for (int s = 0; s <= nf.smax(); ++s) {
            const PlanePoint pt{x, nf.ladder.curves[s].evaluate(x)};
            for (int c = 0; c < nf.D; ++c) {
                const auto J = out.wedge[c].jet_at(pt, nf.m);
                for (int l = 0; l <= nf.m; ++l) {
                    const double want = data->xi[nf.index(s, c, l)].evaluate(x);
                    out.trace_error = std::max(out.trace_error, std::abs(J.derivative_at_base({0, l}) - want));
                }
            }
        }
    return out;
}

// ---------------------------------------------------------------------------
// Verification of a candidate section.

struct SectionReport {
    bool pass = false;
    double strip_residual = 0.0;
    double curve_residual = 0.0;
    bool origin_flat = true;
    std::string message;
};

inline SectionReport verify_section(const WedgeNormalForm& nf, const std::vector<FieldPiece>& F, double delta, double tol = 1e-6,
                                    const PipelineParams& p = {}) {
    if (static_cast<int>(F.size()) != nf.D) throw PipelineError("verify_section: need one field per component");
    SectionReport rep;
    const auto xs = geometric_ladder(0.5 * delta, p.ladder_ratio, p.ladder_points);
    for (double x : xs) {
        for (int s = 1; s <= nf.smax(); ++s) {
            const auto& S = nf.strips[s - 1];
            const double lo = nf.ladder.curves[s - 1].evaluate(x), hi = nf.ladder.curves[s].evaluate(x);
            for (double t : {0.1, 0.5, 0.9}) {
                const PlanePoint pt{x, lo + t * (hi - lo)};
                for (int i = 0; i < S.k; ++i) {
                    double v = F[S.perm[i]].value(pt) - S.phi[i].value(pt);
                    for (int j = 0; j < nf.D - S.k; ++j) v += S.A[i][j].value(pt) * F[S.perm[S.k + j]].value(pt);
                    rep.strip_residual = std::max(rep.strip_residual, std::abs(v));
                }
            }
        }
        for (int s = 0; s <= nf.smax(); ++s) {
            const PlanePoint pt{x, nf.ladder.curves[s].evaluate(x)};
            std::vector<Jet<double>> J;
            for (int c = 0; c < nf.D; ++c) J.push_back(F[c].jet_at(pt, nf.m));
            for (const auto& row : nf.curve_rows[s]) {
                double v = -row.g.evaluate(x);
                for (int c = 0; c < nf.D; ++c)
                    for (int l = 0; l <= nf.m; ++l) v += row.theta[c * (nf.m + 1) + l].evaluate(x) * J[c].derivative_at_base({0, l});
                rep.curve_residual = std::max(rep.curve_residual, std::abs(v));
            }
        }
    }
    CmVerifyInput in;
    for (int s = 0; s <= nf.smax(); ++s) {
        const Puiseux curve = nf.ladder.curves[s];
        in.paths.push_back([curve](double x) { return PlanePoint{x, curve.evaluate(x)}; });
    }
    in.ladder.start = 0.5 * delta;
    in.ladder.margin = p.decay_margin;
    for (int c = 0; c < nf.D; ++c) rep.origin_flat = rep.origin_flat && cm_verify(F[c], in, nf.m).flat_ok;
    rep.pass = rep.strip_residual <= tol && rep.curve_residual <= tol && rep.origin_flat;
    if (!rep.pass) {
        if (rep.strip_residual > tol) rep.message = "strip equations violated, residual " + std::to_string(rep.strip_residual);
        else if (rep.curve_residual > tol) rep.message = "curve conditions violated, residual " + std::to_string(rep.curve_residual);
        else rep.message = "jet at the origin is not zero";
    }
    return rep;
}

// Fiber membership of a candidate given by its flat jet at each sample point.
struct MembershipReport {
    bool pass = false;
    double worst_distance = 0.0;
    int worst_point = -1;
    std::vector<double> distances;
};

inline MembershipReport verify_membership(const SampledBundle& b, const std::function<Vector(const Point&)>& flat, double tol = 1e-6) {
    MembershipReport rep;
    for (int i = 0; i < b.size(); ++i) {
        const double d = b.fibers[i].distance(flat(b.points[i]));
        rep.distances.push_back(d);
        if (d > rep.worst_distance || rep.worst_point < 0) {
            rep.worst_distance = std::max(rep.worst_distance, d);
            rep.worst_point = i;
        }
    }
    rep.pass = rep.worst_distance <= tol;
    return rep;
}

// ---------------------------------------------------------------------------
// End to end.

struct PipelineReport {
    double delta = 0.0;
    EstimateReport estimates;
    TracePreparation prep;
    SelectionOutcome selection;
    std::optional<SynthesisResult> synthesis;
    std::optional<SectionReport> section;
    std::vector<CmReport> cm;  // per component, on the disc
    bool pass = false;
    std::string message;
};

inline CmVerifyInput disc_certification_input(const WedgeNormalForm& nf, double delta) {
    CmVerifyInput in;
    for (int i = 0; i < 12; ++i) {
        const double phi = -M_PI / 2 + M_PI * (i + 0.5) / 12;  // right half plane, where the field lives
        in.paths.push_back([phi](double r) { return PlanePoint{r * std::cos(phi), r * std::sin(phi)}; });
    }
    for (double frac : {0.3, 0.5})
        for (int s = 1; s <= nf.smax(); ++s) {
            const double x = frac * delta;
            const double lo = nf.ladder.curves[s - 1].evaluate(x), hi = nf.ladder.curves[s].evaluate(x);
            in.interior.push_back({x, lo + 0.5 * (hi - lo)});
        }
    for (double deg : {-20.0, 55.0}) {
        const double r = 0.4 * delta;
        in.interior.push_back({r * std::cos(deg * M_PI / 180), r * std::sin(deg * M_PI / 180)});
    }
    in.ladder.start = 0.5 * delta;
    return in;
}

inline PipelineReport run_pipeline(const WedgeNormalForm& nf, const PipelineParams& p = {}) {
    PipelineReport rep;
    rep.delta = std::min(nf.ladder.delta, validate_normal_form(nf));
    rep.estimates = certify_strip_estimates(nf, rep.delta);
    if (!rep.estimates.ok) {
        rep.message = rep.estimates.message;
        return rep;
    }
    rep.prep = prepare_traces(nf, rep.delta, p);
    rep.selection = solve_selection(nf, rep.prep.system, p);
    if (rep.selection.nonexistence.found) {
        rep.message = "no section: " + rep.selection.nonexistence.reason;
        return rep;
    }
    rep.synthesis = synthesize_section(nf, rep.selection, rep.delta, p);
    rep.section = verify_section(nf, rep.synthesis->disc, rep.delta, 1e-6, p);
    const auto in = disc_certification_input(nf, rep.delta);
    bool cm_ok = true;
    for (const auto& f : rep.synthesis->disc) {
        rep.cm.push_back(cm_verify(f, in, nf.m));
        cm_ok = cm_ok && rep.cm.back().pass;
    }
    rep.pass = rep.section->pass && cm_ok;
    if (!rep.section->pass) rep.message = rep.section->message;
    else if (!cm_ok) rep.message = "C^m certification failed";
    return rep;
}

}  // namespace whitney

#endif
