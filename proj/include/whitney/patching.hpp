// Gluing two C^m pieces across a cusp-shaped strip, extending a field from
// the wedge {0 <= y <= x} to a full neighbourhood of the origin, and the
// numerical C^m certification used on every synthesized field.
#ifndef WHITNEY_PATCHING_HPP
#define WHITNEY_PATCHING_HPP

#include "decay.hpp"
#include "jet.hpp"
#include "puiseux.hpp"
#include "taylor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace whitney {

class PatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using PlanePoint = std::vector<double>;

// A scalar field on (part of) the plane, evaluated in Taylor mode: given
// jets X, Y of the two coordinates it returns the jet of F(X, Y). Feeding
// coordinate jets yields all partials at a point; feeding other jets
// composes F with a change of variables.
struct FieldPiece {
    using Evaluator = std::function<Jet<double>(const Jet<double>&, const Jet<double>&)>;

    char side = '+';  // '+', '-' for strip sides, 'w' for a whole-region field
    Evaluator eval;

    Jet<double> jet_at(const PlanePoint& p, int order) const {
        const auto X = Jet<double>::coordinate(2, order, p, 0);
        const auto Y = Jet<double>::coordinate(2, order, p, 1);
        return eval(X, Y);
    }
    double partial(const MultiIndex& alpha, const PlanePoint& p) const {
        return jet_at(p, order(alpha)).derivative_at_base(alpha);
    }
    double value(const PlanePoint& p) const { return jet_at(p, 0)[0]; }
};

inline FieldPiece zero_field(char side = 'w') {
    return {side, [](const Jet<double>& X, const Jet<double>&) { return Jet<double>(X.n(), X.m(), X.base()); }};
}

// G(x, y) = F(x, y + shift(x)).
inline FieldPiece shear_field(const FieldPiece& F, const Puiseux& shift) {
    return {F.side, [F, shift](const Jet<double>& X, const Jet<double>& Y) { return F.eval(X, Y + shift.compose(X)); }};
}

// ---------------------------------------------------------------------------
// Cutoff profile: theta = 1 on t <= 1/3, 0 on t >= 2/3, and on the middle
// third theta(t) = 1 - S(3t - 1) where S is the degree 2r+1 smoothstep whose
// first r derivatives vanish at both ends.

struct CutoffProfile {
    int r = 0;
    std::vector<rational> step;       // monomial coefficients of S(u)
    std::vector<double> bounds;       // bounds[j] = max |theta^(j)|, j = 0..r

    double value(double t) const { return derivative(0, t); }

    double derivative(int j, double t) const {
        if (t <= 1.0 / 3.0) return j == 0 ? 1.0 : 0.0;
        if (t >= 2.0 / 3.0) return 0.0;
        const auto tay = step_taylor(3.0 * t - 1.0, j);
        const double dj = tay[j] * static_cast<double>(factorial(j)) * std::pow(3.0, j);
        return j == 0 ? 1.0 - dj : -dj;
    }

    // theta composed with a jet; exactly constant on the plateaus.
    Jet<double> compose(const Jet<double>& t) const {
        const double t0 = t[0];
        if (t0 <= 1.0 / 3.0) return Jet<double>::constant(t.n(), t.m(), t.base(), 1.0);
        if (t0 >= 2.0 / 3.0) return Jet<double>(t.n(), t.m(), t.base());
        Jet<double> u = t * 3.0;
        u[0] -= 1.0;
        const auto s = compose_univariate(u, step_taylor(u[0], t.m()));
        return Jet<double>::constant(t.n(), t.m(), t.base(), 1.0) - s;
    }

    // Taylor coefficients of S at u0, computed from the factored form because
    // the expanded coefficients alternate in sign and cancel badly.
    std::vector<double> step_taylor(double u0, int order) const {
        const auto U = Jet<double>::coordinate(1, order, {u0}, 0);
        const auto W = Jet<double>::constant(1, order, {u0}, 1.0) - U;
        Jet<double> sum(1, order, {u0});
        Jet<double> pw = Jet<double>::constant(1, order, {u0}, 1.0);
        for (int k = 0; k <= r; ++k) {
            sum += pw * static_cast<double>(binomial(r + k, k));
            pw = pw.multiply(W);
        }
        return integer_power(U, r + 1).multiply(sum).coeffs();
    }
};

inline CutoffProfile make_cutoff(int r, int m = 0) {
    if (r < m + 1) throw PatchError("make_cutoff: smoothness reserve r must be at least m+1");
    if (r < 0) throw PatchError("make_cutoff: negative smoothness");
    CutoffProfile p;
    p.r = r;
    p.step.assign(2 * r + 2, rational(0));
    // u^(r+1) sum_k C(r+k, k) (1-u)^k, expanded.
    for (int k = 0; k <= r; ++k)
        for (int i = 0; i <= k; ++i) {
            rational c = rational(binomial(r + k, k)) * rational(binomial(k, i));
            if (i % 2) c = -c;
            p.step[r + 1 + i] += c;
        }
    constexpr int kGrid = 4096;
    p.bounds.assign(r + 1, 0.0);
    for (int g = 0; g <= kGrid; ++g) {
        const double t = 1.0 / 3.0 + (1.0 / 3.0) * g / kGrid;
        const auto tay = p.step_taylor(3.0 * t - 1.0, r);
        double scale = 1.0;
        for (int j = 0; j <= r; ++j) {
            const double v = j == 0 ? 1.0 - tay[0] : tay[j] * scale;
            p.bounds[j] = std::max(p.bounds[j], std::abs(v));
            scale *= 3.0 * (j + 1);
        }
    }
    return p;
}

inline int default_smoothness(int m) { return 2 * (m + 1); }

// ---------------------------------------------------------------------------

struct CuspRegion {
    Puiseux lower, upper;
    double delta = 1.0;
};

inline LadderValidation validate_region(const CuspRegion& R) {
    return curve_ladder_validate(CurveLadder{{R.lower, R.upper}, R.delta});
}

// Samples of v ~ c r^s are fitted in log-log form. Entries whose magnitude
// is within rounding of the terms that produced them are replaced by that
// rounding level, so exact cancellations neither fake nor hide decay.
inline DecayFit fit_with_noise(const std::vector<double>& radii, std::vector<double> values, const std::vector<double>& scales) {
    bool any = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double noise = 1e-12 * scales[i];
        if (std::abs(values[i]) <= noise) values[i] = 0.0;
        else any = true;
    }
    if (!any) return fit_decay(radii, values, 0.0);
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] == 0.0) values[i] = std::max(1e-12 * scales[i], std::numeric_limits<double>::min());
    return fit_decay(radii, values, 0.0);
}

struct CompatibilityTerm {
    int l = 0;
    double target = 0.0;  // required exponent in powers of the strip width
    DecayFit fit;
    std::vector<double> residuals;
    bool pass = false;
};

struct CompatibilityReport {
    bool pass = false;
    int failing_l = -1;
    std::vector<double> xs, widths;
    std::vector<CompatibilityTerm> terms;
    std::string message;
};

struct LadderSpec {
    double start = -1.0;  // <= 0 means delta / 2
    double ratio = 0.5;
    int count = 8;
    double margin = 0.1;
};

// For each l <= m, compares the l-th y-derivative of the upper piece on the
// upper curve with the order m-l Taylor expansion of the lower piece taken
// from the lower curve, and requires the mismatch to vanish faster than
// width^(m-l) where width = upper - lower.
inline CompatibilityReport compatibility_check(const FieldPiece& Fp, const FieldPiece& Fm, const CuspRegion& R, int m,
                                               const LadderSpec& lad = {}) {
    CompatibilityReport rep;
    const double start = lad.start > 0 ? lad.start : 0.5 * R.delta;
    rep.xs = geometric_ladder(start, lad.ratio, lad.count);
    std::vector<Jet<double>> up, lo;
    for (double x : rep.xs) {
        const double yp = R.upper.evaluate(x), ym = R.lower.evaluate(x);
        rep.widths.push_back(yp - ym);
        up.push_back(Fp.jet_at({x, yp}, m));
        lo.push_back(Fm.jet_at({x, ym}, m));
    }
    rep.pass = true;
    for (int l = 0; l <= m; ++l) {
        CompatibilityTerm term;
        term.l = l;
        term.target = m - l + lad.margin;
        std::vector<double> scales;
        for (std::size_t i = 0; i < rep.xs.size(); ++i) {
            const double w = rep.widths[i];
            double v = up[i].derivative_at_base({0, l});
            double scale = std::abs(v);
            double wj = 1.0;
            for (int j = 0; j <= m - l; ++j) {
                const double t = lo[i].derivative_at_base({0, l + j}) * wj / static_cast<double>(factorial(j));
                v -= t;
                scale += std::abs(t);
                wj *= w;
            }
            term.residuals.push_back(v);
            scales.push_back(scale);
        }
        term.fit = fit_with_noise(rep.widths, term.residuals, scales);
        term.pass = term.fit.exceeds(term.target);
        if (!term.pass && rep.failing_l < 0) {
            rep.failing_l = l;
            rep.message = "Taylor link fails at l = " + std::to_string(l) + ": exponent " + std::to_string(term.fit.slope) +
                          " <= " + std::to_string(term.target);
        }
        rep.pass = rep.pass && term.pass;
        rep.terms.push_back(std::move(term));
    }
    return rep;
}

// theta_-(x, y) = theta((y - lower) / (upper - lower)); theta_+ = 1 - theta_-.
inline FieldPiece cutoff_field(const CuspRegion& R, const CutoffProfile& prof, char side) {
    return {side, [R, prof, side](const Jet<double>& X, const Jet<double>& Y) {
                if (X[0] <= 0.0) return Jet<double>(X.n(), X.m(), X.base());
                const auto lo = R.lower.compose(X);
                const auto t = divide(Y - lo, R.upper.compose(X) - lo);
                const auto th = prof.compose(t);
                return side == '-' ? th : Jet<double>::constant(X.n(), X.m(), X.base(), 1.0) - th;
            }};
}

struct PatchResult {
    FieldPiece field;
    double delta = 0.0;  // radius on which the patch is certified
    CompatibilityReport compatibility;
};

// Blend without checking the Taylor link. Kept separate so deliberately
// incompatible data can be glued and then rejected by cm_verify.
inline FieldPiece patch_cusp_unchecked(const FieldPiece& Fp, const FieldPiece& Fm, const CuspRegion& R, const CutoffProfile& prof) {
    return {'w', [Fp, Fm, R, prof](const Jet<double>& X, const Jet<double>& Y) {
                if (X[0] <= 0.0) return Jet<double>(X.n(), X.m(), X.base());
                const auto lo = R.lower.compose(X);
                const auto t = divide(Y - lo, R.upper.compose(X) - lo);
                if (t[0] <= 1.0 / 3.0) return Fm.eval(X, Y);
                if (t[0] >= 2.0 / 3.0) return Fp.eval(X, Y);
                const auto th = prof.compose(t);
                const auto fm = Fm.eval(X, Y);
                return fm + (Jet<double>::constant(X.n(), X.m(), X.base(), 1.0) - th).multiply(Fp.eval(X, Y) - fm);
            }};
}

inline PatchResult patch_cusp(const FieldPiece& Fp, const FieldPiece& Fm, const CuspRegion& R, const CutoffProfile& prof, int m,
                              const LadderSpec& lad = {}) {
    const auto v = validate_region(R);
    if (!v.valid) throw PatchError("patch_cusp: invalid region: " + v.reason);
    CuspRegion Rv = R;
    Rv.delta = v.delta_refined;
    PatchResult out;
    out.compatibility = compatibility_check(Fp, Fm, Rv, m, lad);
    if (!out.compatibility.pass) throw PatchError("patch_cusp: pieces are not compatible: " + out.compatibility.message);
    out.field = patch_cusp_unchecked(Fp, Fm, Rv, prof);
    out.delta = Rv.delta;
    return out;
}

// ---------------------------------------------------------------------------
// C^m certification.

// A probe path x -> point, followed along a geometric x-ladder toward 0.
using ProbePath = std::function<PlanePoint(double)>;

struct CmVerifyInput {
    std::vector<ProbePath> paths;
    std::vector<PlanePoint> interior;  // finite-difference cross-check points
    LadderSpec ladder;                 // start must be positive here
};

struct FlatnessEntry {
    MultiIndex alpha;
    int path = 0;
    double target = 0.0;
    DecayFit fit;
    bool pass = false;
};

struct DifferenceCheck {
    MultiIndex alpha;  // the partial whose supplied value is checked
    int direction = 0;
    PlanePoint at;
    double supplied = 0.0, estimate = 0.0, rel_error = 0.0;
};

struct CmReport {
    bool pass = false;
    bool flat_ok = false;
    bool interior_ok = false;
    std::vector<FlatnessEntry> flatness;
    std::vector<DifferenceCheck> failures;
    double worst_rel_error = 0.0;
    std::optional<MultiIndex> witness;  // first alpha failing the flatness test
    std::string message;
};

inline std::string alpha_string(const MultiIndex& a) {
    std::string s = "(";
    for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + std::to_string(a[i]);
    return s + ")";
}

inline CmReport cm_verify(const FieldPiece& F, const CmVerifyInput& in, int m) {
    CmReport rep;
    const auto& layout = *JetLayout::get(2, m);
    rep.flat_ok = true;
    const auto xs = geometric_ladder(in.ladder.start, in.ladder.ratio, in.ladder.count);
    for (std::size_t pi = 0; pi < in.paths.size(); ++pi) {
        std::vector<double> radii;
        std::vector<Jet<double>> jets;
        for (double x : xs) {
            const auto p = in.paths[pi](x);
            radii.push_back(std::hypot(p[0], p[1]));
            jets.push_back(F.jet_at(p, m));
        }
        for (int i = 0; i < layout.size(); ++i) {
            const auto& a = layout.at(i);
            FlatnessEntry e;
            e.alpha = a;
            e.path = static_cast<int>(pi);
            e.target = m - order(a) + in.ladder.margin;
            std::vector<double> vals, scales;
            for (std::size_t k = 0; k < jets.size(); ++k) {
                vals.push_back(jets[k].derivative_at_base(a));
                scales.push_back(0.0);
            }
            e.fit = fit_with_noise(radii, vals, scales);
            e.pass = e.fit.exceeds(e.target);
            if (!e.pass) {
                rep.flat_ok = false;
                if (!rep.witness) {
                    rep.witness = a;
                    rep.message = "flatness fails at alpha = " + alpha_string(a) + " on path " + std::to_string(pi) +
                                  ": exponent " + std::to_string(e.fit.slope) + " <= " + std::to_string(e.target);
                }
            }
            rep.flatness.push_back(std::move(e));
        }
    }

    // Supplied partials of order < m are differentiated numerically in each
    // direction and compared with the supplied partial one order higher.
    rep.interior_ok = true;
    for (const auto& p : in.interior) {
        const double rad = std::hypot(p[0], p[1]);
        const double h = 1e-3 * rad;
        const auto J = F.jet_at(p, m);
        for (int i = 0; i < layout.size(); ++i) {
            const auto& a = layout.at(i);
            if (order(a) >= m) continue;
            double scale = 0.0;
            for (int b = 0; b < layout.size(); ++b)
                scale = std::max(scale, std::abs(J.derivative_at_base(layout.at(b))) * std::pow(rad, order(layout.at(b)) - order(a) - 1));
            for (int d = 0; d < 2; ++d) {
                auto central = [&](double step) {
                    PlanePoint pp = p, pm = p;
                    pp[d] += step;
                    pm[d] -= step;
                    const int k = order(a);
                    return (F.jet_at(pp, k).derivative_at_base(a) - F.jet_at(pm, k).derivative_at_base(a)) / (2 * step);
                };
                const double est = (4.0 * central(0.5 * h) - central(h)) / 3.0;
                MultiIndex up = a;
                up[d] += 1;
                const double sup = J.derivative_at_base(up);
                const double denom = std::max({std::abs(sup), scale, std::numeric_limits<double>::min()});
                const double rel = std::abs(est - sup) / denom;
                rep.worst_rel_error = std::max(rep.worst_rel_error, rel);
                if (rel > 1e-4) {
                    rep.interior_ok = false;
                    rep.failures.push_back({up, d, p, sup, est, rel});
                }
            }
        }
    }
    if (!rep.interior_ok && rep.message.empty())
        rep.message = "finite-difference mismatch for alpha = " + alpha_string(rep.failures.front().alpha);
    rep.pass = rep.flat_ok && rep.interior_ok;
    return rep;
}

// Rays y = c x for c in [lo, hi] and the standard interior sample used by
// the certification of fields living on a sector.
inline std::vector<ProbePath> ray_paths(const std::vector<double>& slopes) {
    std::vector<ProbePath> out;
    for (double c : slopes) out.push_back([c](double x) { return PlanePoint{x, c * x}; });
    return out;
}

// ---------------------------------------------------------------------------
// Extension from the wedge {0 <= y <= x < delta} to a disc.

namespace detail {

// k-th y-derivative of F along the curve s -> (s, offset * s), as a jet in X,
// for k = 0..m. The field is expanded to order X.m() + m once.
inline std::vector<Jet<double>> transverse_traces(const FieldPiece& F, const Jet<double>& X, int m, double offset) {
    const int M = X.m() + m;
    const PlanePoint base{X[0], 0.0};
    const auto S = Jet<double>::coordinate(2, M, base, 0);
    const auto V = Jet<double>::coordinate(2, M, base, 1);
    const auto J = F.eval(S, S * offset + V);
    std::vector<Jet<double>> out;
    for (int k = 0; k <= m; ++k) {
        std::vector<double> tay(X.m() + 1);
        for (int a = 0; a <= X.m(); ++a) tay[a] = J.coeff({a, k}) * static_cast<double>(factorial(k));
        out.push_back(compose_univariate(X, tay));
    }
    return out;
}

}  // namespace detail

struct WedgeExtension {
    FieldPiece field;
    double delta = 0.0;
};

// Below the sector the field is replaced by its order-m Taylor polynomial in
// y about y = 0, above it by the one about y = x; the result is cut off by
// theta applied to the distance of y/x from [0, 1].
inline WedgeExtension wedge_extend(const FieldPiece& F, int m, double delta, const CutoffProfile& prof, const LadderSpec& lad = {}) {
    // The jet at the origin must vanish: check the decay along the bisector.
    const double start = lad.start > 0 ? lad.start : 0.5 * delta;
    const auto xs = geometric_ladder(start, lad.ratio, lad.count);
    const auto& layout = *JetLayout::get(2, m);
    std::vector<Jet<double>> jets;
    std::vector<double> radii;
    for (double x : xs) {
        jets.push_back(F.jet_at({x, 0.5 * x}, m));
        radii.push_back(std::hypot(x, 0.5 * x));
    }
    for (int i = 0; i < layout.size(); ++i) {
        std::vector<double> vals, scales(xs.size(), 0.0);
        for (const auto& J : jets) vals.push_back(J.derivative_at_base(layout.at(i)));
        const auto fit = fit_with_noise(radii, vals, scales);
        if (!fit.exceeds(m - order(layout.at(i))))
            throw PatchError("wedge_extend: jet at the origin is not zero (alpha = " + alpha_string(layout.at(i)) + ")");
    }

    WedgeExtension out;
    out.delta = delta;
    out.field = {'w', [F, m, prof](const Jet<double>& X, const Jet<double>& Y) {
                     const double x0 = X[0], y0 = Y[0];
                     Jet<double> zero(2, X.m(), X.base());
                     if (x0 <= 0.0) return zero;
                     const auto T = divide(Y, X);
                     const double t0 = T[0];
                     if (t0 <= -1.0 || t0 >= 2.0) return zero;
                     Jet<double> cut = Jet<double>::constant(X.n(), X.m(), X.base(), 1.0);
                     if (t0 < 0.0) cut = prof.compose((-1.0 / 3.0) * T + Jet<double>::constant(X.n(), X.m(), X.base(), 1.0 / 3.0));
                     else if (t0 > 1.0) cut = prof.compose((1.0 / 3.0) * T);
                     if (0.0 <= y0 && y0 <= x0) return cut.multiply(F.eval(X, Y));
                     const double offset = y0 < 0.0 ? 0.0 : 1.0;
                     const auto traces = detail::transverse_traces(F, X, m, offset);
                     const auto dy = Y - offset * X;
                     Jet<double> g = zero;
                     Jet<double> pw = Jet<double>::constant(X.n(), X.m(), X.base(), 1.0);
                     for (int k = 0; k <= m; ++k) {
                         g += traces[k].multiply(pw) * (1.0 / static_cast<double>(factorial(k)));
                         pw = pw.multiply(dy);
                     }
                     return cut.multiply(g);
                 }};
    return out;
}

}  // namespace whitney

#endif
