// Cusp-patching fixtures shared by the patching tests and the acceptance run.
#ifndef WHITNEY_TEST_PATCH_FIXTURES_HPP
#define WHITNEY_TEST_PATCH_FIXTURES_HPP

#include <whitney/patching.hpp>

namespace fixtures {

using whitney::FieldPiece;
using whitney::Jet;

// c * x^a * y^b as a Taylor-mode field.
inline FieldPiece monomial_field(double c, int a, int b, char side = 'w') {
    return {side, [=](const Jet<double>& X, const Jet<double>& Y) {
                return whitney::integer_power(X, a).multiply(whitney::integer_power(Y, b)) * c;
            }};
}

inline FieldPiece sum_fields(const FieldPiece& f, const FieldPiece& g) {
    return {f.side, [=](const Jet<double>& X, const Jet<double>& Y) { return f.eval(X, Y) + g.eval(X, Y); }};
}

// Strip 0 <= y <= x^2 with m = 2: upper piece x^4 y, lower piece -x^3 y^2.
// The Taylor link residuals are x^6 + x^7, x^4 + 2x^5 and 2x^3, i.e. width
// exponents 3, 2 and 3/2 against targets 2, 1 and 0.
inline whitney::CuspRegion parabolic_strip() {
    return {whitney::Puiseux(), whitney::Puiseux::monomial(1, 2), 1.0};
}
inline FieldPiece compatible_upper() { return monomial_field(1.0, 4, 1, '+'); }
inline FieldPiece compatible_lower() { return monomial_field(-1.0, 3, 2, '-'); }

// Upper piece y^2 against a zero lower piece: the l = 0 residual is exactly
// width^2, which is not o(width^2).
inline FieldPiece broken_upper() { return monomial_field(1.0, 0, 2, '+'); }
inline FieldPiece broken_lower() { return monomial_field(0.0, 0, 0, '-'); }

inline whitney::CmVerifyInput strip_probes(const whitney::CuspRegion& R) {
    whitney::CmVerifyInput in;
    for (double c : {0.0, 0.25, 0.4, 0.5, 0.6, 0.75, 1.0})
        in.paths.push_back([R, c](double x) {
            const double lo = R.lower.evaluate(x), hi = R.upper.evaluate(x);
            return whitney::PlanePoint{x, lo + c * (hi - lo)};
        });
    for (double x : {0.2, 0.3, 0.45})
        for (double c : {0.2, 0.45, 0.55, 0.8}) {
            const double lo = R.lower.evaluate(x), hi = R.upper.evaluate(x);
            in.interior.push_back({x, lo + c * (hi - lo)});
        }
    in.ladder.start = 0.5;
    return in;
}

}  // namespace fixtures

#endif
