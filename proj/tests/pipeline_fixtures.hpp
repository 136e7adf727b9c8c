// Wedge normal forms with known answers for the section synthesizer tests.
#ifndef WHITNEY_TEST_PIPELINE_FIXTURES_HPP
#define WHITNEY_TEST_PIPELINE_FIXTURES_HPP

#include "patch_fixtures.hpp"

#include <whitney/pipeline.hpp>

namespace fixtures {

using whitney::CurveRow;
using whitney::Puiseux;
using whitney::StripSystem;
using whitney::WedgeNormalForm;

inline Puiseux px(long long num, long long den, std::int64_t power) {
    return Puiseux::monomial(whitney::rational(num, den), power);
}

inline CurveRow value_row(int D, int m, int c, int l, const Puiseux& g) {
    CurveRow r;
    r.theta.assign(D * (m + 1), Puiseux());
    r.theta[c * (m + 1) + l] = Puiseux::constant(1);
    r.g = g;
    return r;
}

inline StripSystem free_strip(int D) {
    StripSystem S;
    for (int c = 0; c < D; ++c) S.perm.push_back(c);
    return S;
}

// Curves 0, x/2, x; one scalar component, m = 1; F = x^2 / 2 on the middle
// curve, which is what x*y takes there.
inline WedgeNormalForm xy_wedge() {
    WedgeNormalForm nf;
    nf.name = "xy-wedge";
    nf.D = 1;
    nf.m = 1;
    nf.ladder.curves = {Puiseux(), px(1, 2, 1), Puiseux::identity()};
    nf.ladder.delta = 1.0;
    nf.strips = {free_strip(1), free_strip(1)};
    nf.curve_rows = {{}, {value_row(1, 1, 0, 0, px(1, 2, 2))}, {}};
    return nf;
}

// D = 2: on the lower strip F_0 + (y/x) F_1 = 2 y^2, satisfied by (y^2, x y).
// F_1 = x^2/2 on the middle curve and F_0 = x^2 on the diagonal.
inline WedgeNormalForm coupled_wedge() {
    WedgeNormalForm nf;
    nf.name = "coupled-wedge";
    nf.D = 2;
    nf.m = 1;
    nf.ladder.curves = {Puiseux(), px(1, 2, 1), Puiseux::identity()};
    nf.ladder.delta = 1.0;
    StripSystem lower;
    lower.k = 1;
    lower.perm = {0, 1};
    lower.A = {{FieldPiece{'w', [](const Jet<double>& X, const Jet<double>& Y) { return whitney::divide(Y, X); }}}};
    lower.phi = {monomial_field(2.0, 0, 2)};
    nf.strips = {lower, free_strip(2)};
    nf.curve_rows = {{}, {value_row(2, 1, 1, 0, px(1, 2, 2))}, {value_row(2, 1, 0, 0, px(1, 1, 2))}};
    return nf;
}

// d_y F = 1 on the middle curve cannot coexist with a vanishing 1-jet at the origin.
inline WedgeNormalForm slope_obstruction() {
    auto nf = xy_wedge();
    nf.name = "slope-obstruction";
    nf.curve_rows[1] = {value_row(1, 1, 0, 1, Puiseux::constant(1))};
    return nf;
}

// F = x^2 and F = 2 x^2 on the same curve.
inline WedgeNormalForm contradictory_rows() {
    auto nf = xy_wedge();
    nf.name = "contradictory-rows";
    nf.curve_rows[1] = {value_row(1, 1, 0, 0, px(1, 1, 2)), value_row(1, 1, 0, 0, px(2, 1, 2))};
    return nf;
}

}  // namespace fixtures

#endif
