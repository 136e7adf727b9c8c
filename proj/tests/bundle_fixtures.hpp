// Point-cloud bundles shared by the bundle tests and the acceptance suite.
#ifndef WHITNEY_TESTS_BUNDLE_FIXTURES_HPP
#define WHITNEY_TESTS_BUNDLE_FIXTURES_HPP

#include <whitney/bundles.hpp>

#include <cmath>
#include <functional>

namespace fixtures {

using namespace whitney;

// H(x) = {P : P(x) = value}, a single value constraint on a scalar jet.
inline AffineFiber value_fiber(const JetSpace& s, double value) {
    Vector e = Vector::Zero(s.total_dim());
    e(0) = 1.0;
    return fiber_from_constraints(s, {{e, value}});
}

// E = {0} and 2^-k, k = 0..30; H(2^-k) fixes P(2^-k) = f(2^-k), H(0) fixes P(0) = 0.
inline SampledBundle dyadic_bundle(int m, const std::function<double(double)>& f) {
    const JetSpace s(1, m, 1);
    SampledBundle b{s, {}, {}};
    b.points.push_back({0.0});
    b.fibers.push_back(value_fiber(s, 0.0));
    for (int k = 0; k <= 30; ++k) {
        const double x = std::ldexp(1.0, -k);
        b.points.push_back({x});
        b.fibers.push_back(value_fiber(s, f(x)));
    }
    return b;
}

inline SampledBundle square_bundle() {
    return dyadic_bundle(1, [](double x) { return x * x; });
}

// f(2^-k) = (-1)^k 2^-k
inline SampledBundle oscillating_bundle() {
    return dyadic_bundle(1, [](double x) {
        const int k = static_cast<int>(std::lround(-std::log2(x)));
        return (k % 2 == 0 ? 1.0 : -1.0) * x;
    });
}

// Points 2^-j e1 and 2^-j e2 for j = 0..20 plus the origin, values of a quadratic.
inline double quadratic(double x, double y) { return x * x + 3 * x * y - y * y; }

inline SampledBundle planar_bundle() {
    const JetSpace s(2, 1, 1);
    SampledBundle b{s, {{0.0, 0.0}}, {value_fiber(s, 0.0)}};
    for (int j = 0; j <= 20; ++j) {
        const double r = std::ldexp(1.0, -j);
        for (const Point& p : {Point{r, 0.0}, Point{0.0, r}}) {
            b.points.push_back(p);
            b.fibers.push_back(value_fiber(s, quadratic(p[0], p[1])));
        }
    }
    return b;
}

// Jet of x^2 at a point (order 1).
inline Vector square_jet(double x) {
    Vector v(2);
    v << x * x, 2 * x;
    return v;
}

inline Vector quadratic_jet(const Point& p) {
    Vector v(3);
    v << quadratic(p[0], p[1]), 2 * p[0] + 3 * p[1], 3 * p[0] - 2 * p[1];
    return v;
}

}  // namespace fixtures

#endif
