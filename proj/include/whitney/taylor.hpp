// Taylor-mode evaluation: composing jets with univariate functions.
//
// A Jet<double> built from coordinate jets and pushed through these
// helpers carries every partial derivative up to its order, which is how
// field evaluators produce exact partials without finite differences.
#ifndef WHITNEY_TAYLOR_HPP
#define WHITNEY_TAYLOR_HPP

#include "jet.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace whitney {

// f(h) where taylor[k] = f^(k)(h0) / k! and h0 is the constant term of h.
template <class T>
Jet<T> compose_univariate(const Jet<T>& h, const std::vector<T>& taylor) {
    Jet<T> u = h;
    u[0] = T(0);
    const int top = std::min<int>(h.m(), static_cast<int>(taylor.size()) - 1);
    Jet<T> r = Jet<T>::constant(h.n(), h.m(), h.base(), top >= 0 ? taylor[top] : T(0));
    for (int k = top - 1; k >= 0; --k) {
        r = r.multiply(u);
        r[0] += taylor[k];
    }
    return r;
}

template <class T>
Jet<T> reciprocal(const Jet<T>& h) {
    const T h0 = h[0];
    if (h0 == T(0)) throw JetError("reciprocal: jet vanishes at its base point");
    std::vector<T> t(h.m() + 1);
    T p = T(1) / h0;
    for (int k = 0; k <= h.m(); ++k) {
        t[k] = (k % 2 == 0) ? p : T(-p);
        p /= h0;
    }
    return compose_univariate(h, t);
}

template <class T>
Jet<T> divide(const Jet<T>& a, const Jet<T>& b) {
    return a.multiply(reciprocal(b));
}

template <class T>
Jet<T> integer_power(const Jet<T>& h, int e) {
    if (e < 0) return integer_power(reciprocal(h), -e);
    Jet<T> result = Jet<T>::constant(h.n(), h.m(), h.base(), T(1));
    Jet<T> b = h;
    while (e > 0) {
        if (e & 1) result = result.multiply(b);
        b = b.multiply(b);
        e >>= 1;
    }
    return result;
}

// h^p for real p; needs h > 0 at the base unless p is a non-negative integer.
inline Jet<double> real_power(const Jet<double>& h, double p) {
    if (p == std::floor(p) && p >= 0 && p < 64) return integer_power(h, static_cast<int>(p));
    const double h0 = h[0];
    if (!(h0 > 0)) throw JetError("real_power: base value must be positive for a fractional power");
    std::vector<double> t(h.m() + 1);
    double coef = 1.0;  // binomial(p, k)
    for (int k = 0; k <= h.m(); ++k) {
        t[k] = coef * std::pow(h0, p - k);
        coef *= (p - k) / (k + 1);
    }
    return compose_univariate(h, t);
}

// Taylor coefficients of a univariate polynomial sum c_k t^k at t0, up to order.
inline std::vector<double> polynomial_taylor(const std::vector<double>& c, double t0, int order) {
    std::vector<double> out(order + 1, 0.0);
    for (int j = 0; j <= order; ++j) {
        double s = 0.0;
        double tp = 1.0;
        for (int k = j; k < static_cast<int>(c.size()); ++k) {
            s += c[k] * static_cast<double>(binomial(k, j)) * tp;
            tp *= t0;
        }
        out[j] = s;
    }
    return out;
}

}  // namespace whitney

#endif
