// Scalar backends shared by the jet and series code.
#ifndef WHITNEY_SCALAR_HPP
#define WHITNEY_SCALAR_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <type_traits>

namespace whitney {

// Exact rational scalar, used by the ring-axiom checks and the series code.
using rational = boost::multiprecision::cpp_rational;

template <class T>
struct scalar_traits {
    static constexpr bool exact = false;
    static bool is_zero(const T& v, double tol = 0.0) { return std::abs(v) <= tol; }
    static double to_double(const T& v) { return static_cast<double>(v); }
};

template <>
struct scalar_traits<rational> {
    static constexpr bool exact = true;
    static bool is_zero(const rational& v, double = 0.0) { return v == 0; }
    static double to_double(const rational& v) { return v.convert_to<double>(); }
};

template <class T>
double to_double(const T& v) {
    return scalar_traits<T>::to_double(v);
}

template <class T>
T integer_power(const T& base, int e) {
    T result(1);
    T b = base;
    while (e > 0) {
        if (e & 1) result *= b;
        b *= b;
        e >>= 1;
    }
    return result;
}

inline std::int64_t factorial(int k) {
    std::int64_t f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

inline std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace whitney

#endif
