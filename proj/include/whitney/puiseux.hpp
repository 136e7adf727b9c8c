// Truncated Puiseux series sum c_q x^(q/N), curve ladders, and the
// uniformity-exponent estimator for sampled two-variable data.
#ifndef WHITNEY_PUISEUX_HPP
#define WHITNEY_PUISEUX_HPP

#include "scalar.hpp"
#include "taylor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace whitney {

class PuiseuxError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class T = rational>
class PuiseuxPoly {
public:
    using Exponent = rational;

    PuiseuxPoly() = default;
    explicit PuiseuxPoly(int N) : N_(N) {
        if (N < 1) throw PuiseuxError("PuiseuxPoly: ramification index must be positive");
    }

    // c x^(q/N)
    static PuiseuxPoly monomial(const T& c, std::int64_t q, int N = 1) {
        PuiseuxPoly p(N);
        p.add_term(q, c);
        return p.canonical();
    }
    static PuiseuxPoly constant(const T& c) { return monomial(c, 0, 1); }
    static PuiseuxPoly identity() { return monomial(T(1), 1, 1); }

    int N() const { return N_; }
    const std::map<std::int64_t, T>& terms() const { return terms_; }
    // Largest retained numerator over N; empty means the series is an exact finite sum.
    const std::optional<std::int64_t>& trunc() const { return trunc_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(std::int64_t q, const T& c) {
        if (trunc_ && q > *trunc_) return;
        T& slot = terms_[q];
        slot += c;
        if (slot == T(0)) terms_.erase(q);
    }
    void set_trunc(std::optional<std::int64_t> t) {
        trunc_ = t;
        if (t)
            for (auto it = terms_.begin(); it != terms_.end();) it = (it->first > *t) ? terms_.erase(it) : std::next(it);
    }

    // Express over ramification L, a multiple of N.
    PuiseuxPoly with_ramification(int L) const {
        if (L % N_ != 0) throw PuiseuxError("with_ramification: target is not a multiple of N");
        const std::int64_t f = L / N_;
        PuiseuxPoly out(L);
        for (const auto& [q, c] : terms_) out.terms_[q * f] = c;
        if (trunc_) out.trunc_ = *trunc_ * f;
        return out;
    }

    // Smallest N representing the same series.
    PuiseuxPoly canonical() const {
        std::int64_t g = N_;
        for (const auto& [q, c] : terms_) g = std::gcd(g, q);
        if (trunc_) g = std::gcd(g, *trunc_);
        if (g <= 1) return *this;
        PuiseuxPoly out(static_cast<int>(N_ / g));
        for (const auto& [q, c] : terms_) out.terms_[q / g] = c;
        if (trunc_) out.trunc_ = *trunc_ / g;
        return out;
    }
    bool is_canonical() const { return canonical().N_ == N_; }

    Exponent leading_order() const {
        if (terms_.empty()) throw PuiseuxError("leading_order: zero series");
        return Exponent(terms_.begin()->first, N_);
    }
    const T& leading_coefficient() const {
        if (terms_.empty()) throw PuiseuxError("leading_coefficient: zero series");
        return terms_.begin()->second;
    }
    // Truncation as an exponent, or nullopt for an exact sum.
    std::optional<Exponent> trunc_exponent() const {
        if (!trunc_) return std::nullopt;
        return Exponent(*trunc_, N_);
    }

    friend PuiseuxPoly operator+(const PuiseuxPoly& a, const PuiseuxPoly& b) { return combine(a, b, T(1)); }
    friend PuiseuxPoly operator-(const PuiseuxPoly& a, const PuiseuxPoly& b) { return combine(a, b, T(-1)); }
    friend PuiseuxPoly operator*(const PuiseuxPoly& a, const PuiseuxPoly& b) {
        const int L = std::lcm(a.N_, b.N_);
        PuiseuxPoly A = a.with_ramification(L), B = b.with_ramification(L);
        PuiseuxPoly out(L);
        // product known up to min(trunc_a + ord_b, trunc_b + ord_a)
        std::optional<std::int64_t> t;
        auto bound = [&](const PuiseuxPoly& x, const PuiseuxPoly& y) -> std::optional<std::int64_t> {
            if (!x.trunc_) return std::nullopt;
            if (y.terms_.empty()) return std::nullopt;
            return *x.trunc_ + y.terms_.begin()->first;
        };
        for (auto cand : {bound(A, B), bound(B, A)})
            if (cand) t = t ? std::min(*t, *cand) : *cand;
        out.trunc_ = t;
        for (const auto& [qa, ca] : A.terms_)
            for (const auto& [qb, cb] : B.terms_) out.add_term(qa + qb, ca * cb);
        return out.canonical();
    }
    friend PuiseuxPoly operator*(const T& s, const PuiseuxPoly& a) {
        PuiseuxPoly out = a;
        out.terms_.clear();
        for (const auto& [q, c] : a.terms_) out.add_term(q, s * c);
        return out;
    }
    friend bool operator==(const PuiseuxPoly& a, const PuiseuxPoly& b) {
        PuiseuxPoly ca = a.canonical(), cb = b.canonical();
        return ca.N_ == cb.N_ && ca.terms_ == cb.terms_ && ca.trunc_ == cb.trunc_;
    }

    // Termwise d/dx: c x^(q/N) -> c (q/N) x^(q/N - 1).
    PuiseuxPoly derivative() const {
        PuiseuxPoly out(N_);
        for (const auto& [q, c] : terms_)
            if (q != 0) out.terms_[q - N_] = c * T(q) / T(N_);
        if (trunc_) out.trunc_ = *trunc_ - N_;
        return out.canonical();
    }

    // Value at x > 0 (x = 0 allowed when every exponent is non-negative).
    double evaluate(double x) const { return derivative_value(0, x); }

    // k-th derivative at x.
    double derivative_value(int k, double x) const {
        double s = 0.0;
        for (const auto& [q, c] : terms_) {
            const double p = static_cast<double>(q) / N_;
            double f = 1.0;
            for (int j = 0; j < k; ++j) f *= (p - j);
            if (f == 0.0) continue;
            const double e = p - k;
            if (x == 0.0) {
                if (e == 0.0) s += to_double(c) * f;
                else if (e < 0.0) return std::numeric_limits<double>::infinity();
                continue;
            }
            s += to_double(c) * f * std::pow(x, e);
        }
        return s;
    }

    // Taylor coefficients psi^(j)(x0)/j!, j = 0..order, at x0 > 0.
    std::vector<double> taylor(double x0, int order) const {
        std::vector<double> out(order + 1, 0.0);
        for (const auto& [q, c] : terms_) {
            const double p = static_cast<double>(q) / N_;
            double b = 1.0;  // binomial(p, j)
            for (int j = 0; j <= order; ++j) {
                if (b == 0.0) break;
                out[j] += to_double(c) * b * std::pow(x0, p - j);
                b *= (p - j) / (j + 1);
            }
        }
        return out;
    }

    // psi(x) composed with a jet of x (Taylor mode).
    Jet<double> compose(const Jet<double>& xjet) const {
        return compose_univariate(xjet, taylor(xjet[0], xjet.m()));
    }

    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::string s;
        for (const auto& [q, c] : terms_) {
            if (!s.empty()) s += " + ";
            s += "(" + scalar_string(c) + ")*x^(" + std::to_string(q) + "/" + std::to_string(N_) + ")";
        }
        return s;
    }

private:
    static std::string scalar_string(const T& c) {
        if constexpr (std::is_same_v<T, rational>) return c.str();
        else return std::to_string(c);
    }

    static PuiseuxPoly combine(const PuiseuxPoly& a, const PuiseuxPoly& b, const T& sign) {
        const int L = std::lcm(a.N_, b.N_);
        PuiseuxPoly A = a.with_ramification(L), B = b.with_ramification(L);
        std::optional<std::int64_t> t = A.trunc_;
        if (B.trunc_) t = t ? std::min(*t, *B.trunc_) : *B.trunc_;
        PuiseuxPoly out(L);
        out.trunc_ = t;
        for (const auto& [q, c] : A.terms_) out.add_term(q, c);
        for (const auto& [q, c] : B.terms_) out.add_term(q, sign * c);
        return out.canonical();
    }

    int N_ = 1;
    std::map<std::int64_t, T> terms_;
    std::optional<std::int64_t> trunc_;
};

using Puiseux = PuiseuxPoly<rational>;

enum class PuiseuxOp { add, sub, mul };

template <class T>
PuiseuxPoly<T> puiseux_mul_add(const PuiseuxPoly<T>& a, const PuiseuxPoly<T>& b, PuiseuxOp op) {
    switch (op) {
        case PuiseuxOp::add: return a + b;
        case PuiseuxOp::sub: return a - b;
        case PuiseuxOp::mul: return a * b;
    }
    return a;
}

template <class T>
PuiseuxPoly<T> puiseux_derivative(const PuiseuxPoly<T>& a) {
    return a.derivative();
}

template <class T>
rational leading_order(const PuiseuxPoly<T>& a) {
    return a.leading_order();
}

// psi_0 < psi_1 < ... < psi_smax on (0, delta).
struct CurveLadder {
    std::vector<Puiseux> curves;
    double delta = 1.0;
};

struct LadderValidation {
    bool valid = false;
    double delta_refined = 0.0;
    std::string reason;
};

namespace detail {

// Largest d' <= delta with g > 0 on (0, d'], given g > 0 near 0.
inline double positive_prefix(const Puiseux& g, double delta) {
    constexpr int kGrid = 4000;
    std::vector<double> xs;
    for (int i = 0; i < kGrid; ++i) xs.push_back(delta * std::pow(10.0, -12.0 * (kGrid - 1 - i) / (kGrid - 1)));
    for (int i = 1; i <= kGrid; ++i) xs.push_back(delta * i / kGrid);
    std::sort(xs.begin(), xs.end());
    double last_good = 0.0;
    for (double x : xs) {
        if (g.evaluate(x) > 0.0) {
            last_good = x;
            continue;
        }
        double lo = last_good, hi = x;
        for (int it = 0; it < 200 && hi - lo > 0; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (g.evaluate(mid) > 0.0) lo = mid;
            else hi = mid;
        }
        return lo;
    }
    return delta;
}

inline std::vector<double> wedge_probes(double delta) {
    std::vector<double> xs;
    for (int i = 0; i <= 400; ++i) xs.push_back(delta * std::pow(10.0, -8.0 * i / 400.0));
    return xs;
}

}  // namespace detail

inline LadderValidation curve_ladder_validate(const CurveLadder& ladder) {
    LadderValidation out;
    if (ladder.curves.empty()) {
        out.reason = "empty ladder";
        return out;
    }
    if (!(ladder.delta > 0)) {
        out.reason = "delta must be positive";
        return out;
    }
    double d = ladder.delta;
    for (std::size_t s = 0; s + 1 < ladder.curves.size(); ++s) {
        const Puiseux gap = ladder.curves[s + 1] - ladder.curves[s];
        if (gap.is_zero()) {
            out.reason = "curves " + std::to_string(s) + " and " + std::to_string(s + 1) + " coincide";
            return out;
        }
        if (gap.leading_coefficient() < 0) {
            out.reason = "curve " + std::to_string(s + 1) + " lies below curve " + std::to_string(s) + " near the origin";
            return out;
        }
        d = std::min(d, detail::positive_prefix(gap, d));
    }
    // The outer curves must stay inside the wedge 0 <= y <= x.
    for (double x : detail::wedge_probes(d)) {
        if (ladder.curves.front().evaluate(x) < 0.0 || ladder.curves.back().evaluate(x) > x * (1 + 1e-14)) {
            out.reason = "ladder leaves the wedge 0 <= y <= x";
            return out;
        }
    }
    out.valid = d > 0;
    out.delta_refined = d;
    if (!out.valid) out.reason = "no positive validated radius";
    return out;
}

struct UniformitySample {
    double x, y, value;
};

struct UniformityResult {
    int N = 0;
    std::vector<double> xs;        // distinct x values, ascending
    std::vector<double> envelope;  // A(x) = sup_y |F| / y^(1/N) at each x
};

// Smallest integer N <= cap with |F(x,y)| <= A(x) y^(1/N) on the samples,
// where the per-x supremum must be stable between the two finest y-decades.
inline UniformityResult uniformity_exponent(const std::vector<UniformitySample>& samples, int cap = 16, double stability = 1.05) {
    std::map<double, std::vector<std::pair<double, double>>> by_x;
    for (const auto& s : samples) {
        if (!(s.y > 0)) throw PuiseuxError("uniformity_exponent: sample heights must be positive");
        if (!std::isfinite(s.value)) throw PuiseuxError("uniformity_exponent: F is not bounded on the grid");
        by_x[s.x].push_back({s.y, std::abs(s.value)});
    }
    if (by_x.empty()) throw PuiseuxError("uniformity_exponent: no samples");

    struct Column {
        double x;
        std::vector<std::pair<double, double>> fine, next, all;
    };
    std::vector<Column> cols;
    for (auto& [x, pts] : by_x) {
        std::sort(pts.begin(), pts.end());
        const double ymin = pts.front().first;
        Column c{x, {}, {}, pts};
        for (const auto& p : pts) {
            if (p.first <= 10 * ymin) c.fine.push_back(p);
            else if (p.first <= 100 * ymin) c.next.push_back(p);
        }
        if (c.fine.empty() || c.next.empty())
            throw PuiseuxError("uniformity_exponent: need two y-decades of samples at x = " + std::to_string(x));
        auto sup = [](const auto& v) {
            double s = 0;
            for (const auto& p : v) s = std::max(s, p.second);
            return s;
        };
        // F must tend to zero as y -> 0 at every x
        const double sf = sup(c.fine), sn = sup(c.next);
        if (sf > 0 && !(sf < sn))
            throw PuiseuxError("uniformity_exponent: F does not tend to 0 as y -> 0 at x = " + std::to_string(x));
        cols.push_back(std::move(c));
    }

    for (int N = 1; N <= cap; ++N) {
        bool ok = true;
        UniformityResult res;
        res.N = N;
        for (const auto& c : cols) {
            auto ratio_sup = [N](const auto& v) {
                double s = 0;
                for (const auto& p : v) s = std::max(s, p.second / std::pow(p.first, 1.0 / N));
                return s;
            };
            const double sf = ratio_sup(c.fine), sn = ratio_sup(c.next);
            if (!(std::isfinite(sf)) || sf > stability * sn) {
                ok = false;
                break;
            }
            res.xs.push_back(c.x);
            res.envelope.push_back(ratio_sup(c.all));
        }
        if (ok) return res;
    }
    throw PuiseuxError("uniformity_exponent: no N <= " + std::to_string(cap) + " gives a stable envelope");
}

}  // namespace whitney

#endif
