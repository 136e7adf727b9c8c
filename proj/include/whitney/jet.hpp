// m-jets of functions R^n -> R^D in Taylor form, and the jet-ring product.
#ifndef WHITNEY_JET_HPP
#define WHITNEY_JET_HPP

#include "multi_index.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace whitney {

class JetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A truncated Taylor polynomial anchored at `base`. Coefficient i stores
// d^a P(base) / a! for the multi-index a = layout.at(i).
template <class T>
class Jet {
public:
    Jet() = default;

    Jet(int n, int m, std::vector<T> base)
        : layout_(JetLayout::get(n, m)), base_(std::move(base)), coeffs_(layout_->size(), T(0)) {
        if (static_cast<int>(base_.size()) != n) throw JetError("Jet: base point has wrong dimension");
    }

    Jet(int n, int m, std::vector<T> base, std::vector<T> coeffs)
        : layout_(JetLayout::get(n, m)), base_(std::move(base)), coeffs_(std::move(coeffs)) {
        if (static_cast<int>(base_.size()) != n) throw JetError("Jet: base point has wrong dimension");
        if (static_cast<int>(coeffs_.size()) != layout_->size()) throw JetError("Jet: coefficient count does not match C(n+m,n)");
    }

    static Jet constant(int n, int m, std::vector<T> base, const T& value) {
        Jet j(n, m, std::move(base));
        j.coeffs_[0] = value;
        return j;
    }

    // The coordinate function x_i, expanded about the base point.
    static Jet coordinate(int n, int m, std::vector<T> base, int i) {
        Jet j(n, m, std::move(base));
        j.coeffs_[0] = j.base_[i];
        if (m >= 1) {
            MultiIndex e(n, 0);
            e[i] = 1;
            j.coeffs_[j.layout_->find(e)] = T(1);
        }
        return j;
    }

    int n() const { return layout_->n(); }
    int m() const { return layout_->m(); }
    int size() const { return layout_->size(); }
    const JetLayout& layout() const { return *layout_; }
    const std::vector<T>& base() const { return base_; }
    const std::vector<T>& coeffs() const { return coeffs_; }
    std::vector<T>& coeffs() { return coeffs_; }

    T& operator[](int i) { return coeffs_[i]; }
    const T& operator[](int i) const { return coeffs_[i]; }
    T& coeff(const MultiIndex& a) { return coeffs_[layout_->find(a)]; }
    const T& coeff(const MultiIndex& a) const { return coeffs_[layout_->find(a)]; }

    bool same_space(const Jet& o) const { return layout_ && o.layout_ && n() == o.n() && m() == o.m(); }

    Jet& operator+=(const Jet& o) {
        require_compatible(o);
        for (int i = 0; i < size(); ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        require_compatible(o);
        for (int i = 0; i < size(); ++i) coeffs_[i] -= o.coeffs_[i];
        return *this;
    }
    Jet& operator*=(const T& s) {
        for (auto& c : coeffs_) c *= s;
        return *this;
    }
    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator-(Jet a) { return a *= T(-1); }
    friend Jet operator*(Jet a, const T& s) { return a *= s; }
    friend Jet operator*(const T& s, Jet a) { return a *= s; }

    // Multiply as polynomials, then drop every monomial of degree above m.
    Jet multiply(const Jet& o) const {
        require_compatible(o);
        Jet out(n(), m(), base_);
        for (const auto& p : layout_->products()) out.coeffs_[p.target] += coeffs_[p.left] * o.coeffs_[p.right];
        return out;
    }

    // Exact partial derivative d^beta P at an arbitrary point.
    T derivative(const MultiIndex& beta, const std::vector<T>& point) const {
        if (static_cast<int>(beta.size()) != n()) throw JetError("Jet::derivative: multi-index has wrong dimension");
        if (order(beta) > m()) throw JetError("Jet::derivative: |alpha| exceeds the jet order");
        if (static_cast<int>(point.size()) != n()) throw JetError("Jet::derivative: point has wrong dimension");
        std::vector<T> h(n());
        for (int k = 0; k < n(); ++k) h[k] = point[k] - base_[k];
        T sum(0);
        for (int i = 0; i < size(); ++i) {
            const MultiIndex& a = layout_->at(i);
            bool dominates = true;
            for (int k = 0; k < n(); ++k) dominates = dominates && a[k] >= beta[k];
            if (!dominates || coeffs_[i] == T(0)) continue;
            T term = coeffs_[i];
            for (int k = 0; k < n(); ++k) {
                // falling factorial a_k (a_k - 1) ... (a_k - beta_k + 1)
                std::int64_t ff = 1;
                for (int t = 0; t < beta[k]; ++t) ff *= (a[k] - t);
                term *= T(ff);
                term *= integer_power(h[k], a[k] - beta[k]);
            }
            sum += term;
        }
        return sum;
    }

    T evaluate(const std::vector<T>& point) const { return derivative(MultiIndex(n(), 0), point); }

    // d^alpha P at the base point, i.e. alpha! times the stored coefficient.
    T derivative_at_base(const MultiIndex& alpha) const { return coeff(alpha) * T(index_factorial(alpha)); }

    // Re-expand the same polynomial about another point.
    Jet rebase(const std::vector<T>& newbase) const {
        if (static_cast<int>(newbase.size()) != n()) throw JetError("Jet::rebase: point has wrong dimension");
        Jet out(n(), m(), newbase);
        for (int i = 0; i < size(); ++i) {
            const MultiIndex& a = layout_->at(i);
            out.coeffs_[i] = derivative(a, newbase) / T(index_factorial(a));
        }
        return out;
    }

    // Same polynomial truncated (or zero-padded) to another order.
    Jet with_order(int new_m) const {
        Jet out(n(), new_m, base_);
        for (int i = 0; i < out.size(); ++i) {
            const MultiIndex& a = out.layout_->at(i);
            if (order(a) <= m()) out.coeffs_[i] = coeffs_[layout_->find(a)];
        }
        return out;
    }

    friend bool operator==(const Jet& a, const Jet& b) {
        return a.same_space(b) && a.base_ == b.base_ && a.coeffs_ == b.coeffs_;
    }

private:
    void require_compatible(const Jet& o) const {
        if (!same_space(o)) throw JetError("jet space mismatch");
        if (base_ != o.base_) throw JetError("jet base mismatch");
    }

    std::shared_ptr<const JetLayout> layout_;
    std::vector<T> base_;
    std::vector<T> coeffs_;
};

template <class T>
Jet<T> jet_multiply(const Jet<T>& a, const Jet<T>& b) {
    return a.multiply(b);
}

template <class T>
Jet<T> jet_rebase(const Jet<T>& a, const std::vector<T>& newbase) {
    return a.rebase(newbase);
}

template <class T>
T jet_query(const Jet<T>& a, const MultiIndex& alpha, const std::vector<T>& point) {
    return a.derivative(alpha, point);
}

// Element of the D-fold product of the jet ring at a common base point.
template <class T>
class JetVector {
public:
    JetVector() = default;
    explicit JetVector(std::vector<Jet<T>> components) : comps_(std::move(components)) {
        if (comps_.empty()) throw JetError("JetVector: need at least one component");
        for (const auto& c : comps_) {
            if (!c.same_space(comps_.front())) throw JetError("JetVector: components live in different jet spaces");
            if (c.base() != comps_.front().base()) throw JetError("JetVector: components have different base points");
        }
    }
    static JetVector zero(const JetSpace& s, const std::vector<T>& base) {
        std::vector<Jet<T>> c;
        for (int k = 0; k < s.D; ++k) c.emplace_back(s.n, s.m, base);
        return JetVector(std::move(c));
    }

    int D() const { return static_cast<int>(comps_.size()); }
    JetSpace space() const { return JetSpace(comps_.front().n(), comps_.front().m(), D()); }
    const std::vector<T>& base() const { return comps_.front().base(); }
    const Jet<T>& operator[](int k) const { return comps_[k]; }
    Jet<T>& operator[](int k) { return comps_[k]; }
    const std::vector<Jet<T>>& components() const { return comps_; }

    // Flat coefficient vector: component-major, graded-lex within a component.
    std::vector<T> flat() const {
        std::vector<T> v;
        for (const auto& c : comps_) v.insert(v.end(), c.coeffs().begin(), c.coeffs().end());
        return v;
    }
    static JetVector from_flat(const JetSpace& s, const std::vector<T>& base, const std::vector<T>& v) {
        if (static_cast<int>(v.size()) != s.total_dim()) throw JetError("JetVector::from_flat: wrong length");
        const int d = s.scalar_dim();
        std::vector<Jet<T>> c;
        for (int k = 0; k < s.D; ++k)
            c.emplace_back(s.n, s.m, base, std::vector<T>(v.begin() + k * d, v.begin() + (k + 1) * d));
        return JetVector(std::move(c));
    }

    JetVector rebase(const std::vector<T>& newbase) const {
        std::vector<Jet<T>> c;
        for (const auto& j : comps_) c.push_back(j.rebase(newbase));
        return JetVector(std::move(c));
    }
    // Scalar jet acting on every component through the ring product.
    JetVector scale(const Jet<T>& s) const {
        std::vector<Jet<T>> c;
        for (const auto& j : comps_) c.push_back(s.multiply(j));
        return JetVector(std::move(c));
    }

private:
    std::vector<Jet<T>> comps_;
};

// max_k |d^alpha (P_k - Q_k)(x_P)| / |x_P - x_Q|^(m - |alpha|)
template <class T>
double whitney_quotient(const JetVector<T>& P, const JetVector<T>& Q, const MultiIndex& alpha) {
    if (P.D() != Q.D() || !(P.space() == Q.space())) throw JetError("whitney_quotient: jet space mismatch");
    const int m = P.space().m;
    if (order(alpha) > m) throw JetError("whitney_quotient: |alpha| exceeds the jet order");
    double dist2 = 0.0;
    for (int k = 0; k < P.space().n; ++k) {
        const double d = to_double(P.base()[k] - Q.base()[k]);
        dist2 += d * d;
    }
    if (dist2 == 0.0) throw JetError("whitney_quotient: coincident base points");
    const double denom = std::pow(std::sqrt(dist2), m - order(alpha));
    double worst = 0.0;
    for (int k = 0; k < P.D(); ++k) {
        const T dp = P[k].derivative(alpha, P.base());
        const T dq = Q[k].derivative(alpha, P.base());
        worst = std::max(worst, std::abs(to_double(T(dp - dq))));
    }
    return worst / denom;
}

}  // namespace whitney

#endif
