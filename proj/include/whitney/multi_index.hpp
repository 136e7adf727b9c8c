// Multi-indices and the cached graded-lex layout of the scalar jet space.
#ifndef WHITNEY_MULTI_INDEX_HPP
#define WHITNEY_MULTI_INDEX_HPP

#include "scalar.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace whitney {

using MultiIndex = std::vector<int>;

inline int order(const MultiIndex& a) { return std::accumulate(a.begin(), a.end(), 0); }

inline std::int64_t index_factorial(const MultiIndex& a) {
    std::int64_t f = 1;
    for (int e : a) f *= factorial(e);
    return f;
}

// Dimensions of a jet space: spatial dimension n, order m, codomain dimension D.
struct JetSpace {
    int n = 1;
    int m = 0;
    int D = 1;

    JetSpace() = default;
    JetSpace(int n_, int m_, int D_ = 1) : n(n_), m(m_), D(D_) {
        if (n < 1 || m < 0 || D < 1) throw std::invalid_argument("JetSpace: need n >= 1, m >= 0, D >= 1");
    }

    // Dimension of the scalar jet space, C(n+m, n).
    int scalar_dim() const { return static_cast<int>(binomial(n + m, n)); }
    int total_dim() const { return D * scalar_dim(); }

    friend bool operator==(const JetSpace&, const JetSpace&) = default;
};

// Dense graded-lex enumeration of all multi-indices with |a| <= m.
// Within one degree, indices are ordered lexicographically descending,
// so for n = 2, m = 2 the order is 1, x, y, x^2, xy, y^2.
class JetLayout {
public:
    JetLayout(int n, int m) : n_(n), m_(m) {
        for (int d = 0; d <= m; ++d) {
            MultiIndex a(n, 0);
            enumerate_degree(a, 0, d);
        }
        for (std::size_t i = 0; i < indices_.size(); ++i) lookup_[indices_[i]] = static_cast<int>(i);
        for (std::size_t i = 0; i < indices_.size(); ++i) {
            for (std::size_t j = 0; j < indices_.size(); ++j) {
                MultiIndex s(n);
                for (int k = 0; k < n; ++k) s[k] = indices_[i][k] + indices_[j][k];
                if (order(s) <= m) products_.push_back({static_cast<int>(i), static_cast<int>(j), lookup_.at(s)});
            }
        }
    }

    int n() const { return n_; }
    int m() const { return m_; }
    int size() const { return static_cast<int>(indices_.size()); }
    const MultiIndex& at(int i) const { return indices_[i]; }
    const std::vector<MultiIndex>& indices() const { return indices_; }

    int find(const MultiIndex& a) const {
        auto it = lookup_.find(a);
        if (it == lookup_.end()) throw std::out_of_range("JetLayout: multi-index outside the jet space");
        return it->second;
    }
    bool contains(const MultiIndex& a) const { return lookup_.count(a) != 0; }

    struct Product {
        int left, right, target;
    };
    // All index pairs whose product monomial survives truncation.
    const std::vector<Product>& products() const { return products_; }

    static std::shared_ptr<const JetLayout> get(int n, int m) {
        static std::mutex mutex;
        static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
        std::lock_guard<std::mutex> lock(mutex);
        auto& slot = cache[{n, m}];
        if (!slot) slot = std::make_shared<const JetLayout>(n, m);
        return slot;
    }

private:
    void enumerate_degree(MultiIndex& a, int pos, int remaining) {
        if (pos == n_ - 1) {
            a[pos] = remaining;
            indices_.push_back(a);
            return;
        }
        for (int e = remaining; e >= 0; --e) {
            a[pos] = e;
            enumerate_degree(a, pos + 1, remaining - e);
        }
        a[pos] = 0;
    }

    int n_, m_;
    std::vector<MultiIndex> indices_;
    std::map<MultiIndex, int> lookup_;
    std::vector<Product> products_;
};

}  // namespace whitney

#endif
