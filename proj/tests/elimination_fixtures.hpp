// Random parametric systems shared by the elimination tests and the acceptance run.
#ifndef WHITNEY_TESTS_ELIMINATION_FIXTURES_HPP
#define WHITNEY_TESTS_ELIMINATION_FIXTURES_HPP

#include <whitney/elimination.hpp>

#include <algorithm>
#include <random>
#include <vector>

namespace fixtures {

using whitney::ParamLinearSystem;
using whitney::Point;

// Random parametric system whose entries are low-degree polynomials in (x1, x2).
// With probability 1/2 the matrix is built as a product U(x) V(x) of lower inner rank.
struct RandomSystem {
    int N, M, inner;
    std::vector<double> u, v, g;  // polynomial coefficients, 3 per entry: a + b x1 + c x2
    bool factored;

    static double poly(const std::vector<double>& c, std::size_t at, const Point& x) {
        return c[at] + c[at + 1] * x[0] + c[at + 2] * x[1];
    }

    ParamLinearSystem system() const {
        ParamLinearSystem s;
        s.N = N;
        s.M = M;
        auto self = *this;
        s.coeff = [self](const Point& x, int i, int j) {
            if (!self.factored) return poly(self.u, 3 * (i * self.M + j), x);
            double acc = 0;
            for (int t = 0; t < self.inner; ++t) acc += poly(self.u, 3 * (i * self.inner + t), x) * poly(self.v, 3 * (t * self.M + j), x);
            return acc;
        };
        s.rhs = [self](const Point& x, int i) { return poly(self.g, 3 * i, x); };
        return s;
    }
};

inline RandomSystem random_system(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> dim(1, 5), coin(0, 1), sparse(0, 3);
    std::uniform_real_distribution<double> c(-1, 1);
    RandomSystem r;
    r.N = dim(rng);
    r.M = dim(rng);
    r.factored = coin(rng);
    r.inner = std::uniform_int_distribution<int>(1, std::max(1, std::min(r.N, r.M) - 1))(rng);
    auto fill = [&](std::vector<double>& v, int count) {
        v.resize(3 * count);
        for (auto& a : v) a = sparse(rng) == 0 ? 0.0 : c(rng);
    };
    fill(r.u, r.factored ? r.N * r.inner : r.N * r.M);
    fill(r.v, r.inner * r.M);
    fill(r.g, r.N);
    return r;
}

inline std::vector<Point> random_points(std::mt19937_64& rng, int count) {
    // a coarse lattice so that coefficient zeros and ties actually occur
    std::uniform_int_distribution<int> d(-4, 4);
    std::vector<Point> out;
    for (int i = 0; i < count; ++i) out.push_back({d(rng) / 4.0, d(rng) / 4.0});
    return out;
}

}  // namespace fixtures

#endif
