// Deterministic low-discrepancy points on the unit sphere.
#ifndef WHITNEY_SAMPLING_HPP
#define WHITNEY_SAMPLING_HPP

#include "linalg.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace whitney {

inline double radical_inverse(std::uint64_t i, int base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

inline int nth_prime(int k) {
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
                                 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199};
    if (k < static_cast<int>(std::size(primes))) return primes[k];
    int p = primes[std::size(primes) - 1];
    int found = static_cast<int>(std::size(primes)) - 1;
    while (found < k) {
        p += 2;
        bool prime = true;
        for (int d = 3; d * d <= p && prime; d += 2) prime = p % d != 0;
        if (prime) ++found;
    }
    return p;
}

// Halton points pushed through the Gaussian quantile and normalized, then
// rotated by a seeded orthogonal matrix so that different seeds give fresh samples.
inline std::vector<Vector> sphere_samples(int dim, int count, std::uint64_t seed) {
    std::vector<Vector> out;
    if (dim <= 0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Matrix G(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) G(i, j) = gauss(rng);
    Eigen::HouseholderQR<Matrix> qr(G);
    const Matrix R = qr.householderQ();
    const std::uint64_t skip = 1 + (seed % 997);
    out.reserve(count);
    for (std::uint64_t i = 0; static_cast<int>(out.size()) < count; ++i) {
        Vector v(dim);
        for (int k = 0; k < dim; ++k) {
            const double u = radical_inverse(i + skip, nth_prime(k));
            const double uc = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
            v(k) = std::sqrt(2.0) * boost::math::erf_inv(2.0 * uc - 1.0);
        }
        const double n = v.norm();
        if (n < 1e-12) continue;
        out.push_back(R * (v / n));
    }
    return out;
}

}  // namespace whitney

#endif
