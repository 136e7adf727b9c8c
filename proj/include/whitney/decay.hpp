// Log-log regression used wherever a limit or a little-o rate is certified
// from finitely many samples along a geometric ladder.
#ifndef WHITNEY_DECAY_HPP
#define WHITNEY_DECAY_HPP

#include <cmath>
#include <limits>
#include <vector>

namespace whitney {

struct DecayFit {
    double slope = 0.0;      // fitted exponent s in v ~ c r^s
    double intercept = 0.0;  // log c
    bool all_zero = false;   // every sample at or below the floor
    int samples = 0;

    // Decay exponent exceeding `target`; identically vanishing data always passes.
    bool exceeds(double target) const { return all_zero || slope > target; }
};

// Fit log(max(v, floor)) = intercept + slope * log(r). Radii must be positive.
inline DecayFit fit_decay(const std::vector<double>& radii, const std::vector<double>& values, double floor = 1e-300) {
    DecayFit fit;
    fit.samples = static_cast<int>(radii.size());
    bool any_above = false;
    for (double v : values) any_above = any_above || std::abs(v) > floor;
    if (!any_above) {
        fit.all_zero = true;
        fit.slope = std::numeric_limits<double>::infinity();
        return fit;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double lx = std::log(radii[i]);
        const double ly = std::log(std::max(std::abs(values[i]), floor));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    fit.slope = den == 0 ? 0.0 : (n * sxy - sx * sy) / den;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

// r_k = start * ratio^k for k = 0..count-1
inline std::vector<double> geometric_ladder(double start, double ratio, int count) {
    std::vector<double> out;
    out.reserve(count);
    double r = start;
    for (int k = 0; k < count; ++k) {
        out.push_back(r);
        r *= ratio;
    }
    return out;
}

}  // namespace whitney

#endif
