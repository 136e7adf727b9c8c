// Selecting a bounded number of seminorms that dominate a whole family.
#ifndef WHITNEY_HELLY_HPP
#define WHITNEY_HELLY_HPP

#include "linalg.hpp"
#include "sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace whitney {

class HellyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SeminormMode { euclidean, max_abs, sum_abs };

// p(v) = sum over terms of |M_t v| in the family's mode.
struct Seminorm {
    std::vector<Matrix> terms;

    Seminorm() = default;
    explicit Seminorm(Matrix M) { terms.push_back(std::move(M)); }

    double operator()(const Vector& v, SeminormMode mode) const {
        double s = 0.0;
        for (const auto& M : terms) {
            if (M.rows() == 0) continue;
            const Vector w = M * v;
            switch (mode) {
                case SeminormMode::euclidean: s += w.norm(); break;
                case SeminormMode::max_abs: s += w.cwiseAbs().maxCoeff(); break;
                case SeminormMode::sum_abs: s += w.cwiseAbs().sum(); break;
            }
        }
        return s;
    }
    Matrix stacked(int dim) const {
        int rows = 0;
        for (const auto& M : terms) rows += static_cast<int>(M.rows());
        Matrix S(rows, dim);
        int r = 0;
        for (const auto& M : terms) {
            S.middleRows(r, M.rows()) = M;
            r += static_cast<int>(M.rows());
        }
        return S;
    }
    Seminorm composed(const Matrix& B) const {
        Seminorm out;
        for (const auto& M : terms) out.terms.push_back(M * B);
        return out;
    }
};

struct SeminormFamily {
    int dim = 0;
    SeminormMode mode = SeminormMode::euclidean;
    std::vector<Seminorm> members;

    double eval(int w, const Vector& v) const { return members[w](v, mode); }
    double sup(const Vector& v) const {
        double s = 0.0;
        for (std::size_t w = 0; w < members.size(); ++w) s = std::max(s, eval(static_cast<int>(w), v));
        return s;
    }
};

struct NullSpaceReduction {
    Matrix common_null;          // orthonormal basis of H, the common null space
    Matrix complement;           // orthonormal basis of a complement of H
    std::vector<int> lambdas;    // at most dim members whose null spaces already cut out H
    SeminormFamily quotient;     // p*_w = sum of p_lambda + p_w, restricted to the complement
};

inline NullSpaceReduction null_space_reduce(const SeminormFamily& fam) {
    NullSpaceReduction out;
    const int D = fam.dim;
    Matrix H = Matrix::Identity(D, D);
    for (std::size_t w = 0; w < fam.members.size() && H.cols() > 0; ++w) {
        const Matrix restricted = fam.members[w].stacked(D) * H;
        if (restricted.size() == 0) continue;
        Eigen::JacobiSVD<Matrix> svd(restricted, Eigen::ComputeFullV);
        const int r = numerical_rank(svd.singularValues());
        if (r == 0) continue;
        out.lambdas.push_back(static_cast<int>(w));
        H = H * svd.matrixV().rightCols(H.cols() - r);
    }
    out.common_null = H;
    out.complement = orthogonal_complement(H, D);
    out.quotient.dim = static_cast<int>(out.complement.cols());
    out.quotient.mode = fam.mode;
    if (out.quotient.dim == 0) return out;
    Seminorm base;
    for (int l : out.lambdas)
        for (const auto& M : fam.members[l].terms) base.terms.push_back(M * out.complement);
    for (const auto& mem : fam.members) {
        Seminorm s = base;
        for (const auto& M : mem.terms) s.terms.push_back(M * out.complement);
        out.quotient.members.push_back(std::move(s));
    }
    return out;
}

struct SelectionParams {
    int sphere_samples = 4000;
    std::uint64_t seed = 12345;
    double plateau = 0.01;               // stop when the ratio improves by less than this fraction
    int max_members = -1;                // L cap; negative means 3^dim
    double constant_margin = 1.02;       // multiplier applied to the sampled ratio
};

struct SelectionResult {
    std::vector<int> indices;
    double C = 1.0;
    int L = 0;
    double sampled_ratio = 1.0;
    bool degenerate = false;  // some numerical rank sat close to the cutoff
};

namespace detail {

inline double ratio_of(const std::vector<double>& sup_vals, const std::vector<double>& sel_max) {
    double worst = 0.0;
    for (std::size_t i = 0; i < sup_vals.size(); ++i) {
        if (sup_vals[i] == 0.0) continue;
        if (sel_max[i] == 0.0) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, sup_vals[i] / sel_max[i]);
    }
    return std::max(worst, 1.0);
}

inline int default_cap(int dim) {
    int c = 1;
    for (int i = 0; i < dim; ++i) c *= 3;
    return c;
}

}  // namespace detail

// Greedy selection: start from the null-space witnesses, then repeatedly add the
// member that most lowers the sampled sup-ratio until the improvement plateaus.
inline SelectionResult select_representatives(const SeminormFamily& fam, const SelectionParams& params = {}) {
    if (fam.members.empty()) throw HellyError("select_representatives: empty family");
    const NullSpaceReduction red = null_space_reduce(fam);
    SelectionResult res;
    const int cap = params.max_members > 0 ? params.max_members : detail::default_cap(fam.dim);
    if (red.complement.cols() == 0) {
        // every member vanishes identically: any single member dominates
        res.indices = {0};
        res.L = 1;
        return res;
    }
    const auto samples = sphere_samples(static_cast<int>(red.complement.cols()), params.sphere_samples, params.seed);
    const std::size_t S = samples.size(), W = fam.members.size();
    std::vector<std::vector<double>> vals(W, std::vector<double>(S));
    std::vector<double> sup_vals(S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        const Vector v = red.complement * samples[s];
        for (std::size_t w = 0; w < W; ++w) {
            vals[w][s] = fam.eval(static_cast<int>(w), v);
            sup_vals[s] = std::max(sup_vals[s], vals[w][s]);
        }
    }
    std::vector<double> sel_max(S, 0.0);
    auto add = [&](int w) {
        res.indices.push_back(w);
        for (std::size_t s = 0; s < S; ++s) sel_max[s] = std::max(sel_max[s], vals[w][s]);
    };
    for (int l : red.lambdas) add(l);
    double ratio = detail::ratio_of(sup_vals, sel_max);
    while (ratio > 1.0 + 1e-12 && static_cast<int>(res.indices.size()) < cap) {
        double best = ratio;
        int best_w = -1;
        for (std::size_t w = 0; w < W; ++w) {
            if (std::find(res.indices.begin(), res.indices.end(), static_cast<int>(w)) != res.indices.end()) continue;
            std::vector<double> trial(S);
            for (std::size_t s = 0; s < S; ++s) trial[s] = std::max(sel_max[s], vals[w][s]);
            const double r = detail::ratio_of(sup_vals, trial);
            if (r < best) {
                best = r;
                best_w = static_cast<int>(w);
            }
        }
        if (best_w < 0) break;
        const bool finite_before = std::isfinite(ratio);
        if (finite_before && best > ratio * (1.0 - params.plateau)) break;
        add(best_w);
        ratio = best;
    }
    res.L = static_cast<int>(res.indices.size());
    res.sampled_ratio = ratio;
    res.C = ratio <= 1.0 + 1e-12 ? 1.0 : ratio * params.constant_margin;
    return res;
}

struct DominationReport {
    bool ok = true;
    double worst_ratio = 1.0;
    std::optional<Vector> witness;
    std::string message;
};

inline DominationReport verify_domination(const SeminormFamily& fam, const SelectionResult& sel, int samples = 10000,
                                          std::uint64_t seed = 987654321) {
    DominationReport rep;
    if (fam.dim == 0) return rep;
    for (const auto& v : sphere_samples(fam.dim, samples, seed)) {
        const double s = fam.sup(v);
        double m = 0.0;
        for (int w : sel.indices) m = std::max(m, fam.eval(w, v));
        if (s <= 1e-14 * std::max(1.0, v.norm())) continue;
        if (m == 0.0 || s / m > rep.worst_ratio) {
            rep.worst_ratio = m == 0.0 ? std::numeric_limits<double>::infinity() : s / m;
            if (rep.worst_ratio > sel.C * (1.0 + 1e-6)) {
                rep.ok = false;
                rep.witness = v;
            }
        }
    }
    if (!rep.ok) {
        rep.message = std::isfinite(rep.worst_ratio) ? "sampled ratio exceeds the selection constant"
                                                     : "every selected seminorm vanishes at the witness while the family does not";
    }
    return rep;
}

}  // namespace whitney

#endif
