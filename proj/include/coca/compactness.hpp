#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "coca/affinity.hpp"
#include "coca/error.hpp"
#include "coca/tensor.hpp"

namespace coca {

// Physical attributes carried by every node: area, mass, density, moment of
// inertia about the node's own centroid, and centroid position in original
// image coordinates (row, col).
struct NodeAttrs {
    Tensor area;      // [n]
    Tensor mass;      // [n]
    Tensor density;   // [n]
    Tensor inertia;   // [n]
    Tensor position;  // [n, 2]

    std::size_t n() const { return area.shape.empty() ? 0 : area.shape[0]; }
};

// Mask-scaled attribute copies for one anchor row each: x~[i][j] = X[j] * lambda[i][j].
struct IntermediateAttrs {
    Tensor area;     // [n, n]
    Tensor density;  // [n, n]
    Tensor inertia;  // [n, n]
    Tensor mass;     // [n, n], product of scaled area and scaled density
};

struct CompactnessScores {
    Tensor c;                         // [n], clamped to (0, 1]; zero-denominator rows are 0
    std::vector<std::uint8_t> zero_mass;  // rows whose denominator vanished
};

// Unit pixel attributes: area = mass = density = 1, inertia = 1/6 (unit square
// about its center), position = (row, col). Node order matches the row-major grid.
inline NodeAttrs init_pixel_attrs(std::size_t h, std::size_t w) {
    if (h == 0 || w == 0) throw ConfigError("init_pixel_attrs: empty grid");
    const std::size_t n = h * w;
    NodeAttrs a;
    a.area = Tensor::full({n}, 1.0);
    a.mass = Tensor::full({n}, 1.0);
    a.density = Tensor::full({n}, 1.0);
    a.inertia = Tensor::full({n}, 1.0 / 6.0);
    a.position = Tensor({n, 2});
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t q = 0; q < w; ++q) {
            a.position(r * w + q, 0) = static_cast<double>(r);
            a.position(r * w + q, 1) = static_cast<double>(q);
        }
    return a;
}

// Scales each attribute by the anchor's mask row; mass is re-derived as the
// product of the scaled area and scaled density, so it carries the mask squared.
inline IntermediateAttrs broadcast_scale(const NodeAttrs& attrs, const AffinityMasks& masks) {
    const std::size_t n = attrs.n();
    if (masks.n() != n) throw ConfigError("broadcast_scale: size mismatch");
    IntermediateAttrs t;
    t.area = Tensor({n, n});
    t.density = Tensor({n, n});
    t.inertia = Tensor({n, n});
    t.mass = Tensor({n, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double lam = masks.lambda(i, j);
            t.area(i, j) = attrs.area(j) * lam;
            t.density(i, j) = attrs.density(j) * lam;
            t.inertia(i, j) = attrs.inertia(j) * lam;
            t.mass(i, j) = t.area(i, j) * t.density(i, j);
        }
    return t;
}

// Squared Euclidean distances between node centroids (parallel-axis term).
inline Tensor position_sq_distances(const NodeAttrs& attrs) {
    const std::size_t n = attrs.n();
    Tensor d({n, n});
    for (std::size_t i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dr = attrs.position(i, 0) - attrs.position(j, 0);
            const double dc = attrs.position(i, 1) - attrs.position(j, 1);
            const double v = dr * dr + dc * dc;
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

namespace detail {

// Score of one soft mask around one anchor, unclamped. Numerator is the
// mass-area product of the masked region generalized to non-uniform density
// (pairwise min-density coupling); denominator is the masked moment of inertia
// about the anchor, own-inertia plus parallel-axis transport. Terms iterate in
// ascending node order over the mask support, so the sum is order-deterministic.
inline double mask_score_raw(const NodeAttrs& attrs, const double* lam, std::size_t n,
                             std::size_t anchor, bool* zero_den = nullptr) {
    const double two_pi = 6.283185307179586476925286766559;
    const double ar = attrs.position(anchor, 0);
    const double ac = attrs.position(anchor, 1);
    // support compression: zero-mask nodes contribute nothing to any term
    std::vector<std::size_t> sup;
    sup.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
        if (lam[j] != 0.0) sup.push_back(j);

    double num = 0.0, den = 0.0;
    std::vector<double> at(sup.size()), dt(sup.size());
    for (std::size_t u = 0; u < sup.size(); ++u) {
        const std::size_t j = sup[u];
        const double l = lam[j];
        at[u] = attrs.area(j) * l;
        dt[u] = attrs.density(j) * l;
        const double mt = at[u] * dt[u];
        const double it = attrs.inertia(j) * l;
        const double dr = attrs.position(j, 0) - ar;
        const double dc = attrs.position(j, 1) - ac;
        num += mt * at[u];
        den += it + mt * (dr * dr + dc * dc);
    }
    for (std::size_t u = 0; u < sup.size(); ++u)
        for (std::size_t v = u + 1; v < sup.size(); ++v)
            num += 2.0 * std::min(dt[u], dt[v]) * at[u] * at[v];

    den *= two_pi;
    if (den <= 0.0) {
        if (zero_den) *zero_den = true;
        return 0.0;
    }
    if (zero_den) *zero_den = false;
    return num / den;
}

}  // namespace detail

// Unclamped score of an arbitrary mask row anchored at `anchor`.
inline double mask_compactness(const NodeAttrs& attrs, const std::vector<double>& mask,
                               std::size_t anchor) {
    if (mask.size() != attrs.n()) throw ConfigError("mask_compactness: size mismatch");
    if (anchor >= attrs.n()) throw ConfigError("mask_compactness: anchor out of range");
    return detail::mask_score_raw(attrs, mask.data(), mask.size(), anchor);
}

// Out-of-range raw scores: Strict rejects anything past the 1.01 grid
// discretization slack (unit pixel attributes cannot legitimately exceed it);
// Saturate clamps silently. Pooled nodes store only their members' own-axis
// inertia sums — no transport to the pooled centroid — so a mask concentrated
// on one heavy node reads as more compact than any circle. Such rows saturate
// at the maximum score of 1 instead of being treated as numeric faults.
enum class ScoreBound : std::uint8_t { Strict, Saturate };

// Scores every anchor row of the mask tensor. Raw scores are checked against
// the bound policy, then clamped to (0, 1]. Rows with a vanished denominator
// score 0 and are flagged.
inline CompactnessScores compactness_scores(const NodeAttrs& attrs, const AffinityMasks& masks,
                                            ScoreBound bound = ScoreBound::Strict) {
    const std::size_t n = attrs.n();
    if (masks.n() != n) throw ConfigError("compactness_scores: size mismatch");
    CompactnessScores out;
    out.c = Tensor({n});
    out.zero_mass.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        bool zero = false;
        double raw = detail::mask_score_raw(attrs, &masks.lambda.data[i * n], n, i, &zero);
        if (zero) {
            out.zero_mass[i] = 1;
            out.c(i) = 0.0;
            continue;
        }
        if (bound == ScoreBound::Strict && raw > 1.01)
            throw NumericError("compactness_scores: score exceeds the discretization bound");
        out.c(i) = raw > 1.0 ? 1.0 : raw;
    }
    return out;
}

}  // namespace coca
