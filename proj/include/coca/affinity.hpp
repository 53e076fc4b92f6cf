#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "coca/encoder.hpp"
#include "coca/error.hpp"
#include "coca/tensor.hpp"

namespace coca {

// Row i is the soft mask anchored at node i: values in [0, 1], row max 1,
// diagonal 1 for any node whose row is not degenerate.
struct AffinityMasks {
    Tensor lambda;  // [n, n]
    std::size_t n() const { return lambda.shape.empty() ? 0 : lambda.shape[0]; }
};

enum class Projection : std::uint8_t { Identity, SeededOrthogonal };

struct AffinityConfig {
    double tau = 1.0;                  // temperature, > 0
    std::size_t groups = 1;            // must divide the feature dimension
    Projection projection = Projection::Identity;
    std::uint64_t projection_seed = 1;
};

// Per-node normalization across the feature axis, in contiguous groups of
// d / groups channels: (v - mean) / sqrt(var + 1e-6), population variance,
// no learned parameters. Constant groups map to zero.
inline FeatureMap group_normalize(const FeatureMap& x, std::size_t groups) {
    const std::size_t n = x.nodes(), d = x.dim();
    if (groups == 0 || d % groups != 0)
        throw ConfigError("group_normalize: groups must divide the feature dimension");
    const std::size_t gs = d / groups;
    const double eps = 1e-6;
    FeatureMap out = x;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t g = 0; g < groups; ++g) {
            double mean = 0.0;
            for (std::size_t c = 0; c < gs; ++c) mean += x.values(i, g * gs + c);
            mean /= static_cast<double>(gs);
            double var = 0.0;
            for (std::size_t c = 0; c < gs; ++c) {
                const double dev = x.values(i, g * gs + c) - mean;
                var += dev * dev;
            }
            var /= static_cast<double>(gs);
            const double inv = 1.0 / std::sqrt(var + eps);
            for (std::size_t c = 0; c < gs; ++c)
                out.values(i, g * gs + c) = (x.values(i, g * gs + c) - mean) * inv;
        }
    return out;
}

// Scaled squared-Euclidean distance matrix: e[i][j] = tau / sqrt(n*d) * ||yi - yj||^2.
// Symmetric with a zero diagonal.
inline Tensor pairwise_distances(const FeatureMap& y, double tau) {
    if (tau <= 0.0) throw ConfigError("pairwise_distances: tau must be positive");
    const std::size_t n = y.nodes(), d = y.dim();
    const double scale = tau / std::sqrt(static_cast<double>(n) * static_cast<double>(d));
    Tensor e({n, n});
    for (std::size_t i = 0; i < n; ++i) {
        e(i, i) = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double dist2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = y.values(i, c) - y.values(j, c);
                dist2 += diff * diff;
            }
            const double v = scale * dist2;
            e(i, j) = v;
            e(j, i) = v;
        }
    }
    return e;
}

// Per row: soft-argmin of the distances (exp of negated entries, normalized to
// sum 1), then min-max rescaling to [0, 1]. A row whose soft-argmin spread is
// below 1e-12 is degenerate and maps to all ones.
inline AffinityMasks affinities_from_distances(const Tensor& e) {
    if (e.shape.size() != 2 || e.shape[0] != e.shape[1])
        throw ConfigError("affinities_from_distances: expected a square matrix");
    const std::size_t n = e.shape[0];
    AffinityMasks out;
    out.lambda = Tensor({n, n});
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        double emin = e(i, 0);
        for (std::size_t j = 1; j < n; ++j) emin = std::min(emin, e(i, j));
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            s[j] = std::exp(-(e(i, j) - emin));
            z += s[j];
        }
        for (std::size_t j = 0; j < n; ++j) s[j] /= z;
        double smin = s[0], smax = s[0];
        for (std::size_t j = 1; j < n; ++j) {
            smin = std::min(smin, s[j]);
            smax = std::max(smax, s[j]);
        }
        const double spread = smax - smin;
        if (spread <= 1e-12) {
            for (std::size_t j = 0; j < n; ++j) out.lambda(i, j) = 1.0;
        } else {
            for (std::size_t j = 0; j < n; ++j) out.lambda(i, j) = (s[j] - smin) / spread;
        }
    }
    return out;
}

// Full affinity stack: normalize, project, re-normalize, distance, mask.
inline AffinityMasks build_affinities(const FeatureMap& x, const AffinityConfig& cfg) {
    FeatureMap y = group_normalize(x, cfg.groups);
    if (cfg.projection == Projection::SeededOrthogonal) {
        const std::size_t n = y.nodes(), d = y.dim();
        const std::vector<double> q = detail::orthonormal_frame(d, d, cfg.projection_seed);
        FeatureMap proj = y;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t r = 0; r < d; ++r) {
                double acc = 0.0;
                for (std::size_t c = 0; c < d; ++c) acc += q[r * d + c] * y.values(i, c);
                proj.values(i, r) = acc;
            }
        y = std::move(proj);
    }
    y = group_normalize(y, cfg.groups);
    return affinities_from_distances(pairwise_distances(y, cfg.tau));
}

}  // namespace coca
