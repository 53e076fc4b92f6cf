#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "coca/error.hpp"
#include "coca/rng.hpp"
#include "coca/tensor.hpp"

namespace coca {

// Flat n x d node features plus the grid they came from (n = h * w * k).
struct FeatureMap {
    Tensor values;  // [n, d]
    std::size_t h = 0;
    std::size_t w = 0;
    std::size_t k = 1;

    std::size_t nodes() const { return values.shape.empty() ? 0 : values.shape[0]; }
    std::size_t dim() const { return values.shape.size() < 2 ? 0 : values.shape[1]; }
};

struct EncoderConfig {
    std::size_t d0 = 7;           // output feature dimension, >= 6
    double color_weight = 1.0;
    double position_weight = 0.25;
    std::size_t smoothing_radius = 0;  // 0 disables pre-smoothing
    std::uint64_t projection_seed = 17;
};

// Four normalized border-distance channels per pixel: (top, bottom, left, right).
// Coordinates normalize by (extent - 1); a 1-cell axis degenerates to (0, 1).
// Opposite channels always sum to 1.
inline Tensor encode_position(std::size_t h, std::size_t w) {
    if (h == 0 || w == 0) throw ConfigError("encode_position: empty grid");
    Tensor p({h, w, 4});
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t q = 0; q < w; ++q) {
            const double top = h > 1 ? static_cast<double>(r) / static_cast<double>(h - 1) : 0.0;
            const double left = w > 1 ? static_cast<double>(q) / static_cast<double>(w - 1) : 0.0;
            p(r, q, 0) = top;
            p(r, q, 1) = 1.0 - top;
            p(r, q, 2) = left;
            p(r, q, 3) = 1.0 - left;
        }
    return p;
}

namespace detail {

// Seeded orthonormal column frame: rows x cols (rows >= cols), Gaussian fill
// followed by modified Gram-Schmidt in fixed column order. Deterministic.
inline std::vector<double> orthonormal_frame(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 eng = make_engine(seed, 0x0f7a);
    std::vector<double> m(rows * cols);
    for (auto& v : m) v = normal_double(eng);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t p = 0; p < c; ++p) {
            double dot = 0.0;
            for (std::size_t r = 0; r < rows; ++r) dot += m[r * cols + c] * m[r * cols + p];
            for (std::size_t r = 0; r < rows; ++r) m[r * cols + c] -= dot * m[r * cols + p];
        }
        double nrm = 0.0;
        for (std::size_t r = 0; r < rows; ++r) nrm += m[r * cols + c] * m[r * cols + c];
        nrm = std::sqrt(nrm);
        if (nrm < 1e-12) throw NumericError("orthonormal_frame: degenerate column");
        for (std::size_t r = 0; r < rows; ++r) m[r * cols + c] /= nrm;
    }
    return m;
}

}  // namespace detail

// Deterministic pixel encoding: 7 base channels (weighted RGB, weighted
// top/bottom/left/right), then shaped to d0. d0=6 drops the redundant 'right'
// channel, d0=7 is the identity, d0>7 applies a seeded orthonormal embedding.
inline FeatureMap encode_pixels(const Tensor& img, const EncoderConfig& cfg) {
    if (img.shape.size() != 3 || img.shape[2] != 3)
        throw ConfigError("encode_pixels: expected an [h, w, 3] image");
    if (cfg.d0 < 6) throw ConfigError("encode_pixels: d0 must be >= 6");
    const std::size_t h = img.shape[0], w = img.shape[1];
    const std::size_t n = h * w;
    const Tensor pos = encode_position(h, w);

    std::vector<double> base(7);
    FeatureMap out;
    out.h = h;
    out.w = w;
    out.k = 1;
    out.values = Tensor({n, cfg.d0});

    std::vector<double> embed;
    if (cfg.d0 > 7) embed = detail::orthonormal_frame(cfg.d0, 7, cfg.projection_seed);

    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t q = 0; q < w; ++q) {
            const std::size_t node = r * w + q;
            for (std::size_t c = 0; c < 3; ++c) base[c] = cfg.color_weight * img(r, q, c);
            for (std::size_t c = 0; c < 4; ++c) base[3 + c] = cfg.position_weight * pos(r, q, c);
            if (cfg.d0 <= 7) {
                for (std::size_t d = 0; d < cfg.d0; ++d) out.values(node, d) = base[d];
            } else {
                for (std::size_t d = 0; d < cfg.d0; ++d) {
                    double acc = 0.0;
                    for (std::size_t c = 0; c < 7; ++c) acc += embed[d * 7 + c] * base[c];
                    out.values(node, d) = acc;
                }
            }
        }
    return out;
}

// Similarity-weighted spatial average inside a (2*radius+1)^2 neighborhood,
// each cluster slice smoothed independently. Weight w = 1 / (1 + ||xi - xj||^2),
// self included; y = (1 - strength) * x + strength * weighted mean.
// radius 0 or strength 0 is the identity.
inline FeatureMap smooth_features(const FeatureMap& x, std::size_t radius, double strength) {
    if (strength < 0.0 || strength > 1.0)
        throw ConfigError("smooth_features: strength must be in [0, 1]");
    if (x.nodes() != x.h * x.w * x.k)
        throw ConfigError("smooth_features: metadata does not match node count");
    if (radius == 0 || strength == 0.0) return x;

    const std::size_t d = x.dim();
    FeatureMap out = x;
    const long R = static_cast<long>(radius);
    std::vector<double> acc(d);
    for (std::size_t r = 0; r < x.h; ++r)
        for (std::size_t q = 0; q < x.w; ++q)
            for (std::size_t k = 0; k < x.k; ++k) {
                const std::size_t i = (r * x.w + q) * x.k + k;
                std::fill(acc.begin(), acc.end(), 0.0);
                double wsum = 0.0;
                for (long dr = -R; dr <= R; ++dr)
                    for (long dq = -R; dq <= R; ++dq) {
                        const long rr = static_cast<long>(r) + dr;
                        const long qq = static_cast<long>(q) + dq;
                        if (rr < 0 || qq < 0 || rr >= static_cast<long>(x.h) ||
                            qq >= static_cast<long>(x.w))
                            continue;
                        const std::size_t j =
                            (static_cast<std::size_t>(rr) * x.w + static_cast<std::size_t>(qq)) * x.k + k;
                        double dist2 = 0.0;
                        for (std::size_t c = 0; c < d; ++c) {
                            const double diff = x.values(i, c) - x.values(j, c);
                            dist2 += diff * diff;
                        }
                        const double wij = 1.0 / (1.0 + dist2);
                        wsum += wij;
                        for (std::size_t c = 0; c < d; ++c) acc[c] += wij * x.values(j, c);
                    }
                for (std::size_t c = 0; c < d; ++c)
                    out.values(i, c) = (1.0 - strength) * x.values(i, c) + strength * acc[c] / wsum;
            }
    return out;
}

}  // namespace coca
