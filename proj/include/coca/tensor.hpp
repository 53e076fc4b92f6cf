#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "coca/error.hpp"

namespace coca {

// Dense row-major f64 tensor. Shape is explicit; iteration order is always
// last-axis-fastest so every reduction in the pipeline is order-deterministic.
struct Tensor {
    std::vector<double> data;
    std::vector<std::size_t> shape;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        data.assign(numel_of(shape), 0.0);
    }

    static std::size_t numel_of(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t e : s) n *= e;
        return n;
    }

    static Tensor zeros(std::initializer_list<std::size_t> s) {
        return Tensor(std::vector<std::size_t>(s));
    }

    static Tensor full(std::initializer_list<std::size_t> s, double v) {
        Tensor t{std::vector<std::size_t>(s)};
        t.data.assign(t.data.size(), v);
        return t;
    }

    std::size_t numel() const { return data.size(); }
    std::size_t extent(std::size_t axis) const { return shape.at(axis); }

    double& operator()(std::size_t i) { return data[i]; }
    double operator()(std::size_t i) const { return data[i]; }
    double& operator()(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }
    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data[(i * shape[1] + j) * shape[2] + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data[(i * shape[1] + j) * shape[2] + k];
    }

    // Metadata-only; element count must match.
    Tensor reshaped(std::vector<std::size_t> s) const {
        if (numel_of(s) != data.size())
            throw ConfigError("reshape: element count mismatch");
        Tensor t;
        t.data = data;
        t.shape = std::move(s);
        return t;
    }

    double sum() const {
        double acc = 0.0;
        for (double v : data) acc += v;
        return acc;
    }
};

// Geometry of one partition level: t*t windows, each h x w x k_in nodes.
struct WindowLayout {
    std::size_t t = 1;     // windows per spatial axis
    std::size_t h = 1;     // window height in input cells
    std::size_t w = 1;     // window width in input cells
    std::size_t k_in = 1;  // clusters per input cell

    std::size_t window_count() const { return t * t; }
    std::size_t nodes() const { return h * w * k_in; }
};

namespace detail {

inline void check_divisible(std::size_t extent, std::size_t t, const char* axis) {
    if (t == 0) throw ConfigError("window partition: t must be positive");
    if (extent % t != 0)
        throw ConfigError(std::string("window partition: ") + axis + " extent " +
                          std::to_string(extent) + " not divisible by t=" + std::to_string(t));
}

}  // namespace detail

// Partitions x [H, W, K, D] into non-overlapping windows: y [t_r*t_c, n, D] with
// n = (H/t_r)*(W/t_c)*K. Nodes inside a window are ordered (row, col, k), row-major.
// Rectangular grids are supported via independent per-axis window counts.
inline Tensor unfold_windows_rect(const Tensor& x, std::size_t t_rows, std::size_t t_cols) {
    if (x.shape.size() != 4) throw ConfigError("unfold_windows: expected a rank-4 tensor");
    const std::size_t H = x.shape[0], W = x.shape[1], K = x.shape[2], D = x.shape[3];
    detail::check_divisible(H, t_rows, "height");
    detail::check_divisible(W, t_cols, "width");
    const std::size_t h = H / t_rows, w = W / t_cols;
    const std::size_t n = h * w * K;
    Tensor y({t_rows * t_cols, n, D});
    for (std::size_t a = 0; a < t_rows; ++a)
        for (std::size_t b = 0; b < t_cols; ++b) {
            const std::size_t win = a * t_cols + b;
            for (std::size_t r = 0; r < h; ++r)
                for (std::size_t q = 0; q < w; ++q)
                    for (std::size_t k = 0; k < K; ++k) {
                        const std::size_t node = (r * w + q) * K + k;
                        const std::size_t src = (((a * h + r) * W + (b * w + q)) * K + k) * D;
                        const std::size_t dst = (win * n + node) * D;
                        for (std::size_t d = 0; d < D; ++d) y.data[dst + d] = x.data[src + d];
                    }
        }
    return y;
}

inline Tensor unfold_windows(const Tensor& x, std::size_t t) {
    return unfold_windows_rect(x, t, t);
}

// Exact inverse of unfold_windows for the given layout.
inline Tensor fold_windows(const Tensor& y, const WindowLayout& lay) {
    if (y.shape.size() != 3) throw ConfigError("fold_windows: expected a rank-3 tensor");
    if (y.shape[0] != lay.window_count() || y.shape[1] != lay.nodes())
        throw ConfigError("fold_windows: tensor does not match layout");
    const std::size_t D = y.shape[2];
    const std::size_t H = lay.t * lay.h, W = lay.t * lay.w, K = lay.k_in;
    Tensor x({H, W, K, D});
    for (std::size_t a = 0; a < lay.t; ++a)
        for (std::size_t b = 0; b < lay.t; ++b) {
            const std::size_t win = a * lay.t + b;
            for (std::size_t r = 0; r < lay.h; ++r)
                for (std::size_t q = 0; q < lay.w; ++q)
                    for (std::size_t k = 0; k < K; ++k) {
                        const std::size_t node = (r * lay.w + q) * K + k;
                        const std::size_t dst = (((a * lay.h + r) * W + (b * lay.w + q)) * K + k) * D;
                        const std::size_t src = (win * lay.nodes() + node) * D;
                        for (std::size_t d = 0; d < D; ++d) x.data[dst + d] = y.data[src + d];
                    }
        }
    return x;
}

}  // namespace coca
