#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "coca/error.hpp"
#include "coca/metrics.hpp"
#include "coca/rng.hpp"
#include "coca/tensor.hpp"

namespace coca {

enum class ShapeKind : std::uint8_t { Rect, Disk, Tetromino };

struct SceneSpec {
    std::size_t h = 64, w = 64;
    std::size_t min_objects = 3, max_objects = 6;
    std::vector<ShapeKind> shapes = {ShapeKind::Rect, ShapeKind::Disk, ShapeKind::Tetromino};
    std::vector<std::array<double, 3>> palette;
    bool allow_overlap = false;
    bool two_tone_bg = false;
    std::array<double, 3> bg_color = {0.12, 0.12, 0.14};
    std::array<double, 3> bg_color2 = {0.26, 0.22, 0.18};
    std::size_t min_extent = 8, max_extent = 16;  // object bounding size in pixels
    std::uint64_t seed = 0;
};

struct Scene {
    Tensor image;  // [h, w, 3], channels in [0, 1]
    LabelMap gt;   // object ids 0..n-1 first, background id(s) after
    std::set<int> bg_ids;
    std::size_t n_objects = 0;
};

namespace detail {

inline void validate_scene_spec(const SceneSpec& s) {
    if (s.h == 0 || s.w == 0) throw ConfigError("scene: empty grid");
    if (s.min_objects > s.max_objects) throw ConfigError("scene: object count range inverted");
    if (s.shapes.empty()) throw ConfigError("scene: no shape kinds enabled");
    if (s.max_objects > s.palette.size())
        throw ConfigError("scene: palette smaller than the maximum object count");
    if (s.min_extent < 4 || s.min_extent > s.max_extent)
        throw ConfigError("scene: bad extent range");
    if (s.max_extent + 2 >= s.h || s.max_extent + 2 >= s.w)
        throw ConfigError("scene: extents do not fit the grid");
    for (std::size_t i = 0; i < s.palette.size(); ++i)
        for (std::size_t j = i + 1; j < s.palette.size(); ++j) {
            double dist = 0.0;
            for (std::size_t c = 0; c < 3; ++c)
                dist = std::max(dist, std::abs(s.palette[i][c] - s.palette[j][c]));
            if (dist < 0.2)
                throw ConfigError("scene: palette colors closer than the 0.2 channel minimum");
        }
}

// Rasterizes one shape as offsets relative to its bounding-box corner.
inline std::vector<std::pair<std::size_t, std::size_t>> raster_shape(ShapeKind kind,
                                                                     std::size_t extent,
                                                                     std::size_t extent2,
                                                                     std::size_t rot) {
    std::vector<std::pair<std::size_t, std::size_t>> px;
    switch (kind) {
        case ShapeKind::Rect: {
            for (std::size_t r = 0; r < extent; ++r)
                for (std::size_t c = 0; c < extent2; ++c) px.emplace_back(r, c);
            break;
        }
        case ShapeKind::Disk: {
            const double rad = static_cast<double>(extent) / 2.0;
            const double ctr = (static_cast<double>(extent) - 1.0) / 2.0;
            for (std::size_t r = 0; r < extent; ++r)
                for (std::size_t c = 0; c < extent; ++c) {
                    const double dr = static_cast<double>(r) - ctr;
                    const double dc = static_cast<double>(c) - ctr;
                    if (dr * dr + dc * dc <= rad * rad) px.emplace_back(r, c);
                }
            break;
        }
        case ShapeKind::Tetromino: {
            const std::size_t s = std::max<std::size_t>(1, extent / 3);
            static constexpr int cells[4][2] = {{0, 0}, {1, 0}, {2, 0}, {2, 1}};
            for (const auto& cell : cells) {
                int cr = cell[0], cc = cell[1];
                for (std::size_t q = 0; q < rot % 4; ++q) {  // rotate cell grid 90 degrees
                    const int tmp = cr;
                    cr = cc;
                    cc = 2 - tmp;
                }
                for (std::size_t r = 0; r < s; ++r)
                    for (std::size_t c = 0; c < s; ++c)
                        px.emplace_back(static_cast<std::size_t>(cr) * s + r,
                                        static_cast<std::size_t>(cc) * s + c);
            }
            break;
        }
    }
    return px;
}

}  // namespace detail

// Deterministic scene synthesis: everything derives from (spec.seed, index), so
// regeneration is bit-identical. Object ids are assigned in draw order; the
// background occupies the trailing id (two ids for the two-tone split).
inline Scene generate_scene(const SceneSpec& spec, std::uint64_t index) {
    detail::validate_scene_spec(spec);
    std::mt19937_64 eng = make_engine(spec.seed, index);

    Scene sc;
    sc.n_objects = spec.min_objects +
                   uniform_index(eng, spec.max_objects - spec.min_objects + 1);
    const int bg0 = static_cast<int>(sc.n_objects);
    sc.bg_ids.insert(bg0);
    if (spec.two_tone_bg) sc.bg_ids.insert(bg0 + 1);

    sc.image = Tensor({spec.h, spec.w, 3});
    sc.gt.h = spec.h;
    sc.gt.w = spec.w;
    sc.gt.labels.assign(spec.h * spec.w, bg0);
    for (std::size_t r = 0; r < spec.h; ++r)
        for (std::size_t q = 0; q < spec.w; ++q) {
            const bool right = spec.two_tone_bg && q >= spec.w / 2;
            if (right) sc.gt.labels[r * spec.w + q] = bg0 + 1;
            const auto& col = right ? spec.bg_color2 : spec.bg_color;
            for (std::size_t c = 0; c < 3; ++c) sc.image(r, q, c) = col[c];
        }

    // object colors: seeded partial shuffle, no replacement
    std::vector<std::size_t> color_idx(spec.palette.size());
    for (std::size_t i = 0; i < color_idx.size(); ++i) color_idx[i] = i;
    for (std::size_t i = 0; i < sc.n_objects; ++i) {
        const std::size_t j = i + uniform_index(eng, color_idx.size() - i);
        std::swap(color_idx[i], color_idx[j]);
    }

    std::vector<std::uint8_t> occupied(spec.h * spec.w, 0);
    for (std::size_t obj = 0; obj < sc.n_objects; ++obj) {
        bool placed = false;
        for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
            const ShapeKind kind = spec.shapes[uniform_index(eng, spec.shapes.size())];
            const std::size_t span = spec.max_extent - spec.min_extent + 1;
            const std::size_t e1 = spec.min_extent + uniform_index(eng, span);
            const std::size_t e2 = spec.min_extent + uniform_index(eng, span);
            const std::size_t rot = static_cast<std::size_t>(uniform_index(eng, 4));
            const auto px = detail::raster_shape(kind, e1, e2, rot);
            std::size_t br = 0, bc = 0;
            for (const auto& [r, c] : px) {
                br = std::max(br, r);
                bc = std::max(bc, c);
            }
            if (br + 2 >= spec.h || bc + 2 >= spec.w) continue;
            const std::size_t r0 = 1 + uniform_index(eng, spec.h - br - 2);
            const std::size_t c0 = 1 + uniform_index(eng, spec.w - bc - 2);
            bool clash = false;
            if (!spec.allow_overlap) {
                for (const auto& [r, c] : px) {
                    // reject if the 1-px dilation of the support touches another object
                    for (int dr = -1; dr <= 1 && !clash; ++dr)
                        for (int dc = -1; dc <= 1 && !clash; ++dc) {
                            const long rr = static_cast<long>(r0 + r) + dr;
                            const long cc = static_cast<long>(c0 + c) + dc;
                            if (rr < 0 || cc < 0 || rr >= static_cast<long>(spec.h) ||
                                cc >= static_cast<long>(spec.w))
                                continue;
                            if (occupied[static_cast<std::size_t>(rr) * spec.w +
                                         static_cast<std::size_t>(cc)])
                                clash = true;
                        }
                    if (clash) break;
                }
            }
            if (clash) continue;
            const auto& col = spec.palette[color_idx[obj]];
            for (const auto& [r, c] : px) {
                const std::size_t p = (r0 + r) * spec.w + (c0 + c);
                occupied[p] = 1;
                sc.gt.labels[p] = static_cast<int>(obj);
                for (std::size_t ch = 0; ch < 3; ++ch)
                    sc.image(r0 + r, c0 + c, ch) = col[ch];
            }
            placed = true;
        }
        if (!placed) throw NumericError("scene: placement failed after bounded retries");
    }
    return sc;
}

}  // namespace coca
