#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "coca/affinity.hpp"
#include "coca/compactness.hpp"
#include "coca/encoder.hpp"
#include "coca/error.hpp"
#include "coca/parallel.hpp"
#include "coca/rng.hpp"
#include "coca/sbc.hpp"
#include "coca/tensor.hpp"

namespace coca {

struct LayerConfig {
    std::size_t t = 1;        // windows per spatial axis
    std::size_t k = 0;        // masks per window incl. residual; 0 selects dynamic stopping
    double tau = 1.0;
    std::size_t groups = 1;
    std::size_t smoothing_radius = 0;
    double smoothing_strength = 1.0;
    Projection projection = Projection::Identity;
    std::uint64_t projection_seed = 1;
};

// Node state entering a layer: features plus physical attributes, one row per
// node, laid out row-major over the (h, w, k) grid the FeatureMap describes.
struct LayerState {
    FeatureMap features;
    NodeAttrs attrs;
};

// Mask-weighted attribute pooling: inertia, area and mass are plain weighted
// sums; density is re-derived as pooled mass over pooled area; position is the
// mask-weighted centroid. Empty masks are epsilon-guarded and flagged.
inline NodeAttrs pool_attrs(const Tensor& pi, const NodeAttrs& attrs,
                            std::vector<std::uint8_t>* flagged = nullptr) {
    if (pi.shape.size() != 2 || pi.shape[1] != attrs.n())
        throw ConfigError("pool_attrs: mask/attr size mismatch");
    const std::size_t k = pi.shape[0], n = pi.shape[1];
    const double eps = 1e-9;
    NodeAttrs out;
    out.area = Tensor({k});
    out.mass = Tensor({k});
    out.density = Tensor({k});
    out.inertia = Tensor({k});
    out.position = Tensor({k, 2});
    if (flagged) flagged->assign(k, 0);
    for (std::size_t m = 0; m < k; ++m) {
        double a = 0.0, ms = 0.0, in = 0.0, wsum = 0.0, pr = 0.0, pc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double p = pi(m, j);
            a += p * attrs.area(j);
            ms += p * attrs.mass(j);
            in += p * attrs.inertia(j);
            wsum += p;
            pr += p * attrs.position(j, 0);
            pc += p * attrs.position(j, 1);
        }
        out.area(m) = a;
        out.mass(m) = ms;
        out.inertia(m) = in;
        out.density(m) = ms / std::max(a, eps);
        out.position(m, 0) = pr / std::max(wsum, eps);
        out.position(m, 1) = pc / std::max(wsum, eps);
        if (flagged && wsum <= eps) (*flagged)[m] = 1;
    }
    return out;
}

// Mask-weighted mean of the node features, one output row per mask.
inline Tensor pool_features(const Tensor& pi, const Tensor& x) {
    if (pi.shape.size() != 2 || x.shape.size() != 2 || pi.shape[1] != x.shape[0])
        throw ConfigError("pool_features: mask/feature size mismatch");
    const std::size_t k = pi.shape[0], n = pi.shape[1], d = x.shape[1];
    const double eps = 1e-9;
    Tensor out({k, d});
    for (std::size_t m = 0; m < k; ++m) {
        double wsum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double p = pi(m, j);
            wsum += p;
            for (std::size_t c = 0; c < d; ++c) out(m, c) += p * x(j, c);
        }
        const double inv = 1.0 / std::max(wsum, eps);
        for (std::size_t c = 0; c < d; ++c) out(m, c) *= inv;
    }
    return out;
}

// One dendrogram level: every window's clusters expressed as soft masks over
// that window's original-pixel block (row-major ph x pw). Rows are padded to a
// uniform k per level; real_k tracks anchored-plus-residual rows per window.
struct DendroLevel {
    std::size_t t = 1;
    std::size_t k = 1;
    std::size_t ph = 0, pw = 0;
    std::vector<Tensor> win;           // t*t tensors [k, ph*pw]
    std::vector<std::size_t> real_k;   // per window
};

// Output of one layer pass over all windows.
struct LayerResult {
    LayerState next;                       // pooled nodes on the (t, t, k_out) grid
    std::vector<ClusterMasks> windows;     // raw per-window masks (unpadded)
    std::vector<Tensor> padded;            // per-window [k_out, n] masks
    WindowLayout layout;                   // input-side window geometry
    std::size_t k_out = 0;                 // uniform padded cluster count
};

// Progressive merge: composes layer-l window masks with the previous level's
// pixel masks (per-subcell matrix product) and re-tiles the pixel blocks.
inline DendroLevel merge_dendrogram(const DendroLevel& prev, const LayerResult& layer) {
    const std::size_t t = layer.layout.t;
    const std::size_t hl = layer.layout.h, wl = layer.layout.w;
    const std::size_t k_prev = layer.layout.k_in;
    if (prev.t != t * hl || prev.k != k_prev)
        throw ConfigError("merge_dendrogram: level geometry mismatch");
    DendroLevel out;
    out.t = t;
    out.k = layer.k_out;
    out.ph = hl * prev.ph;
    out.pw = wl * prev.pw;
    out.win.resize(t * t);
    out.real_k.resize(t * t);
    const std::size_t block = prev.ph * prev.pw;
    for (std::size_t A = 0; A < t; ++A)
        for (std::size_t B = 0; B < t; ++B) {
            const std::size_t w = A * t + B;
            const Tensor& pi = layer.padded[w];
            Tensor merged({out.k, out.ph * out.pw});
            for (std::size_t al = 0; al < hl; ++al)
                for (std::size_t be = 0; be < wl; ++be) {
                    const std::size_t pw_idx = (A * hl + al) * prev.t + (B * wl + be);
                    const Tensor& sub = prev.win[pw_idx];
                    for (std::size_t m = 0; m < out.k; ++m)
                        for (std::size_t c = 0; c < k_prev; ++c) {
                            const double weight = pi(m, (al * wl + be) * k_prev + c);
                            if (weight == 0.0) continue;
                            for (std::size_t p = 0; p < block; ++p) {
                                const std::size_t pr = p / prev.pw, pc = p % prev.pw;
                                double& dst =
                                    merged(m, (al * prev.ph + pr) * out.pw + (be * prev.pw + pc));
                                dst = std::min(1.0, dst + weight * sub(c, p));
                            }
                        }
                }
            out.win[w] = std::move(merged);
            out.real_k[w] = layer.windows[w].k();
        }
    return out;
}

// First-level dendrogram is the layer's own masks re-read as pixel masks
// (k_in of the first layer is 1, so window nodes are the pixels themselves).
inline DendroLevel initial_dendro_level(const LayerResult& layer) {
    if (layer.layout.k_in != 1)
        throw ConfigError("initial_dendro_level: first layer must consume pixel cells");
    DendroLevel lvl;
    lvl.t = layer.layout.t;
    lvl.k = layer.k_out;
    lvl.ph = layer.layout.h;
    lvl.pw = layer.layout.w;
    lvl.win = layer.padded;
    lvl.real_k.resize(layer.windows.size());
    for (std::size_t w = 0; w < layer.windows.size(); ++w)
        lvl.real_k[w] = layer.windows[w].k();
    return lvl;
}

// One full layer pass: optional smoothing, window partition, per-window
// affinity -> compactness -> stick breaking, then pooling into the next grid.
// Windows run in parallel; every reduction stays inside one window, so the
// result is bit-identical for any thread count.
inline LayerResult coca_layer(const LayerState& state, const LayerConfig& cfg,
                              double dynamic_threshold, AnchorMode mode,
                              std::uint64_t anchor_seed, std::size_t layer_index,
                              unsigned threads = 1) {
    const FeatureMap& fm0 = state.features;
    const std::size_t d = fm0.dim();
    if (fm0.nodes() != fm0.h * fm0.w * fm0.k || fm0.nodes() != state.attrs.n())
        throw ConfigError("coca_layer: node bookkeeping mismatch");

    FeatureMap fm = cfg.smoothing_radius > 0
                        ? smooth_features(fm0, cfg.smoothing_radius, cfg.smoothing_strength)
                        : fm0;

    // pack features and the six attribute scalars, then window them together
    const Tensor xf = fm.values.reshaped({fm.h, fm.w, fm.k, d});
    Tensor xa({fm.h * fm.w * fm.k, 6});
    for (std::size_t j = 0; j < state.attrs.n(); ++j) {
        xa(j, 0) = state.attrs.area(j);
        xa(j, 1) = state.attrs.mass(j);
        xa(j, 2) = state.attrs.density(j);
        xa(j, 3) = state.attrs.inertia(j);
        xa(j, 4) = state.attrs.position(j, 0);
        xa(j, 5) = state.attrs.position(j, 1);
    }
    const Tensor wf = unfold_windows(xf, cfg.t);
    const Tensor wa = unfold_windows(xa.reshaped({fm.h, fm.w, fm.k, 6}), cfg.t);

    WindowLayout lay{cfg.t, fm.h / cfg.t, fm.w / cfg.t, fm.k};
    const std::size_t n = lay.nodes();
    const std::size_t wins = lay.window_count();
    if (cfg.k > n + 1)
        throw ConfigError("coca_layer: fixed k exceeds window node count + 1");

    AffinityConfig acfg;
    acfg.tau = cfg.tau;
    acfg.groups = cfg.groups;
    acfg.projection = cfg.projection;
    acfg.projection_seed = cfg.projection_seed;
    const StopPolicy policy =
        cfg.k == 0 ? StopPolicy::dynamic(dynamic_threshold) : StopPolicy::fixed(cfg.k);

    LayerResult res;
    res.layout = lay;
    res.windows.resize(wins);

    parallel_for(wins, threads, [&](std::size_t w) {
        FeatureMap wx;
        wx.h = lay.h;
        wx.w = lay.w;
        wx.k = lay.k_in;
        wx.values = Tensor({n, d});
        std::copy(wf.data.begin() + static_cast<long>(w * n * d),
                  wf.data.begin() + static_cast<long>((w + 1) * n * d), wx.values.data.begin());
        NodeAttrs at;
        at.area = Tensor({n});
        at.mass = Tensor({n});
        at.density = Tensor({n});
        at.inertia = Tensor({n});
        at.position = Tensor({n, 2});
        for (std::size_t j = 0; j < n; ++j) {
            at.area(j) = wa.data[(w * n + j) * 6 + 0];
            at.mass(j) = wa.data[(w * n + j) * 6 + 1];
            at.density(j) = wa.data[(w * n + j) * 6 + 2];
            at.inertia(j) = wa.data[(w * n + j) * 6 + 3];
            at.position(j, 0) = wa.data[(w * n + j) * 6 + 4];
            at.position(j, 1) = wa.data[(w * n + j) * 6 + 5];
        }

        const AffinityMasks masks = build_affinities(wx, acfg);
        // Unit pixel attributes obey the discretization bound strictly; pooled
        // nodes carry untransported inertia sums and may saturate past it.
        const CompactnessScores scores = compactness_scores(
            at, masks, layer_index == 0 ? ScoreBound::Strict : ScoreBound::Saturate);
        std::mt19937_64 eng =
            make_engine(anchor_seed, (static_cast<std::uint64_t>(layer_index + 1) << 40) + w);
        res.windows[w] = sbc_cluster(masks, scores, policy, mode,
                                     mode == AnchorMode::Random ? &eng : nullptr);
    });

    std::size_t k_out = 0;
    for (const auto& cm : res.windows) k_out = std::max(k_out, cm.k());
    res.k_out = k_out;

    res.padded.resize(wins);
    res.next.features.h = cfg.t;
    res.next.features.w = cfg.t;
    res.next.features.k = k_out;
    res.next.features.values = Tensor({wins * k_out, d});
    res.next.attrs.area = Tensor({wins * k_out});
    res.next.attrs.mass = Tensor({wins * k_out});
    res.next.attrs.density = Tensor({wins * k_out});
    res.next.attrs.inertia = Tensor({wins * k_out});
    res.next.attrs.position = Tensor({wins * k_out, 2});

    parallel_for(wins, threads, [&](std::size_t w) {
        const ClusterMasks& cm = res.windows[w];
        Tensor pi({k_out, n});
        std::copy(cm.pi.data.begin(), cm.pi.data.end(), pi.data.begin());
        // rows beyond the window's own mask count stay zero (padding)

        Tensor wx({n, d});
        std::copy(wf.data.begin() + static_cast<long>(w * n * d),
                  wf.data.begin() + static_cast<long>((w + 1) * n * d), wx.data.begin());
        NodeAttrs at;
        at.area = Tensor({n});
        at.mass = Tensor({n});
        at.density = Tensor({n});
        at.inertia = Tensor({n});
        at.position = Tensor({n, 2});
        for (std::size_t j = 0; j < n; ++j) {
            at.area(j) = wa.data[(w * n + j) * 6 + 0];
            at.mass(j) = wa.data[(w * n + j) * 6 + 1];
            at.density(j) = wa.data[(w * n + j) * 6 + 2];
            at.inertia(j) = wa.data[(w * n + j) * 6 + 3];
            at.position(j, 0) = wa.data[(w * n + j) * 6 + 4];
            at.position(j, 1) = wa.data[(w * n + j) * 6 + 5];
        }

        const Tensor pooled_x = pool_features(pi, wx);
        const NodeAttrs pooled_a = pool_attrs(pi, at);
        for (std::size_t m = 0; m < k_out; ++m) {
            const std::size_t row = w * k_out + m;
            for (std::size_t c = 0; c < d; ++c)
                res.next.features.values(row, c) = pooled_x(m, c);
            res.next.attrs.area(row) = pooled_a.area(m);
            res.next.attrs.mass(row) = pooled_a.mass(m);
            res.next.attrs.density(row) = pooled_a.density(m);
            res.next.attrs.inertia(row) = pooled_a.inertia(m);
            res.next.attrs.position(row, 0) = pooled_a.position(m, 0);
            res.next.attrs.position(row, 1) = pooled_a.position(m, 1);
        }
        res.padded[w] = std::move(pi);
    });

    return res;
}

struct NetConfig {
    EncoderConfig encoder;
    std::vector<LayerConfig> layers;
    double dynamic_threshold = 0.025;
    AnchorMode anchor_mode = AnchorMode::Compact;
    std::uint64_t anchor_seed = 1;
};

struct NetResult {
    std::size_t h = 0, w = 0;
    Tensor slot_masks;                  // [K, h, w], window-major then cluster order
    std::vector<int> labels;            // h*w, argmax slot per pixel (lowest index wins)
    std::vector<DendroLevel> dendrogram;
    std::vector<std::vector<std::vector<std::size_t>>> anchors;  // [layer][window][m]
    std::vector<std::size_t> final_window_slots;                 // real masks per final window
};

// Full hierarchy over an [h, w, 3] image. Every layer halves nothing by itself;
// the configured t chain must tile the grid exactly at each step.
inline NetResult coca_net(const Tensor& img, const NetConfig& cfg, unsigned threads = 1) {
    if (cfg.layers.empty()) throw ConfigError("coca_net: at least one layer required");
    FeatureMap features = encode_pixels(img, cfg.encoder);
    if (cfg.encoder.smoothing_radius > 0)
        features = smooth_features(features, cfg.encoder.smoothing_radius, 1.0);
    const std::size_t H = features.h, W = features.w;

    LayerState state{std::move(features), init_pixel_attrs(H, W)};
    NetResult out;
    out.h = H;
    out.w = W;

    DendroLevel level;
    for (std::size_t li = 0; li < cfg.layers.size(); ++li) {
        LayerResult lr = coca_layer(state, cfg.layers[li], cfg.dynamic_threshold,
                                    cfg.anchor_mode, cfg.anchor_seed, li, threads);
        level = li == 0 ? initial_dendro_level(lr) : merge_dendrogram(level, lr);
        out.dendrogram.push_back(level);
        std::vector<std::vector<std::size_t>> layer_anchors;
        layer_anchors.reserve(lr.windows.size());
        for (const auto& cm : lr.windows) layer_anchors.push_back(cm.anchors);
        out.anchors.push_back(std::move(layer_anchors));
        if (li + 1 == cfg.layers.size()) {
            out.final_window_slots.assign(level.real_k.begin(), level.real_k.end());
        }
        state = std::move(lr.next);
    }

    // materialize slot masks from the final level (real rows only)
    std::size_t total_slots = 0;
    for (std::size_t rk : level.real_k) total_slots += rk;
    out.slot_masks = Tensor({total_slots, H, W});
    std::size_t slot = 0;
    for (std::size_t A = 0; A < level.t; ++A)
        for (std::size_t B = 0; B < level.t; ++B) {
            const std::size_t w = A * level.t + B;
            for (std::size_t m = 0; m < level.real_k[w]; ++m, ++slot)
                for (std::size_t pr = 0; pr < level.ph; ++pr)
                    for (std::size_t pc = 0; pc < level.pw; ++pc)
                        out.slot_masks(slot, A * level.ph + pr, B * level.pw + pc) =
                            level.win[w](m, pr * level.pw + pc);
        }

    out.labels.assign(H * W, 0);
    for (std::size_t p = 0; p < H * W; ++p) {
        int best = 0;
        double best_v = out.slot_masks.data[p];
        for (std::size_t s = 1; s < total_slots; ++s) {
            const double v = out.slot_masks.data[s * H * W + p];
            if (v > best_v) {
                best = static_cast<int>(s);
                best_v = v;
            }
        }
        out.labels[p] = best;
    }
    return out;
}

}  // namespace coca
