#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "coca/hierarchy.hpp"
#include "coca/tensor.hpp"

namespace coca {

// Per-pixel compactness of the pixel's assigned slot mask, anchored at that
// pixel, over unit pixel attributes. The mask numerator, total scaled inertia,
// total scaled mass and the mass centroid are anchor-independent, so they are
// cached once per slot; the anchor only shifts the denominator by the squared
// centroid distance (parallel-axis split of the mass-weighted spread).
inline Tensor compactness_heatmap(const Tensor& img, const NetConfig& cfg,
                                  unsigned threads = 1) {
    const NetResult res = coca_net(img, cfg, threads);
    const std::size_t H = res.h, W = res.w;
    const std::size_t K = res.slot_masks.shape.empty() ? 0 : res.slot_masks.shape[0];
    constexpr double two_pi = 2.0 * 3.14159265358979323846;

    struct SlotCache {
        double num = 0.0;      // mass-affinity self terms plus the min-density pair term
        double inertia = 0.0;  // sum of scaled inertias
        double mass = 0.0;     // sum of scaled masses
        double cr = 0.0, cc = 0.0;  // mass centroid
        double spread = 0.0;        // mass-weighted squared distance to the centroid
    };
    std::vector<SlotCache> cache(K);

    for (std::size_t s = 0; s < K; ++s) {
        // support compression: collect the slot's nonzero weights once
        std::vector<double> lam;
        std::vector<double> pr, pc;
        lam.reserve(256);
        for (std::size_t r = 0; r < H; ++r)
            for (std::size_t c = 0; c < W; ++c) {
                const double v = res.slot_masks(s, r, c);
                if (v == 0.0) continue;
                lam.push_back(v);
                pr.push_back(static_cast<double>(r));
                pc.push_back(static_cast<double>(c));
            }
        SlotCache& sc = cache[s];
        for (std::size_t j = 0; j < lam.size(); ++j) {
            const double a = lam[j];       // scaled area and density for unit pixels
            const double m = a * a;        // mass carries the weight squared
            sc.num += m * a;
            sc.inertia += a / 6.0;
            sc.mass += m;
            sc.cr += m * pr[j];
            sc.cc += m * pc[j];
        }
        for (std::size_t j = 0; j < lam.size(); ++j)
            for (std::size_t v = j + 1; v < lam.size(); ++v)
                sc.num += 2.0 * std::min(lam[j], lam[v]) * lam[j] * lam[v];
        if (sc.mass > 0.0) {
            sc.cr /= sc.mass;
            sc.cc /= sc.mass;
            for (std::size_t j = 0; j < lam.size(); ++j) {
                const double dr = pr[j] - sc.cr, dc = pc[j] - sc.cc;
                sc.spread += lam[j] * lam[j] * (dr * dr + dc * dc);
            }
        }
    }

    Tensor heat({H, W});
    for (std::size_t r = 0; r < H; ++r)
        for (std::size_t c = 0; c < W; ++c) {
            const SlotCache& sc = cache[static_cast<std::size_t>(res.labels[r * W + c])];
            const double dr = static_cast<double>(r) - sc.cr;
            const double dc = static_cast<double>(c) - sc.cc;
            const double den = two_pi * (sc.inertia + sc.spread + sc.mass * (dr * dr + dc * dc));
            heat(r, c) = den > 0.0 ? sc.num / den : 0.0;
        }
    return heat;
}

// Affine rescale to [0, 1]; a flat input maps to mid-gray.
inline Tensor minmax_scale(const Tensor& x) {
    Tensor out = x;
    if (x.data.empty()) return out;
    double lo = x.data[0], hi = x.data[0];
    for (double v : x.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo <= 1e-12) {
        for (double& v : out.data) v = 0.5;
        return out;
    }
    for (double& v : out.data) v = (v - lo) / (hi - lo);
    return out;
}

}  // namespace coca
