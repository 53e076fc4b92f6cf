#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "coca/error.hpp"

namespace coca {

// Hard label image with an optional per-pixel ignore mask. Ignored pixels do
// not participate in any metric.
struct LabelMap {
    std::size_t h = 0, w = 0;
    std::vector<int> labels;          // h*w, row-major
    std::vector<std::uint8_t> ignore; // empty = nothing ignored

    std::size_t size() const { return h * w; }
    bool scored(std::size_t p) const { return ignore.empty() || ignore[p] == 0; }
};

// Extends the ignore mask to every pixel carrying a background id, so
// foreground-only metrics exclude background from the scored region entirely.
inline LabelMap fg_filter(const LabelMap& m, const std::set<int>& bg_ids) {
    LabelMap out = m;
    if (out.ignore.empty()) out.ignore.assign(out.size(), 0);
    for (std::size_t p = 0; p < out.size(); ++p)
        if (bg_ids.count(out.labels[p])) out.ignore[p] = 1;
    return out;
}

// Adjusted Rand index (Hubert-Arabie) over the jointly scored region, computed
// from the contingency table. Returns 1 when both partitions are trivially
// identical in structure (zero adjustment denominator).
inline double ari(const LabelMap& pred, const LabelMap& gt) {
    if (pred.h != gt.h || pred.w != gt.w) throw ConfigError("ari: shape mismatch");
    std::map<std::pair<int, int>, long long> cont;
    std::map<int, long long> pa, gb;
    long long total = 0;
    for (std::size_t p = 0; p < pred.size(); ++p) {
        if (!pred.scored(p) || !gt.scored(p)) continue;
        ++cont[{pred.labels[p], gt.labels[p]}];
        ++pa[pred.labels[p]];
        ++gb[gt.labels[p]];
        ++total;
    }
    if (total == 0) throw NumericError("ari: empty scored region");

    auto choose2 = [](long long v) -> double {
        return 0.5 * static_cast<double>(v) * static_cast<double>(v - 1);
    };
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, v] : cont) sum_ij += choose2(v);
    for (const auto& [key, v] : pa) sum_a += choose2(v);
    for (const auto& [key, v] : gb) sum_b += choose2(v);
    const double pairs = choose2(total);
    const double expected = pairs > 0.0 ? sum_a * sum_b / pairs : 0.0;
    const double maximum = 0.5 * (sum_a + sum_b);
    const double den = maximum - expected;
    if (den == 0.0) return 1.0;
    return (sum_ij - expected) / den;
}

// Mean segmentation covering: sum over ground-truth segments of the segment's
// size share times its best IoU against any predicted mask, all restricted to
// the scored region.
inline double msc(const std::vector<std::vector<std::uint8_t>>& pred_masks,
                  const std::vector<std::vector<std::uint8_t>>& gt_masks,
                  const std::vector<std::uint8_t>& ignore = {}) {
    auto scored = [&](std::size_t p) { return ignore.empty() || ignore[p] == 0; };
    std::size_t npx = 0;
    for (const auto& g : gt_masks) npx = std::max(npx, g.size());
    for (const auto& m : pred_masks) npx = std::max(npx, m.size());

    double total_gt = 0.0;
    std::vector<double> gt_sizes(gt_masks.size(), 0.0);
    for (std::size_t gi = 0; gi < gt_masks.size(); ++gi) {
        for (std::size_t p = 0; p < gt_masks[gi].size(); ++p)
            if (gt_masks[gi][p] && scored(p)) gt_sizes[gi] += 1.0;
        total_gt += gt_sizes[gi];
    }
    if (total_gt == 0.0) throw NumericError("msc: no ground-truth segments in the scored region");

    double cover = 0.0;
    for (std::size_t gi = 0; gi < gt_masks.size(); ++gi) {
        if (gt_sizes[gi] == 0.0) continue;
        double best = 0.0;
        for (const auto& pm : pred_masks) {
            double inter = 0.0, uni = 0.0;
            const std::size_t lim = std::max(pm.size(), gt_masks[gi].size());
            for (std::size_t p = 0; p < lim; ++p) {
                if (!scored(p)) continue;
                const bool a = p < gt_masks[gi].size() && gt_masks[gi][p];
                const bool b = p < pm.size() && pm[p];
                if (a && b) inter += 1.0;
                if (a || b) uni += 1.0;
            }
            if (uni > 0.0) best = std::max(best, inter / uni);
        }
        cover += (gt_sizes[gi] / total_gt) * best;
    }
    return cover;
}

// Binary mask per distinct label id present in the scored region, ids ascending.
inline std::vector<std::vector<std::uint8_t>> labels_to_masks(const LabelMap& m) {
    std::set<int> ids;
    for (std::size_t p = 0; p < m.size(); ++p)
        if (m.scored(p)) ids.insert(m.labels[p]);
    std::vector<std::vector<std::uint8_t>> out;
    out.reserve(ids.size());
    for (int id : ids) {
        std::vector<std::uint8_t> mask(m.size(), 0);
        for (std::size_t p = 0; p < m.size(); ++p)
            if (m.scored(p) && m.labels[p] == id) mask[p] = 1;
        out.push_back(std::move(mask));
    }
    return out;
}

}  // namespace coca
