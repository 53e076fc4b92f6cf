#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "coca/affinity.hpp"
#include "coca/compactness.hpp"
#include "coca/error.hpp"
#include "coca/rng.hpp"
#include "coca/tensor.hpp"

namespace coca {

// Remaining unassigned share per node, in [0, 1]. Starts at all ones and only
// ever decreases elementwise.
struct Scope {
    Tensor z;  // [n]
    double total() const { return z.sum(); }
};

// k x n cluster masks; the last row is always the residual scope and carries
// no anchor, so anchors.size() + 1 == mask count.
struct ClusterMasks {
    Tensor pi;                        // [k, n]
    std::vector<std::size_t> anchors; // anchored rows only, in emission order
    std::size_t k() const { return pi.shape.empty() ? 0 : pi.shape[0]; }
    std::size_t n() const { return pi.shape.size() < 2 ? 0 : pi.shape[1]; }
};

struct StopPolicy {
    enum class Kind : std::uint8_t { Fixed, Dynamic } kind = Kind::Fixed;
    std::size_t k = 1;         // total masks including the residual (Fixed)
    double threshold = 0.025;  // stop when scope total < threshold * n (Dynamic)

    static StopPolicy fixed(std::size_t k) { return {Kind::Fixed, k, 0.025}; }
    static StopPolicy dynamic(double threshold = 0.025) { return {Kind::Dynamic, 1, threshold}; }
};

enum class AnchorMode : std::uint8_t { Compact, Random };

// Argmax of the scope-eroded working scores, ties to the lowest index. An
// all-zero input is legal (fully drained scope, e.g. a uniform window) and
// selects node 0; the resulting mask is all-zero either way.
inline std::size_t select_anchor_compact(const Tensor& eroded) {
    const std::size_t n = eroded.numel();
    if (n == 0) throw ConfigError("select_anchor_compact: empty scores");
    std::size_t best = 0;
    double best_v = eroded(0);
    for (std::size_t i = 1; i < n; ++i) {
        if (eroded(i) > best_v) {  // strict: ties keep the lowest index
            best = i;
            best_v = eroded(i);
        }
    }
    return best;
}

// Samples node i with probability z[i] / sum(z). Deterministic given the engine state.
inline std::size_t select_anchor_random(const Scope& scope, std::mt19937_64& eng) {
    const std::size_t n = scope.z.numel();
    const double total = scope.total();
    if (n == 0 || total <= 0.0) throw NumericError("select_anchor_random: scope is all zero");
    const double u = uniform_double(eng) * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cum += scope.z(i);
        if (u < cum) return i;
    }
    for (std::size_t i = n; i-- > 0;)
        if (scope.z(i) > 0.0) return i;  // u landed on accumulated rounding
    throw NumericError("select_anchor_random: scope is all zero");
}

// Sequential stick breaking. Each round erodes the working scores by the scope
// in place, anchors the best (or a scope-sampled) node, carves that anchor's
// affinity row out of the scope, and repeats; the leftover scope is appended
// unconditionally as the final mask.
inline ClusterMasks sbc_cluster(const AffinityMasks& masks, const CompactnessScores& scores,
                                const StopPolicy& policy, AnchorMode mode,
                                std::mt19937_64* eng = nullptr) {
    const std::size_t n = masks.n();
    if (scores.c.numel() != n) throw ConfigError("sbc_cluster: size mismatch");
    if (mode == AnchorMode::Random && eng == nullptr)
        throw ConfigError("sbc_cluster: random anchor mode needs an engine");
    if (policy.kind == StopPolicy::Kind::Fixed && (policy.k == 0 || policy.k > n + 1))
        throw ConfigError("sbc_cluster: fixed k must be in [1, n+1]");
    if (policy.kind == StopPolicy::Kind::Dynamic &&
        (policy.threshold <= 0.0 || policy.threshold >= 1.0))
        throw ConfigError("sbc_cluster: dynamic threshold must be in (0, 1)");

    Scope scope{Tensor::full({n}, 1.0)};
    Tensor work = scores.c;  // eroded in place across rounds
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> anchors;

    auto stop = [&]() {
        if (policy.kind == StopPolicy::Kind::Fixed) return rows.size() + 1 >= policy.k;
        if (rows.size() >= n) return true;  // safety cap; adversarial soft inputs
        return scope.total() < policy.threshold * static_cast<double>(n);
    };

    while (!stop()) {
        for (std::size_t i = 0; i < n; ++i) work(i) *= scope.z(i);
        std::size_t omega;
        if (mode == AnchorMode::Compact) {
            omega = select_anchor_compact(work);
        } else if (scope.total() > 0.0) {
            omega = select_anchor_random(scope, *eng);
        } else {
            omega = 0;  // drained scope: the carved mask is all-zero regardless
        }
        std::vector<double> row(n);
        for (std::size_t i = 0; i < n; ++i) {
            row[i] = masks.lambda(omega, i) * scope.z(i);
            scope.z(i) *= 1.0 - row[i];
        }
        rows.push_back(std::move(row));
        anchors.push_back(omega);
    }

    ClusterMasks out;
    out.pi = Tensor({rows.size() + 1, n});
    for (std::size_t m = 0; m < rows.size(); ++m)
        for (std::size_t i = 0; i < n; ++i) out.pi(m, i) = rows[m][i];
    for (std::size_t i = 0; i < n; ++i) out.pi(rows.size(), i) = scope.z(i);
    out.anchors = std::move(anchors);
    return out;
}

}  // namespace coca
