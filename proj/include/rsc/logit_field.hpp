#pragma once
// Optimization carrier for probability maps: one logit per voxel for each
// of ET/ED/TC, mapped through a per-voxel softmax over {background, ET,
// ED, TC} with the background logit pinned at 0. The pinning removes the
// softmax gauge freedom, and the induced channels satisfy et+ed+tc <= 1
// by construction.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rsc/cues.hpp"
#include "rsc/prob_maps.hpp"
#include "rsc/rng.hpp"
#include "rsc/voxel_grid.hpp"

namespace rsc {

inline int channel_of(Substructure k) {
    switch (k) {
        case Substructure::ET: return 0;
        case Substructure::ED: return 1;
        case Substructure::TC: return 2;
        default: return -1;
    }
}

struct LogitField {
    Dims3 dims{0, 0, 0};
    Spacing3 spacing{1.0, 1.0, 1.0};
    std::array<std::vector<double>, 3> logits; // ET, ED, TC

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }

    static LogitField constant(Dims3 dims, Spacing3 spacing, double value) {
        LogitField f;
        f.dims = dims;
        f.spacing = spacing;
        for (auto& ch : f.logits) ch.assign(f.voxel_count(), value);
        return f;
    }

    // I.i.d. uniform logits in [lo, hi), deterministic from the seed.
    static LogitField random_uniform(Dims3 dims, Spacing3 spacing, std::uint64_t seed,
                                     double lo = -1.0, double hi = 1.0) {
        LogitField f = constant(dims, spacing, 0.0);
        Rng rng(seed);
        for (auto& ch : f.logits)
            for (double& v : ch) v = rng.uniform(lo, hi);
        return f;
    }

    // Softmax probabilities of the three foreground classes at voxel i.
    std::array<double, 3> probs_at(std::size_t i) const {
        const double e0 = std::exp(logits[0][i]);
        const double e1 = std::exp(logits[1][i]);
        const double e2 = std::exp(logits[2][i]);
        const double denom = 1.0 + e0 + e1 + e2;
        return {e0 / denom, e1 / denom, e2 / denom};
    }

    ProbMaps to_probmaps() const {
        ProbMaps maps{VoxelGrid(dims, spacing), VoxelGrid(dims, spacing),
                      VoxelGrid(dims, spacing)};
        const std::size_t n = voxel_count();
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = probs_at(i);
            maps.et[i] = static_cast<float>(p[0]);
            maps.ed[i] = static_cast<float>(p[1]);
            maps.tc[i] = static_cast<float>(p[2]);
        }
        return maps;
    }
};

} // namespace rsc
