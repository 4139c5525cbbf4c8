#pragma once
// Three-channel substructure probability volumes plus binary anatomy masks.
//
// The ET/ED/TC channels are disjoint classes, so et+ed+tc <= 1 holds at
// every voxel and the derived whole-tumor map wt = et+ed+tc is itself a
// probability.

#include <cstdint>
#include <string>

#include "rsc/errors.hpp"
#include "rsc/voxel_grid.hpp"

namespace rsc {

// Label-volume encoding, stored as floats in a VoxelGrid.
inline constexpr float kLabelBackground = 0.0f;
inline constexpr float kLabelEt = 1.0f;
inline constexpr float kLabelEd = 2.0f;
inline constexpr float kLabelTc = 3.0f;

struct ProbMaps {
    VoxelGrid et;
    VoxelGrid ed;
    VoxelGrid tc;

    void validate() const {
        require_same_shape(et, ed, "ProbMaps");
        require_same_shape(et, tc, "ProbMaps");
        const std::size_t n = et.voxel_count();
        for (std::size_t i = 0; i < n; ++i) {
            const float a = et[i], b = ed[i], c = tc[i];
            if (a < 0.0f || a > 1.0f || b < 0.0f || b > 1.0f || c < 0.0f || c > 1.0f)
                throw FormatError("ProbMaps: channel value outside [0,1]");
            // Small slack for float round-off in one-hot / softmax inputs.
            if (static_cast<double>(a) + b + c > 1.0 + 1e-6)
                throw FormatError("ProbMaps: et+ed+tc exceeds 1");
        }
    }

    double wt_at(std::size_t i) const {
        return static_cast<double>(et[i]) + ed[i] + tc[i];
    }

    VoxelGrid make_wt() const {
        VoxelGrid wt(et.dims(), et.spacing());
        const std::size_t n = et.voxel_count();
        for (std::size_t i = 0; i < n; ++i)
            wt[i] = static_cast<float>(wt_at(i));
        return wt;
    }
};

struct AnatomyMasks {
    VoxelGrid dural;
    VoxelGrid parench;

    void validate() const {
        require_same_shape(dural, parench, "AnatomyMasks");
        const std::size_t n = dural.voxel_count();
        for (std::size_t i = 0; i < n; ++i) {
            if (!((dural[i] == 0.0f || dural[i] == 1.0f) &&
                  (parench[i] == 0.0f || parench[i] == 1.0f)))
                throw FormatError("AnatomyMasks: values must be 0 or 1");
            if (dural[i] == 1.0f && parench[i] == 1.0f)
                throw FormatError("AnatomyMasks: compartments overlap");
        }
    }
};

} // namespace rsc
