#pragma once
// Connected-component labeling of binary volumes with per-component
// volume and bounding-box statistics.
//
// Two-pass union-find over the half-neighborhood of already-scanned
// voxels, then a relabeling pass that assigns labels in first-encounter
// scan order (x-fastest), so the output is deterministic.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "rsc/errors.hpp"
#include "rsc/voxel_grid.hpp"

namespace rsc {

enum class Connectivity : int { Six = 6, TwentySix = 26 };

enum class SizeMode { MaxExtent, Volume };

struct ComponentStats {
    std::size_t voxel_count = 0;
    double volume_mm3 = 0.0;
    // Bounding-box extents per axis in mm: (max_idx - min_idx + 1) * spacing.
    std::array<double, 3> extents_mm{0.0, 0.0, 0.0};
    double max_extent_mm = 0.0;
};

struct ComponentSet {
    VoxelGrid labels;      // 0 = background, components numbered from 1
    std::size_t count = 0; // |C_pred|
    std::vector<ComponentStats> stats;
};

inline double component_size(const ComponentStats& s, SizeMode mode) {
    return mode == SizeMode::MaxExtent ? s.max_extent_mm : s.volume_mm3;
}

namespace detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t i) {
        while (parent_[i] != i) {
            parent_[i] = parent_[parent_[i]]; // path halving
            i = parent_[i];
        }
        return i;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        // Attach the larger root to the smaller: keeps roots at the
        // earliest scan index, which the relabeling pass relies on.
        if (a < b)
            parent_[b] = a;
        else
            parent_[a] = b;
    }

private:
    std::vector<std::size_t> parent_;
};

} // namespace detail

inline ComponentSet label_components(const VoxelGrid& binary, Connectivity connectivity) {
    const std::size_t n = binary.voxel_count();
    for (std::size_t i = 0; i < n; ++i)
        if (binary[i] != 0.0f && binary[i] != 1.0f)
            throw NonBinaryInput("label_components: grid values must be 0 or 1");

    const std::int64_t nx = binary.nx(), ny = binary.ny(), nz = binary.nz();

    // Half-neighborhood: offsets that point at already-scanned voxels.
    std::vector<std::array<std::int64_t, 3>> offsets;
    if (connectivity == Connectivity::Six) {
        offsets = {{-1, 0, 0}, {0, -1, 0}, {0, 0, -1}};
    } else {
        for (std::int64_t dz = -1; dz <= 0; ++dz)
            for (std::int64_t dy = -1; dy <= 1; ++dy)
                for (std::int64_t dx = -1; dx <= 1; ++dx) {
                    if (dz == 0 && (dy > 0 || (dy == 0 && dx >= 0))) continue;
                    offsets.push_back({dx, dy, dz});
                }
    }

    detail::UnionFind uf(n);
    for (std::int64_t z = 0; z < nz; ++z)
        for (std::int64_t y = 0; y < ny; ++y)
            for (std::int64_t x = 0; x < nx; ++x) {
                const std::size_t i = binary.index(static_cast<std::uint32_t>(x),
                                                   static_cast<std::uint32_t>(y),
                                                   static_cast<std::uint32_t>(z));
                if (binary[i] == 0.0f) continue;
                for (const auto& d : offsets) {
                    const std::int64_t px = x + d[0], py = y + d[1], pz = z + d[2];
                    if (px < 0 || py < 0 || pz < 0 || px >= nx || py >= ny || pz >= nz)
                        continue;
                    const std::size_t j = binary.index(static_cast<std::uint32_t>(px),
                                                       static_cast<std::uint32_t>(py),
                                                       static_cast<std::uint32_t>(pz));
                    if (binary[j] != 0.0f) uf.unite(i, j);
                }
            }

    ComponentSet out;
    out.labels = VoxelGrid(binary.dims(), binary.spacing());

    // Relabel roots consecutively in first-encounter order and collect stats.
    std::vector<std::uint32_t> root_label(n, 0);
    std::vector<std::array<std::uint32_t, 6>> boxes; // minx,miny,minz,maxx,maxy,maxz
    for (std::size_t i = 0; i < n; ++i) {
        if (binary[i] == 0.0f) continue;
        const std::size_t root = uf.find(i);
        if (root_label[root] == 0) {
            root_label[root] = static_cast<std::uint32_t>(++out.count);
            out.stats.push_back({});
            boxes.push_back({UINT32_MAX, UINT32_MAX, UINT32_MAX, 0, 0, 0});
        }
        const std::uint32_t label = root_label[root];
        out.labels[i] = static_cast<float>(label);
        auto& st = out.stats[label - 1];
        auto& box = boxes[label - 1];
        st.voxel_count += 1;
        const auto c = binary.coords(i);
        for (int a = 0; a < 3; ++a) {
            box[a] = std::min(box[a], c[a]);
            box[3 + a] = std::max(box[3 + a], c[a]);
        }
    }

    const auto& sp = binary.spacing();
    for (std::size_t k = 0; k < out.count; ++k) {
        auto& st = out.stats[k];
        st.volume_mm3 = static_cast<double>(st.voxel_count) * sp[0] * sp[1] * sp[2];
        for (int a = 0; a < 3; ++a)
            st.extents_mm[a] = static_cast<double>(boxes[k][3 + a] - boxes[k][a] + 1) * sp[a];
        st.max_extent_mm = std::max({st.extents_mm[0], st.extents_mm[1], st.extents_mm[2]});
    }
    return out;
}

// Largest component size under the chosen mode; 0 when there are none.
inline double largest_component_size(const ComponentSet& comps, SizeMode mode) {
    double best = 0.0;
    for (const auto& s : comps.stats)
        best = std::max(best, component_size(s, mode));
    return best;
}

} // namespace rsc
