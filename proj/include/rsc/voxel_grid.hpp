#pragma once
// Dense 3D scalar field with spacing metadata. Carrier for probability
// maps, binary masks and integer label volumes (stored as floats).
//
// Layout is x-fastest: index = x + nx*(y + ny*z).

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "rsc/errors.hpp"

namespace rsc {

using Dims3 = std::array<std::uint32_t, 3>;
using Spacing3 = std::array<double, 3>;

class VoxelGrid {
public:
    VoxelGrid() = default;

    VoxelGrid(Dims3 dims, Spacing3 spacing_mm, float fill = 0.0f)
        : dims_(dims), spacing_(spacing_mm) {
        for (int a = 0; a < 3; ++a) {
            if (dims_[a] == 0)
                throw FormatError("VoxelGrid: dims must be positive");
            if (!(spacing_[a] > 0.0))
                throw FormatError("VoxelGrid: spacing must be positive");
        }
        data_.assign(voxel_count(), fill);
    }

    const Dims3& dims() const { return dims_; }
    const Spacing3& spacing() const { return spacing_; }
    std::uint32_t nx() const { return dims_[0]; }
    std::uint32_t ny() const { return dims_[1]; }
    std::uint32_t nz() const { return dims_[2]; }

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    }

    // Volume of one voxel in mm^3.
    double voxel_volume_mm3() const { return spacing_[0] * spacing_[1] * spacing_[2]; }

    std::size_t index(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims_[0]) *
                   (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims_[1]) * z);
    }

    std::array<std::uint32_t, 3> coords(std::size_t i) const {
        const std::uint32_t x = static_cast<std::uint32_t>(i % dims_[0]);
        const std::uint32_t y = static_cast<std::uint32_t>((i / dims_[0]) % dims_[1]);
        const std::uint32_t z = static_cast<std::uint32_t>(i / (static_cast<std::size_t>(dims_[0]) * dims_[1]));
        return {x, y, z};
    }

    float operator()(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
        return data_[index(x, y, z)];
    }
    float& operator()(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
        return data_[index(x, y, z)];
    }
    float operator[](std::size_t i) const { return data_[i]; }
    float& operator[](std::size_t i) { return data_[i]; }

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

    bool same_shape(const VoxelGrid& other) const {
        return dims_ == other.dims_ && spacing_ == other.spacing_;
    }

    bool is_binary() const {
        for (float v : data_)
            if (v != 0.0f && v != 1.0f) return false;
        return true;
    }

private:
    Dims3 dims_{0, 0, 0};
    Spacing3 spacing_{1.0, 1.0, 1.0};
    std::vector<float> data_;
};

// out(x) = 1 if grid(x) >= tau else 0. Inclusive threshold.
inline VoxelGrid threshold(const VoxelGrid& grid, double tau) {
    VoxelGrid out(grid.dims(), grid.spacing());
    const std::size_t n = grid.voxel_count();
    for (std::size_t i = 0; i < n; ++i)
        out[i] = (grid[i] >= tau) ? 1.0f : 0.0f;
    return out;
}

inline void require_same_shape(const VoxelGrid& a, const VoxelGrid& b, const char* what) {
    if (!a.same_shape(b))
        throw DimsMismatch(std::string(what) + ": grids differ in dims or spacing");
}

} // namespace rsc
