#pragma once
// VGR1 grid file format, little-endian:
//   bytes  0..3   magic "VGR1"
//   bytes  4..15  nx, ny, nz as unsigned 32-bit
//   bytes 16..39  sx, sy, sz as IEEE-754 binary64, in mm
//   bytes 40..    nx*ny*nz payload floats (binary32), x-fastest
//
// Floats round-trip bit-exactly (NaN payloads included): values are moved
// between memory and disk as raw bit patterns, never through arithmetic.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rsc/errors.hpp"
#include "rsc/voxel_grid.hpp"

namespace rsc {

namespace detail {

inline void put_u32_le(std::uint8_t* out, std::uint32_t v) {
    out[0] = static_cast<std::uint8_t>(v);
    out[1] = static_cast<std::uint8_t>(v >> 8);
    out[2] = static_cast<std::uint8_t>(v >> 16);
    out[3] = static_cast<std::uint8_t>(v >> 24);
}

inline std::uint32_t get_u32_le(const std::uint8_t* in) {
    return static_cast<std::uint32_t>(in[0]) | (static_cast<std::uint32_t>(in[1]) << 8) |
           (static_cast<std::uint32_t>(in[2]) << 16) | (static_cast<std::uint32_t>(in[3]) << 24);
}

inline void put_u64_le(std::uint8_t* out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

inline std::uint64_t get_u64_le(const std::uint8_t* in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
    return v;
}

} // namespace detail

inline constexpr std::size_t kVgrHeaderBytes = 40;

inline void write_grid(const VoxelGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("write_grid: cannot open " + path.string());

    std::uint8_t header[kVgrHeaderBytes];
    std::memcpy(header, "VGR1", 4);
    for (int a = 0; a < 3; ++a)
        detail::put_u32_le(header + 4 + 4 * a, grid.dims()[a]);
    for (int a = 0; a < 3; ++a)
        detail::put_u64_le(header + 16 + 8 * a, std::bit_cast<std::uint64_t>(grid.spacing()[a]));
    out.write(reinterpret_cast<const char*>(header), kVgrHeaderBytes);

    std::vector<std::uint8_t> payload(grid.voxel_count() * 4);
    for (std::size_t i = 0; i < grid.voxel_count(); ++i)
        detail::put_u32_le(payload.data() + 4 * i, std::bit_cast<std::uint32_t>(grid[i]));
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    if (!out)
        throw IoError("write_grid: write failed for " + path.string());
}

inline VoxelGrid read_grid(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("read_grid: cannot open " + path.string());

    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("read_grid: read failed for " + path.string());
    if (bytes.size() < kVgrHeaderBytes)
        throw FormatError("read_grid: truncated header in " + path.string());
    if (std::memcmp(bytes.data(), "VGR1", 4) != 0)
        throw FormatError("read_grid: bad magic in " + path.string());

    Dims3 dims;
    for (int a = 0; a < 3; ++a) {
        dims[a] = detail::get_u32_le(bytes.data() + 4 + 4 * a);
        if (dims[a] == 0)
            throw FormatError("read_grid: zero dimension in " + path.string());
        // keeps nx*ny*nz*4 far from std::uint64_t overflow
        if (dims[a] > (1u << 20))
            throw FormatError("read_grid: implausible dimension in " + path.string());
    }
    Spacing3 spacing;
    for (int a = 0; a < 3; ++a) {
        spacing[a] = std::bit_cast<double>(detail::get_u64_le(bytes.data() + 16 + 8 * a));
        if (!(spacing[a] > 0.0))
            throw FormatError("read_grid: non-positive spacing in " + path.string());
    }

    const std::uint64_t n =
        static_cast<std::uint64_t>(dims[0]) * dims[1] * dims[2];
    if (bytes.size() - kVgrHeaderBytes != n * 4)
        throw FormatError("read_grid: payload length mismatch in " + path.string());

    VoxelGrid grid(dims, spacing);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = std::bit_cast<float>(detail::get_u32_le(bytes.data() + kVgrHeaderBytes + 4 * i));
    return grid;
}

} // namespace rsc
