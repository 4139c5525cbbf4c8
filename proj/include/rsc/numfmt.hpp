#pragma once
// Shortest round-trip number formatting (std::to_chars), used wherever
// output bytes must be reproducible.

#include <charconv>
#include <string>

namespace rsc {

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace rsc
