#pragma once
// Exception hierarchy shared by all rsc modules.

#include <stdexcept>
#include <string>

namespace rsc {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// File could not be opened / read / written.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// File exists but its bytes do not form a valid grid.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

// Report document violates its invariants (e.g. every section empty).
class MalformedDocument : public Error {
public:
    explicit MalformedDocument(const std::string& msg) : Error(msg) {}
};

// A recognized measurement pattern contained a non-positive value.
class MalformedMeasurement : public Error {
public:
    explicit MalformedMeasurement(const std::string& msg) : Error(msg) {}
};

// Connected-component labeling fed a grid with values outside {0,1}.
class NonBinaryInput : public Error {
public:
    explicit NonBinaryInput(const std::string& msg) : Error(msg) {}
};

// Two grids that must share dims/spacing do not.
class DimsMismatch : public Error {
public:
    explicit DimsMismatch(const std::string& msg) : Error(msg) {}
};

// total_loss called with both batches empty.
class BothBatchesEmpty : public Error {
public:
    explicit BothBatchesEmpty(const std::string& msg) : Error(msg) {}
};

// Optimizer produced a non-finite loss.
class DivergenceDetected : public Error {
public:
    explicit DivergenceDetected(const std::string& msg) : Error(msg) {}
};

// Phantom spec violates its invariants.
class SpecInvalid : public Error {
public:
    explicit SpecInvalid(const std::string& msg) : Error(msg) {}
};

} // namespace rsc
