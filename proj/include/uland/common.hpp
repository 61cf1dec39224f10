#pragma once
// Shared basic types and error taxonomy.

#include <stdexcept>
#include <string>

namespace uland {

struct Point {
    double row = 0.0;
    double col = 0.0;
};

// Invalid configuration values (caught before any work starts).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameters were valid but generation could not satisfy its contract.
struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// On-disk artifact is malformed; message names the offending file/field.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CalibrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidArgument : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace uland
