#pragma once

#include <stdexcept>
#include <string>

namespace cowm {

// Dimension mismatch between operands; message names both shapes.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Singular or ill-conditioned linear system.
struct SingularError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration value (bad grid, unknown override key, c > points, ...).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Violated call precondition (non-unit input, empty model, ...).
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// API misuse (stale cache, step after done, ...).
struct UsageError : std::logic_error {
    using std::logic_error::logic_error;
};

// Runtime failure of an experiment (divergence, non-finite values).
struct RunError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string shape_str(std::size_t rows, std::size_t cols) {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

}  // namespace cowm
