#pragma once

#include <stdexcept>
#include <string>

namespace tsacap {

// Thrown when tensor shapes do not satisfy an operation's rules.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown for malformed or inconsistent on-disk data (corpus files,
// checkpoints, prediction files).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a computation produces NaN/Inf or a numerical check fails.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tsacap
