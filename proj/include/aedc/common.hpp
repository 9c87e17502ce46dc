#pragma once

#include <stdexcept>
#include <string>

namespace aedc {

// File/serialization problems: bad magic, truncation, dimension mismatch
// found while reading data. CLI maps these to exit code 2.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failures (SVD non-convergence and friends). CLI exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace aedc
