#pragma once

#include <stdexcept>
#include <string>

namespace modfuse {

// Bad user input: malformed files, invalid config, out-of-range categories.
// CLI exit code 1.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: zero-likelihood observations, degenerate statistics.
// CLI exit code 2.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace modfuse
