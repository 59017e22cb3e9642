#pragma once

#include <stdexcept>
#include <string>

namespace lsh {

/// Numerical failure inside a kernel (non-convergence, residual blow-up).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// A matrix required to be positive definite is not.
struct NotPositiveDefinite : NumericError {
    explicit NotPositiveDefinite(const std::string& what) : NumericError(what) {}
};

/// Linear system has no unique solution (singular operator).
struct NoUniqueSolution : NumericError {
    explicit NoUniqueSolution(const std::string& what) : NumericError(what) {}
};

/// A sufficient-condition hypothesis fails; the requested analysis does not
/// apply to the given system. Mapped to exit code 2 by the CLI.
struct HypothesisNotMet : std::runtime_error {
    explicit HypothesisNotMet(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or invalid configuration input.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lsh
