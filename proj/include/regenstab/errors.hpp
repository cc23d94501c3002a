#pragma once

#include <stdexcept>
#include <string>

namespace regenstab {

/// Input failed schema or invariant validation (bad matrices, parameters, config).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A sampled quantity violated what the model declared (e.g. a cycle length
/// exceeding the declared essential bound).
struct ModelViolation : std::runtime_error {
    explicit ModelViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Requested lift degree or dimension is outside the supported range.
struct DimensionError : ValidationError {
    explicit DimensionError(const std::string& what) : ValidationError(what) {}
};

}  // namespace regenstab
