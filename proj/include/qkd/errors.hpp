#pragma once

#include <stdexcept>
#include <string>

namespace qkd {

/// Invalid or inconsistent configuration: bad parameter ranges, truncation
/// deficit above tolerance, mismatched session pieces.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// The requested adversary strategy cannot be realized (e.g. a target yield
/// above the total multi-photon probability it must be carried by).
struct InfeasibleError : std::runtime_error {
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// A yield estimate was requested for a source that sent zero pulses.
struct EstimateError : std::runtime_error {
    explicit EstimateError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qkd
