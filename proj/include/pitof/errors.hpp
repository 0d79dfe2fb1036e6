#pragma once

#include <stdexcept>
#include <string>

namespace pitof {

/// Bad user-supplied configuration (scene files, camera parameters, presets).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem and serialization failures.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: non-convergent quadrature, impossible fit, empty calibration.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pitof
