#pragma once

#include <stdexcept>
#include <string>

namespace pyrewatch {

/// Invalid or unparsable configuration. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical consistency check failed. CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No admissible design exists (budget too small, threshold unreachable...). CLI exit code 4.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace pyrewatch
