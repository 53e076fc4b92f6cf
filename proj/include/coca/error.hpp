#pragma once

#include <stdexcept>
#include <string>

namespace coca {

// Error taxonomy mirrors the CLI exit codes: 1 = I/O, 2 = configuration, 3 = numeric.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace coca
