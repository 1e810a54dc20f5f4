#pragma once

#include <stdexcept>
#include <string>

namespace cyano {

// Error taxonomy mirrored by the CLI exit codes: configuration problems
// exit 2, unreadable or inconsistent data exits 3, numerical blow-ups exit 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what)
        : std::runtime_error(what) {}
};

}  // namespace cyano
