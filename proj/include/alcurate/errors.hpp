#pragma once

#include <stdexcept>
#include <string>

namespace alcurate {

// Bad user-facing configuration: rejected before any computation starts.
// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent data encountered at runtime (bad CSV rows,
// conflicting subject labels, ...). The CLI maps this to exit code 1.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// The active-learning pool has no transferable instances left.
class PoolExhausted : public std::runtime_error {
public:
    explicit PoolExhausted(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace alcurate
