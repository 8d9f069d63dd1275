#pragma once

#include <stdexcept>
#include <string>

namespace diskbeam {

/// Bad user input: unknown catalog ids, malformed configs, inadmissible parameters.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A numerical routine failed (factorization, eigensolver, root bracketing).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A data series violates a precondition of an analysis routine
/// (domain violation, non-positive samples inside a log-fit window, ...).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace diskbeam
