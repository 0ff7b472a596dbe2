#pragma once

#include <stdexcept>
#include <string>

namespace ldct {

/// Malformed or inconsistent configuration (bad keys, mismatched dimensions).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite values appeared inside an iterative solver.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, int outer, int inner, int subset)
        : std::runtime_error(what + " (outer " + std::to_string(outer) + ", inner " +
                             std::to_string(inner) + ", subset " + std::to_string(subset) + ")"),
          outer_iter(outer), inner_iter(inner), subset_iter(subset) {}

    int outer_iter;
    int inner_iter;
    int subset_iter;
};

}  // namespace ldct
