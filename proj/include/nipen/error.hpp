#pragma once

#include <stdexcept>
#include <string>

namespace nipen {

// Base for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (files, indices, duplicate records).
struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Non-finite values, divergence, probabilities pinned at 0/1.
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Invalid configuration or hyperparameters.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace nipen
