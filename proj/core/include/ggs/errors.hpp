#ifndef GGS_ERRORS_HPP
#define GGS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ggs {

/// Invalid configuration value or combination.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error("config error: " + msg) {}
};

/// Broken or inconsistent input data (missing mask, size mismatch, ...).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error("data error: " + msg) {}
};

/// API misuse: a precondition the caller controls was violated.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error("usage error: " + msg) {}
};

/// Model contract violation (shape mismatch at a network boundary).
struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& msg) : std::runtime_error("model error: " + msg) {}
};

/// Non-finite values where finite ones are required.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error("numeric error: " + msg) {}
};

/// Metrics requested from an empty confusion matrix.
struct UndefinedMetricsError : std::runtime_error {
    explicit UndefinedMetricsError(const std::string& msg)
        : std::runtime_error("undefined metrics: " + msg) {}
};

} // namespace ggs

#endif
