#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dancer {

using real_t = double;

// Error taxonomy, mapped to distinct CLI exit codes.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};
struct TrainError : std::runtime_error {
    explicit TrainError(const std::string& msg) : std::runtime_error(msg) {}
};
struct UsageError : std::logic_error {
    explicit UsageError(const std::string& msg) : std::logic_error(msg) {}
};

inline bool is_finite(real_t x) { return std::isfinite(x); }

}  // namespace dancer
