/// @file common.hpp
/// @brief Shared error types, unit constants, and small utilities.
#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace pipeflow {

using vec = Eigen::VectorXd;
using mat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kPaPerMPa = 1.0e6;
inline constexpr const char* kVersion = "0.1.0";

/// Invalid user-facing input (bad file, bad id, bad option).  CLI exit code 2.
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure during a computation (solver divergence, positivity
/// loss, step-size collapse).  CLI exit code 1.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

/// Shortest round-trip decimal representation of a double.  Used everywhere a
/// float is written to a file so that output bytes are platform-stable and
/// independent of locale or stream state.
inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// FNV-1a 64-bit hash; used for content-addressed sweep caching.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ull) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace pipeflow
