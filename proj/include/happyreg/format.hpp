#pragma once

// Locale-independent number formatting.

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace happyreg {

/// `%.<digits>g`-style rendering that never consults the C locale.
inline std::string format_sig(double v, int digits = 7) {
    if (std::isnan(v))
        return ".";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
    return std::string(buf, res.ptr);
}

/// Shortest representation that round-trips exactly.
inline std::string format_exact(double v) {
    if (std::isnan(v))
        return "NA";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_fixed(double v, int decimals) {
    if (std::isnan(v))
        return ".";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline bool parse_int(std::string_view s, long& out) {
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

} // namespace happyreg
