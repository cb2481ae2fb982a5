#pragma once

#include <charconv>
#include <string>

namespace sepmel {

/// Shortest decimal that round-trips the double (<= 17 significant digits).
inline std::string format_double(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

}  // namespace sepmel
