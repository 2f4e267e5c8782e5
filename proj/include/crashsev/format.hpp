#pragma once

#include <charconv>
#include <string>

namespace crashsev {

/// Shortest decimal form that parses back to exactly the same double, so
/// 0.8 prints as "0.8" and artifacts stay byte-stable across runs.
inline std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace crashsev
