#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace cswarm {

/// Shortest round-trip decimal form; empty for NaN.
inline std::string format_number(double v) {
  if (std::isnan(v))
    return {};
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

} // namespace cswarm
