#pragma once

#include <charconv>
#include <string>

namespace basinlab {

/// Shortest decimal form of a double that reads back to the same value
/// ('.' separator, independent of locale).
inline std::string format_real(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace basinlab
