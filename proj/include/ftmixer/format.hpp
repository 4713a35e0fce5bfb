#pragma once

#include <charconv>
#include <string>

namespace ftmixer {

/// Shortest text that parses back to exactly the same double.
inline std::string format_real(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace ftmixer
