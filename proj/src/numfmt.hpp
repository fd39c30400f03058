#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace aidl {

// Shortest decimal form that round-trips to the same double. All serialized
// numbers (JSON, SVG, formatted programs) go through here so repeated runs
// are byte-identical.
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return std::signbit(v) ? "-0" : "0";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace aidl
