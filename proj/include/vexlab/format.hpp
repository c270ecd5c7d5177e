#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace vexlab {

// Shortest of %.15g / %.17g that round-trips; "inf" for infinities.
inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace vexlab
