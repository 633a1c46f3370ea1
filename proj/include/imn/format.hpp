#pragma once

#include <cstdio>
#include <string>

namespace imn {

// Round-trip-safe decimal rendering for CSV output.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace imn
