#pragma once

#include <cstdio>
#include <string>

namespace nls {

/// Shortest exact decimal form of a double ("%.17g"), used everywhere text
/// output must be byte-stable across reruns.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace nls
