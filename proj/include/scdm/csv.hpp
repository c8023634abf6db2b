#pragma once

#include <cstdio>
#include <string>

namespace scdm {

// Shortest round-trippable text for a double, identical across runs.
inline std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace scdm
