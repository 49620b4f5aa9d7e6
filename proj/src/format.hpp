#pragma once

#include <charconv>
#include <string>

#include "error.hpp"

namespace orchard {

// Shortest decimal form that round-trips to the same double. Keeps CSV
// output byte-stable across runs and thread counts.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) fail(Errc::internal, "number formatting failed");
  return std::string(buf, ptr);
}

}  // namespace orchard
