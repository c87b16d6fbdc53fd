#pragma once

#include <charconv>
#include <fstream>
#include <string>

#include "bsp/belief.hpp"
#include "bsp/types.hpp"

namespace bsp {

/// Shortest round-trip decimal form; the same double always prints the same
/// bytes, which is what the reproducibility checks compare.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

/// Belief snapshot: one row per particle, coordinates then weight.
inline void write_belief_csv(std::ostream& os, const ParticleBelief& b) {
  for (int d = 0; d < b.dim(); ++d) os << "x" << (d + 1) << ",";
  os << "weight\n";
  for (int i = 0; i < b.count(); ++i) {
    for (int d = 0; d < b.dim(); ++d) os << format_double(b.states(d, i)) << ",";
    os << format_double(b.weights[i]) << "\n";
  }
}

inline void write_belief_csv(const std::string& path, const ParticleBelief& b) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  write_belief_csv(os, b);
}

}  // namespace bsp
