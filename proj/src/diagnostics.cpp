#include "mbnla/diagnostics.hpp"

#include <cstdlib>
#include <iostream>

namespace mbnla {

DiagCounters& diag_counters() {
  static DiagCounters counters;
  return counters;
}

void warn(const std::string& message) {
  std::cerr << "mbnla: warning: " << message << "\n";
}

void note(const std::string& message) {
  static const bool verbose = std::getenv("MBNLA_VERBOSE") != nullptr;
  if (verbose) std::cerr << "mbnla: " << message << "\n";
}

}  // namespace mbnla
