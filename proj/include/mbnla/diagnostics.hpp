#pragma once

#include <atomic>
#include <cstdint>
#include <string>

namespace mbnla {

/// Process-wide counters for numerical guard rails that are expected to fire
/// only on round-off (negative-entropy clamps, physicality projections).
/// Tests assert on these; sweeps report them.
struct DiagCounters {
  std::atomic<uint64_t> entropy_clamps{0};
  std::atomic<uint64_t> holevo_clamps{0};
  std::atomic<uint64_t> physicality_projections{0};
  std::atomic<uint64_t> bootstrap_redraws{0};

  void reset() {
    entropy_clamps = 0;
    holevo_clamps = 0;
    physicality_projections = 0;
    bootstrap_redraws = 0;
  }
};

DiagCounters& diag_counters();

/// Writes a one-line warning to stderr (always) prefixed with "mbnla: ".
void warn(const std::string& message);

/// Writes a note to stderr only when MBNLA_VERBOSE is set.
void note(const std::string& message);

}  // namespace mbnla
