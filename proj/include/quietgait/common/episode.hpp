#pragma once

#include <cstdint>

namespace quietgait {

/// Why an episode (or rollout segment) ended at a given step. Shared between
/// the environment, the rollout storage, and the experiment harness so that
/// termination bookkeeping never goes through string matching.
enum class DoneReason : std::uint8_t { kNone = 0, kTimeout = 1, kFall = 2, kDiverged = 3 };

inline const char* done_reason_name(DoneReason r) {
  switch (r) {
    case DoneReason::kNone: return "none";
    case DoneReason::kTimeout: return "timeout";
    case DoneReason::kFall: return "fall";
    case DoneReason::kDiverged: return "diverged";
  }
  return "unknown";
}

}  // namespace quietgait
