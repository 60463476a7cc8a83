#pragma once

// JSON checkpoints: configuration echo, iteration counter, curriculum phase,
// and all network weights as nested number arrays. Doubles survive the
// serialize/parse round trip bit-exactly (shortest round-trip decimal form).

#include <nlohmann/json.hpp>
#include <string>

#include "quietgait/ppolearn/ppo.hpp"

namespace quietgait::ppolearn {

struct Checkpoint {
  PolicyParams params;
  PpoConfig config;
  long iteration = 0;
  int curriculum_phase = 0;
};

nlohmann::json save_checkpoint(const PolicyParams& params, const PpoConfig& config,
                               long iteration, int curriculum_phase);

/// Parses and validates a checkpoint document. Structural problems raise a
/// parse error carrying the JSON path; weight arrays whose shapes disagree
/// with the recorded dimensions raise an incompatibility error naming the
/// layer.
Checkpoint load_checkpoint(const nlohmann::json& doc);

void save_checkpoint_file(const std::string& path, const PolicyParams& params,
                          const PpoConfig& config, long iteration, int curriculum_phase);
Checkpoint load_checkpoint_file(const std::string& path);

/// Verifies that restored parameters fit the caller's observation/action
/// dimensions, raising an incompatibility error naming the first mismatching
/// layer otherwise.
void check_compatible(const PolicyParams& params, int obs_dim, int act_dim);

}  // namespace quietgait::ppolearn
