#pragma once

// Deterministic policy evaluation and the simulation-side experiments built
// on it: flat-ground quietness metrics, the slope-robustness sweep, the
// friction sweep, and per-joint gain-schedule traces.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "quietgait/acoustics/penalty.hpp"
#include "quietgait/acoustics/spectrum.hpp"
#include "quietgait/common/episode.hpp"
#include "quietgait/ppolearn/policy.hpp"
#include "quietgait/quietctl/experiment.hpp"
#include "quietgait/quietenv/env_config.hpp"
#include "quietgait/rigidsim/terrain.hpp"
#include "quietgait/rigidsim/types.hpp"

namespace quietgait::quietctl {

struct EvalOptions {
  int n_episodes = 10;
  rigidsim::Vec3 command{0.2, 0.0, 0.0};  // base-frame (vx, vy, wz)
  double friction = 0.55;
  std::uint64_t seed = 1234;
  double episode_length = 20.0;    // s
  double metrics_duration = 10.0;  // s the penalty metrics average over

  void validate() const;
};

/// The evaluation environment for a trained policy: the policy's own config
/// with every randomization collapsed, observation noise off, the spawn
/// heading fixed to +x and the command pinned.
quietenv::EnvConfig evaluation_config(quietenv::EnvConfig cfg, const EvalOptions& opt);

struct EpisodeEval {
  double length = 0.0;  // s survived
  DoneReason reason = DoneReason::kNone;
  double tracking_score = 0.0;    // [0, 2]
  double forward_distance = 0.0;  // m along world +x
  int touchdowns = 0;
  double touchdown_speed_sum = 0.0;  // m/s summed over touchdowns
  acoustics::PenaltyMetrics penalties;
  double impact_band_db = acoustics::kDbFloor;  // impact-proxy band power
};

struct EvalReport {
  std::vector<EpisodeEval> episodes;
  int successes = 0;  // episodes that ran to the timeout
  int falls = 0;      // fall or divergence terminations
  double mean_touchdown_speed = 0.0;    // m/s, pooled over every touchdown
  double mean_joint_accel = 0.0;        // rad/s^2, mean of per-episode norms
  double mean_base_ang_accel = 0.0;     // rad/s^2
  double mean_tracking_score = 0.0;
  double mean_forward_distance = 0.0;   // m
  double mean_impact_band_db = acoustics::kDbFloor;
};

/// Mean-action rollouts of `params` under `cfg` (already variant-resolved);
/// episodes differ only through the seeded reset pose. A terrain override
/// replaces the flat ground (used by the slope sweep).
EvalReport evaluate_policy(const ppolearn::PolicyParams& params, quietenv::EnvConfig cfg,
                           const rigidsim::RobotModel& model, const EvalOptions& opt,
                           const rigidsim::Terrain* terrain_override = nullptr);

/// One trained policy with the config it was trained under.
struct NamedPolicy {
  std::string name;
  ppolearn::PolicyParams params;
  quietenv::EnvConfig env;
};

/// Loads config.json + checkpoint_latest.json from a training run directory.
NamedPolicy load_run(const std::string& run_dir);

struct SlopeRow {
  std::string name;
  double angle_deg = 0.0;
  int episodes = 0;
  int successes = 0;  // >= 0.5 m up the ramp within the episode, no fall
  double mean_touchdown_speed = 0.0;
  double impact_band_db = acoustics::kDbFloor;
  int falls = 0;
};

/// Climbs a ramp of each angle with each policy; success requires at least
/// 0.5 m of progress along the ramp axis without a fall.
std::vector<SlopeRow> sweep_slope(const std::vector<NamedPolicy>& policies,
                                  const rigidsim::RobotModel& model,
                                  const std::vector<double>& angles_deg,
                                  const EvalOptions& opt);

struct FrictionRow {
  std::string name;
  double friction = 0.0;
  int episodes = 0;
  int successes = 0;
  double mean_touchdown_speed = 0.0;
  int falls = 0;
};

/// Flat-ground evaluation across a friction grid.
std::vector<FrictionRow> sweep_friction(const std::vector<NamedPolicy>& policies,
                                        const rigidsim::RobotModel& model,
                                        const std::vector<double>& frictions,
                                        const EvalOptions& opt);

struct GainTraceRow {
  double time = 0.0;                   // s
  std::array<double, 12> gain_scale{};  // sigmoid outputs actually applied
  std::array<bool, 4> contact{};        // FR, FL, HR, HL switches
  double fr_foot_speed = 0.0;           // m/s, fore-right foot
};

/// One mean-action rollout logging the applied gain schedule at control rate.
std::vector<GainTraceRow> trace_gains(const ppolearn::PolicyParams& params,
                                      quietenv::EnvConfig cfg,
                                      const rigidsim::RobotModel& model, double duration,
                                      const EvalOptions& opt);

// CSV emission; every writer puts the header first and the provenance
// comment line second.
void write_eval_csv(const std::string& path, const EvalReport& report,
                    const std::string& provenance);
void write_slope_csv(const std::string& path, const std::vector<SlopeRow>& rows,
                     const std::string& provenance);
void write_friction_csv(const std::string& path, const std::vector<FrictionRow>& rows,
                        const std::string& provenance);
void write_trace_csv(const std::string& path, const std::vector<GainTraceRow>& rows,
                     const std::string& provenance);

}  // namespace quietgait::quietctl
