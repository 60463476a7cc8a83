#pragma once

#include <deque>
#include <optional>

#include "quietgait/common/episode.hpp"
#include "quietgait/common/rng.hpp"
#include "quietgait/quietenv/env_config.hpp"
#include "quietgait/quietenv/episode_state.hpp"
#include "quietgait/quietenv/rewards.hpp"
#include "quietgait/rigidsim/engine.hpp"
#include "quietgait/rigidsim/terrain.hpp"

namespace quietgait::quietenv {

using rigidsim::VecX;

/// Uniform command draw within the configured ranges; held for the episode.
Vec3 sample_command(const EnvConfig& cfg, Rng& rng);

/// Per-episode domain-randomization draw. Force and torque get a magnitude
/// in their ranges and an isotropically random direction.
DrSample randomize(const EnvConfig& cfg, Rng& rng);

/// Maps a raw 24-dim policy action onto the actuator: the first 12 entries
/// are clipped to +-action_clip, scaled by action_scale, added to the
/// default pose and clamped to the joint limits; the last 12 are clipped to
/// +-gain_input_clip and passed through as pre-sigmoid gain inputs (pinned
/// to 0 when the gain action is disabled). Throws InvalidInputError on
/// non-finite input.
rigidsim::ActuatorCommand apply_action(const EnvConfig& cfg, const rigidsim::RobotModel& model,
                                       const VecX& raw_action);

/// Assembles the observation in its fixed order -- joint positions (12),
/// joint velocities (12), last joint targets (12), last gain scales (12),
/// contact switches (4), gravity direction (3), command (3), and optionally
/// base angular rates (3) -- adding uniform noise per group.
VecX observe(const EnvConfig& cfg, const rigidsim::SimState& state, const EpisodeState& episode,
             Rng& rng);

/// Why the episode would end in this state, or kNone. Checks divergence
/// (non-finite state), falls (roll or pitch beyond the limit, or the trunk
/// box touching the ground) and the step-count timeout, in that order.
DoneReason classify_termination(const EnvConfig& cfg, const rigidsim::Engine& engine,
                                const rigidsim::Terrain& terrain, const rigidsim::SimState& state,
                                int steps_taken);

/// Roll and pitch of the base recovered from the gravity direction in the
/// base frame; zero when upright, each in (-pi, pi] / [-pi/2, pi/2].
Vec2 roll_pitch(const rigidsim::SimState& state);

/// One-way curriculum switch shared by every environment, fed with the
/// tracking score of each completed episode.
struct CurriculumLatch {
  bool quiet = false;
  int window = 100;
  std::deque<double> recent;  // most recent completed-episode scores, oldest first

  void record(double episodic_score);
  double running_mean() const;  // 0 before any episode completes
};

/// Evaluates the latch: flips noisy -> quiet when the running mean exceeds
/// the threshold, and never reverts. Returns the phase after evaluation.
Phase curriculum_update(CurriculumLatch& latch, double threshold);

struct StepResult {
  VecX observation;
  RewardBreakdown reward;
  bool done = false;
  DoneReason reason = DoneReason::kNone;
  StepContact contact;
  Vec12 applied_torque = Vec12::Zero();            // last substep
  Vec12 joint_acceleration = Vec12::Zero();        // backward difference
  Vec2 base_angular_acceleration = Vec2::Zero();   // roll-pitch components
};

/// One quadruped locomotion episode generator: owns the dynamic state, the
/// per-episode terrain and engine (rebuilt on reset to absorb the mass
/// randomization), and a private random stream.
class Env {
 public:
  Env(EnvConfig cfg, rigidsim::RobotModel model, Rng rng);
  Env(const EnvConfig& cfg, const rigidsim::RobotModel& model, uint64_t seed);

  /// Starts a new episode under the currently latched phase and returns its
  /// first observation.
  VecX reset();

  /// Advances one control step (sim_substeps physics substeps under a held
  /// actuator command). Throws InvalidInputError if the previous episode
  /// already ended without an intervening reset.
  StepResult step(const VecX& raw_action);

  /// Phase future resets will run under; the running episode keeps its own.
  void set_phase(Phase phase) { phase_ = phase; }
  Phase phase() const { return phase_; }

  /// Pins the command of future episodes instead of sampling one.
  void set_command_override(const Vec3& command) { command_override_ = command; }
  /// Replaces the randomized height field with a fixed terrain (its friction
  /// included); used for slope evaluations.
  void set_terrain_override(const rigidsim::Terrain& terrain) { terrain_override_ = terrain; }

  const rigidsim::SimState& state() const { return state_; }
  const EpisodeState& episode() const { return episode_; }
  const rigidsim::Terrain& terrain() const { return terrain_; }
  const rigidsim::Engine& engine() const { return engine_; }
  const EnvConfig& config() const { return cfg_; }
  bool episode_active() const { return active_; }

  /// Tracking integral normalized by the maximum episode length, in [0, 2].
  double episodic_tracking_score() const;

 private:
  EnvConfig cfg_;
  rigidsim::RobotModel nominal_model_;
  Rng rng_;
  rigidsim::Engine engine_;
  rigidsim::Terrain terrain_;
  rigidsim::SimState state_;
  EpisodeState episode_;
  Phase phase_;
  int max_steps_ = 0;
  bool active_ = false;
  std::optional<Vec3> command_override_;
  std::optional<rigidsim::Terrain> terrain_override_;
};

}  // namespace quietgait::quietenv
