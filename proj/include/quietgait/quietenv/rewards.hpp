#pragma once

#include <array>

#include "quietgait/quietenv/env_config.hpp"
#include "quietgait/quietenv/episode_state.hpp"
#include "quietgait/rigidsim/sim_state.hpp"

namespace quietgait::quietenv {

/// Contact information aggregated over one control step (all physics
/// substeps). Switch state, slip and foot velocities reflect the last
/// substep; touchdown fields record the first substep at which each foot's
/// switch turned on within the step.
struct StepContact {
  std::array<bool, rigidsim::kNumLegs> in_contact{};
  std::array<bool, rigidsim::kNumLegs> touchdown{};
  std::array<double, rigidsim::kNumLegs> touchdown_speed{};  // |v_f| at landing
  std::array<double, rigidsim::kNumLegs> air_time{};         // s airborne before landing
  std::array<Vec2, rigidsim::kNumLegs> slip_velocity{Vec2::Zero(), Vec2::Zero(), Vec2::Zero(),
                                                     Vec2::Zero()};
  std::array<Vec3, rigidsim::kNumLegs> foot_velocity{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                                                     Vec3::Zero()};
  int self_collisions = 0;

  /// Merges one substep's contact report, oldest first.
  void fold(const rigidsim::ContactReport& report);
};

/// One control step's reward, one named scalar per term. Every field is the
/// final per-step contribution: schedule scale (sign included) times the
/// term value times control_dt.
struct RewardBreakdown {
  double linear_velocity_tracking = 0.0;
  double angular_velocity_tracking = 0.0;
  double joint_torque = 0.0;
  double base_linear_velocity_z = 0.0;
  double base_orientation = 0.0;
  double base_angular_velocity = 0.0;
  double foot_slippage = 0.0;
  double self_collisions = 0.0;
  double foot_air_time = 0.0;
  double joint_target_difference = 0.0;
  double pd_gain_difference = 0.0;
  double foot_contact_velocity = 0.0;
  double joint_acceleration = 0.0;
  double base_angular_acceleration = 0.0;

  static constexpr int kNumTerms = 14;
  static const std::array<const char*, kNumTerms>& term_names();
  std::array<double, kNumTerms> terms() const;  // field order, matches term_names
  double total() const;                         // plain left-to-right sum of terms()
};

/// Evaluates every reward term for the step that moved the system from
/// `prev` to `state` under applied torques `tau` (the last substep's).
/// Velocities are taken in the base frame; orientation and angular terms use
/// the gravity-direction xy components and the roll-pitch rate components;
/// accelerations are backward differences over control_dt.
RewardBreakdown compute_rewards(const EnvConfig& cfg, Phase phase,
                                const rigidsim::SimState& state, const rigidsim::SimState& prev,
                                const StepContact& contact, const EpisodeState& episode,
                                const Vec12& tau);

}  // namespace quietgait::quietenv
