#pragma once

#include <array>

#include "quietgait/rigidsim/types.hpp"

namespace quietgait::rigidsim {

/// Full dynamic state of one simulated robot. base_linear_velocity is the
/// world-frame velocity of the base origin; base_angular_velocity is
/// expressed in the base frame. previous_* fields hold the velocities at the
/// previous control step (not substep) and are maintained by the caller for
/// backward-difference acceleration estimates.
struct SimState {
  Vec3 base_position = Vec3(0, 0, 0.12);
  Quat base_orientation = Quat::Identity();  // base -> world
  Vec3 base_linear_velocity = Vec3::Zero();  // world frame
  Vec3 base_angular_velocity = Vec3::Zero(); // base frame
  Vec12 joint_positions = Vec12::Zero();
  Vec12 joint_velocities = Vec12::Zero();
  Vec12 previous_joint_velocities = Vec12::Zero();
  Vec3 previous_base_angular_velocity = Vec3::Zero();
  double sim_time = 0.0;

  // Contact bookkeeping carried across steps.
  std::array<bool, kNumLegs> foot_contact{};       // binary switch state (> 0.5 N)
  std::array<double, kNumLegs> foot_air_time{};    // s accumulated since liftoff
  std::array<bool, kNumLegs> anchor_active{};      // tangential friction anchor set
  std::array<Vec3, kNumLegs> contact_anchor{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                                            Vec3::Zero()};
};

/// Joint-space action applied by the PD actuator layer: target positions
/// plus the raw (pre-sigmoid) gain scale input per joint.
struct ActuatorCommand {
  Vec12 target_joint_positions = Vec12::Zero();
  Vec12 gain_scale_inputs = Vec12::Zero();
};

/// Per-foot contact sensing for one simulation substep.
struct FootContact {
  bool in_contact = false;      // binary switch f_c: normal force > 0.5 N
  double normal_force = 0.0;    // N
  Vec3 foot_velocity = Vec3::Zero();  // world frame, pre-integration
  Vec3 contact_force = Vec3::Zero();  // world frame, total applied force
  bool touchdown = false;       // switch turned on this step
  double touchdown_speed = 0.0; // |foot_velocity| when touchdown
  double air_time = 0.0;        // s airborne before this step's touchdown, else running value
  Vec2 slip_velocity = Vec2::Zero();  // world xy, zero unless in_contact
};

struct ContactReport {
  std::array<FootContact, kNumLegs> feet{};
  int self_collision_count = 0;
};

}  // namespace quietgait::rigidsim
