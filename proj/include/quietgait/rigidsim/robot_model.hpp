#pragma once

#include <array>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "quietgait/rigidsim/types.hpp"

namespace quietgait::rigidsim {

/// One actuated joint plus the link it carries. Links are modelled as rods
/// extending along the child frame's -z axis; the centre of mass sits at
/// com_ratio * link_length down the rod, with an isotropic rotational
/// inertia about the com.
struct JointSpec {
  std::string name;
  Vec3 axis = Vec3::UnitY();  // rotation axis in the child frame
  double link_length = 0.0;   // m
  double link_mass = 0.0;     // kg
  double link_inertia = 0.0;  // kg m^2 about the link com
  double link_com_ratio = 0.5;
  double joint_limit_lo = -3.14;
  double joint_limit_hi = 3.14;
  double torque_limit = 1.2;     // N m
  double velocity_limit = 25.0;  // rad/s
};

/// Floating-base quadruped: a trunk box plus four identical 3-joint legs
/// (shoulder pitch, shoulder roll, ankle pitch). Legs are ordered
/// FR, FL, HR, HL; joints are leg-major.
struct RobotModel {
  double base_mass = 1.6;  // kg
  Mat3 base_inertia = Mat3::Identity();
  Vec3 base_half_extents = Vec3(0.09, 0.05, 0.03);  // trunk collision box, m
  std::array<Vec3, kNumLegs> hip_offsets{};
  std::array<JointSpec, kNumJoints> joints{};
  double foot_radius = 0.012;              // m
  double collision_capsule_radius = 0.008; // leg-link capsules, m
  Vec12 default_pose = Vec12::Zero();
  double stand_height = 0.12;  // base height when standing at default_pose, m

  // Test-rig switches: pin the trunk in space and/or freeze individual
  // joints out of the dynamics (used e.g. for pendulum experiments).
  bool fixed_base = false;
  std::array<bool, kNumJoints> locked_joints{};

  static RobotModel default_model();
  void validate() const;  // throws InvalidInputError on violated invariants

  int joint_index(int leg, int joint_in_leg) const { return leg * kJointsPerLeg + joint_in_leg; }
};

RobotModel robot_model_from_json(const nlohmann::json& j);
nlohmann::json robot_model_to_json(const RobotModel& m);
RobotModel load_robot_model(const std::string& path);

}  // namespace quietgait::rigidsim
