#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "quietgait/rigidsim/robot_model.hpp"
#include "quietgait/rigidsim/sim_state.hpp"
#include "quietgait/rigidsim/spatial.hpp"
#include "quietgait/rigidsim/terrain.hpp"

namespace quietgait::rigidsim {

struct FootState {
  Vec3 position = Vec3::Zero();  // world, foot sphere centre
  Vec3 velocity = Vec3::Zero();  // world
};

/// Adaptive PD gain schedule: P = 3 + 4*sigmoid(x), D = 0.03 + 0.02*sigmoid(x),
/// with the same sigmoid value feeding both gains of a joint.
inline constexpr double kPGainBase = 3.0;
inline constexpr double kPGainSpan = 4.0;
inline constexpr double kDGainBase = 0.03;
inline constexpr double kDGainSpan = 0.02;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Deterministic floating-base dynamics for one quadruped. All methods are
/// pure functions of their inputs; an Engine holds only the (immutable)
/// model and quantities precomputed from it, so one Engine may be shared by
/// concurrent callers or cheaply rebuilt per episode.
class Engine {
 public:
  explicit Engine(RobotModel model);

  /// One semi-implicit Euler substep under gravity, joint torques, penalty
  /// foot contacts and an optional external base wrench ([moment; force],
  /// world frame, applied at the base origin).
  std::pair<SimState, ContactReport> step(const SimState& state, const Vec12& tau,
                                          const Terrain& terrain, double dt,
                                          const Vec6* base_wrench = nullptr) const;

  /// Adaptive-PD torques, clamped to the per-joint torque limit.
  Vec12 pd_torques(const SimState& state, const ActuatorCommand& cmd) const;

  /// The P and D gains the actuator would apply for gain inputs x.
  static void pd_gains(const Vec12& x, Vec12& p_out, Vec12& d_out);

  std::array<FootState, kNumLegs> foot_kinematics(const SimState& state) const;

  /// Unit gravity direction in the base frame: R^T (0,0,-1).
  static Vec3 gravity_orientation(const SimState& state);

  static SimState apply_velocity_impulse(const SimState& state, const Vec3& dv);

  /// Colliding pairs among trunk box and 8 leg-link capsules, excluding
  /// kinematically adjacent pairs.
  int self_collision_count(const SimState& state) const;

  double mechanical_energy(const SimState& state) const;
  Vec3 com_position(const SimState& state) const;
  double total_mass() const { return total_mass_; }
  std::array<Vec3, 8> trunk_corners(const SimState& state) const;

  const RobotModel& model() const { return model_; }

 private:
  struct Kinematics {
    std::array<Mat3, kNumBodies> rot_world;   // body -> world
    std::array<Vec3, kNumBodies> origin_world;
    std::array<Mat3, kNumBodies> rot_to_child;  // E: parent coords -> child coords
    std::array<Vec6, kNumBodies> velocity;    // spatial, body coords
  };

  void forward_pass(const SimState& state, Kinematics& k) const;
  void check_finite(const SimState& state) const;
  int self_collision_from_kinematics(const Kinematics& k) const;

  RobotModel model_;
  std::array<int, kNumBodies> parent_{};
  std::array<Vec3, kNumBodies> tree_offset_{};  // child origin in parent frame
  std::array<SpatialInertia, kNumBodies> body_inertia_{};
  std::array<Vec3, kNumBodies> axis_{};         // joint axis, child frame (unused for base)
  std::array<Vec3, kNumLegs> foot_offset_{};    // foot centre in tip-body frame
  std::vector<int> active_dofs_;                // indices into the 18-dof vector
  double total_mass_ = 0.0;
};

}  // namespace quietgait::rigidsim
