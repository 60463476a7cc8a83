#include "quietgait/quietenv/rewards.hpp"

#include <cmath>

#include "quietgait/rigidsim/engine.hpp"

namespace quietgait::quietenv {

void StepContact::fold(const rigidsim::ContactReport& report) {
  for (int f = 0; f < rigidsim::kNumLegs; ++f) {
    const rigidsim::FootContact& foot = report.feet[f];
    in_contact[f] = foot.in_contact;
    slip_velocity[f] = foot.slip_velocity;
    foot_velocity[f] = foot.foot_velocity;
    if (foot.touchdown && !touchdown[f]) {  // keep the first landing of the step
      touchdown[f] = true;
      touchdown_speed[f] = foot.touchdown_speed;
      air_time[f] = foot.air_time;
    }
  }
  self_collisions = report.self_collision_count;
}

const std::array<const char*, RewardBreakdown::kNumTerms>& RewardBreakdown::term_names() {
  static const std::array<const char*, kNumTerms> names = {
      "linear_velocity_tracking", "angular_velocity_tracking", "joint_torque",
      "base_linear_velocity_z",   "base_orientation",          "base_angular_velocity",
      "foot_slippage",            "self_collisions",           "foot_air_time",
      "joint_target_difference",  "pd_gain_difference",        "foot_contact_velocity",
      "joint_acceleration",       "base_angular_acceleration"};
  return names;
}

std::array<double, RewardBreakdown::kNumTerms> RewardBreakdown::terms() const {
  return {linear_velocity_tracking, angular_velocity_tracking, joint_torque,
          base_linear_velocity_z,   base_orientation,          base_angular_velocity,
          foot_slippage,            self_collisions,           foot_air_time,
          joint_target_difference,  pd_gain_difference,        foot_contact_velocity,
          joint_acceleration,       base_angular_acceleration};
}

double RewardBreakdown::total() const {
  double sum = 0.0;
  for (double t : terms()) sum += t;
  return sum;
}

RewardBreakdown compute_rewards(const EnvConfig& cfg, Phase phase,
                                const rigidsim::SimState& state, const rigidsim::SimState& prev,
                                const StepContact& contact, const EpisodeState& episode,
                                const Vec12& tau) {
  const RewardScales& s = scales_for(cfg, phase);
  const double dt = cfg.control_dt;
  RewardBreakdown r;

  const rigidsim::Mat3 base_rot = state.base_orientation.toRotationMatrix();
  const Vec3 v_base = base_rot.transpose() * state.base_linear_velocity;
  const Vec3& w_base = state.base_angular_velocity;  // already base frame

  const Vec2 lin_err(episode.command.x() - v_base.x(), episode.command.y() - v_base.y());
  r.linear_velocity_tracking =
      s.linear_velocity_tracking * std::exp(-lin_err.squaredNorm() / cfg.tracking_sigma) * dt;
  const double ang_err = episode.command.z() - w_base.z();
  r.angular_velocity_tracking =
      s.angular_velocity_tracking * std::exp(-ang_err * ang_err / cfg.tracking_sigma) * dt;

  r.joint_torque = s.joint_torque * tau.squaredNorm() * dt;
  r.base_linear_velocity_z = s.base_linear_velocity_z * v_base.z() * v_base.z() * dt;

  const Vec3 gravity = rigidsim::Engine::gravity_orientation(state);
  r.base_orientation =
      s.base_orientation * (gravity.x() * gravity.x() + gravity.y() * gravity.y()) * dt;
  r.base_angular_velocity = s.base_angular_velocity * w_base.head<2>().squaredNorm() * dt;

  double slip = 0.0;
  for (int f = 0; f < rigidsim::kNumLegs; ++f) slip += contact.slip_velocity[f].squaredNorm();
  r.foot_slippage = s.foot_slippage * slip * dt;
  r.self_collisions = s.self_collisions * contact.self_collisions * dt;

  double air_credit = 0.0;
  for (int f = 0; f < rigidsim::kNumLegs; ++f)
    if (contact.touchdown[f]) air_credit += contact.air_time[f] - cfg.air_time_threshold;
  r.foot_air_time = s.foot_air_time * air_credit * dt;

  r.joint_target_difference =
      s.joint_target_difference *
      (episode.last_joint_target - episode.prev_joint_target).squaredNorm() * dt;
  r.pd_gain_difference = s.pd_gain_difference *
                         (episode.last_gain_scale - episode.prev_gain_scale).squaredNorm() * dt;

  double contact_vel = 0.0;
  if (cfg.contact_velocity_mode == ContactVelocityMode::kTouchdown) {
    for (int f = 0; f < rigidsim::kNumLegs; ++f)
      if (contact.touchdown[f]) contact_vel += contact.touchdown_speed[f] * contact.touchdown_speed[f];
  } else {
    for (int f = 0; f < rigidsim::kNumLegs; ++f)
      if (contact.in_contact[f]) contact_vel += contact.foot_velocity[f].squaredNorm();
  }
  r.foot_contact_velocity = s.foot_contact_velocity * contact_vel * dt;

  const Vec12 joint_accel = (state.joint_velocities - prev.joint_velocities) / dt;
  r.joint_acceleration = s.joint_acceleration * joint_accel.squaredNorm() * dt;
  const Vec2 ang_accel =
      (w_base.head<2>() - prev.base_angular_velocity.head<2>()).eval() / dt;
  r.base_angular_acceleration = s.base_angular_acceleration * ang_accel.squaredNorm() * dt;

  return r;
}

}  // namespace quietgait::quietenv
