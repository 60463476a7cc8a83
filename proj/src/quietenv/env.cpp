#include "quietgait/quietenv/env.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "quietgait/common/error.hpp"

namespace quietgait::quietenv {

using rigidsim::ActuatorCommand;
using rigidsim::Engine;
using rigidsim::RobotModel;
using rigidsim::SimState;
using rigidsim::Terrain;
using rigidsim::Vec6;

Vec3 sample_command(const EnvConfig& cfg, Rng& rng) {
  return {rng.uniform(cfg.command_x.lo, cfg.command_x.hi),
          rng.uniform(cfg.command_y.lo, cfg.command_y.hi),
          rng.uniform(cfg.command_yaw.lo, cfg.command_yaw.hi)};
}

namespace {

Vec3 random_unit_vector(Rng& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * M_PI);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

bool state_is_finite(const SimState& s) {
  return s.base_position.allFinite() && s.base_linear_velocity.allFinite() &&
         s.base_angular_velocity.allFinite() && s.joint_positions.allFinite() &&
         s.joint_velocities.allFinite() && std::isfinite(s.base_orientation.w()) &&
         std::isfinite(s.base_orientation.x()) && std::isfinite(s.base_orientation.y()) &&
         std::isfinite(s.base_orientation.z());
}

Terrain make_episode_terrain(const EnvConfig& cfg, const DrSample& dr, Rng& rng) {
  const int n = cfg.terrain_grid_nodes;
  std::vector<double> heights(static_cast<size_t>(n) * n);
  for (double& h : heights) h = rng.uniform(0.0, dr.terrain_amplitude);
  return Terrain::height_field(n, cfg.terrain_cell_size, std::move(heights), dr.friction);
}

}  // namespace

DrSample randomize(const EnvConfig& cfg, Rng& rng) {
  DrSample dr;
  dr.base_mass_delta = rng.uniform(cfg.base_mass_delta.lo, cfg.base_mass_delta.hi);
  const double force_mag = rng.uniform(cfg.external_force.lo, cfg.external_force.hi);
  dr.external_force = force_mag * random_unit_vector(rng);
  const double torque_mag = rng.uniform(cfg.external_torque.lo, cfg.external_torque.hi);
  dr.external_torque = torque_mag * random_unit_vector(rng);
  dr.friction = rng.uniform(cfg.friction.lo, cfg.friction.hi);
  dr.terrain_amplitude = rng.uniform(cfg.terrain_height.lo, cfg.terrain_height.hi);
  return dr;
}

ActuatorCommand apply_action(const EnvConfig& cfg, const RobotModel& model,
                             const VecX& raw_action) {
  if (raw_action.size() != EnvConfig::kActionDim) {
    std::ostringstream msg;
    msg << "apply_action: expected a " << EnvConfig::kActionDim << "-dim action, got "
        << raw_action.size();
    throw InvalidInputError(msg.str());
  }
  if (!raw_action.allFinite()) throw InvalidInputError("apply_action: non-finite action");

  ActuatorCommand cmd;
  for (int i = 0; i < rigidsim::kNumJoints; ++i) {
    const double a = std::clamp(raw_action[i], -cfg.action_clip, cfg.action_clip);
    const double target = model.default_pose[i] + cfg.action_scale * a;
    cmd.target_joint_positions[i] =
        std::clamp(target, model.joints[i].joint_limit_lo, model.joints[i].joint_limit_hi);
  }
  if (cfg.use_gain_action) {
    for (int i = 0; i < rigidsim::kNumJoints; ++i)
      cmd.gain_scale_inputs[i] = std::clamp(raw_action[rigidsim::kNumJoints + i],
                                            -cfg.gain_input_clip, cfg.gain_input_clip);
  }
  return cmd;
}

VecX observe(const EnvConfig& cfg, const SimState& state, const EpisodeState& episode, Rng& rng) {
  VecX obs(cfg.observation_dim());
  int k = 0;
  auto put = [&](double value, double level) {
    obs[k++] = level > 0.0 ? value + rng.uniform(-level, level) : value;
  };
  for (int i = 0; i < rigidsim::kNumJoints; ++i)
    put(state.joint_positions[i], cfg.noise.joint_positions);
  for (int i = 0; i < rigidsim::kNumJoints; ++i)
    put(state.joint_velocities[i], cfg.noise.joint_velocities);
  for (int i = 0; i < rigidsim::kNumJoints; ++i)
    put(episode.last_joint_target[i], cfg.noise.joint_targets);
  for (int i = 0; i < rigidsim::kNumJoints; ++i)
    put(episode.last_gain_scale[i], cfg.noise.gain_scales);
  for (int f = 0; f < rigidsim::kNumLegs; ++f) {
    const double flag =
        cfg.zero_contact_observation ? 0.0 : (state.foot_contact[f] ? 1.0 : 0.0);
    put(flag, cfg.noise.foot_contacts);
  }
  const Vec3 gravity = Engine::gravity_orientation(state);
  for (int i = 0; i < 3; ++i) put(gravity[i], cfg.noise.gravity);
  for (int i = 0; i < 3; ++i) put(episode.command[i], cfg.noise.command);
  if (cfg.include_gyro)
    for (int i = 0; i < 3; ++i) put(state.base_angular_velocity[i], cfg.noise.gyro);
  return obs;
}

Vec2 roll_pitch(const SimState& state) {
  const Vec3 g = Engine::gravity_orientation(state);
  const double roll = std::atan2(-g.y(), -g.z());
  const double pitch = std::atan2(g.x(), std::hypot(g.y(), g.z()));
  return {roll, pitch};
}

DoneReason classify_termination(const EnvConfig& cfg, const Engine& engine,
                                const Terrain& terrain, const SimState& state, int steps_taken) {
  if (!state_is_finite(state)) return DoneReason::kDiverged;
  const Vec2 rp = roll_pitch(state);
  if (std::abs(rp.x()) > cfg.max_roll_pitch || std::abs(rp.y()) > cfg.max_roll_pitch)
    return DoneReason::kFall;
  for (const Vec3& corner : engine.trunk_corners(state))
    if (corner.z() < terrain.height(corner.x(), corner.y())) return DoneReason::kFall;
  const int max_steps = static_cast<int>(std::lround(cfg.episode_length / cfg.control_dt));
  if (steps_taken >= max_steps) return DoneReason::kTimeout;
  return DoneReason::kNone;
}

void CurriculumLatch::record(double episodic_score) {
  recent.push_back(episodic_score);
  while (static_cast<int>(recent.size()) > window) recent.pop_front();
}

double CurriculumLatch::running_mean() const {
  if (recent.empty()) return 0.0;
  double sum = 0.0;
  for (double v : recent) sum += v;
  return sum / static_cast<double>(recent.size());
}

Phase curriculum_update(CurriculumLatch& latch, double threshold) {
  if (!latch.quiet && !latch.recent.empty() && latch.running_mean() > threshold)
    latch.quiet = true;
  return latch.quiet ? Phase::kQuiet : Phase::kNoisy;
}

Env::Env(EnvConfig cfg, RobotModel model, Rng rng)
    : cfg_(std::move(cfg)),
      nominal_model_(std::move(model)),
      rng_(rng),
      engine_(nominal_model_),
      terrain_(Terrain::flat()),
      phase_(cfg_.initial_phase) {
  cfg_.validate();
  nominal_model_.validate();
  max_steps_ = static_cast<int>(std::lround(cfg_.episode_length / cfg_.control_dt));
}

Env::Env(const EnvConfig& cfg, const RobotModel& model, uint64_t seed)
    : Env(cfg, model, Rng(seed)) {}

double Env::episodic_tracking_score() const {
  return episode_.tracking_score_accum / cfg_.episode_length;
}

VecX Env::reset() {
  episode_ = EpisodeState{};
  episode_.phase = phase_;
  episode_.dr = randomize(cfg_, rng_);
  if (terrain_override_) {
    terrain_ = *terrain_override_;
  } else {
    terrain_ = make_episode_terrain(cfg_, episode_.dr, rng_);
  }
  RobotModel m = nominal_model_;
  m.base_mass += episode_.dr.base_mass_delta;
  engine_ = Engine(std::move(m));

  SimState s;
  for (int i = 0; i < rigidsim::kNumJoints; ++i)
    s.joint_positions[i] = nominal_model_.default_pose[i] +
                           rng_.uniform(-cfg_.reset_joint_noise, cfg_.reset_joint_noise);
  const double yaw = rng_.uniform(-cfg_.reset_yaw_range, cfg_.reset_yaw_range);
  s.base_orientation = rigidsim::Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
  s.base_position.setZero();

  // Drop the base exactly far enough for the lowest foot to rest on the
  // ground (foot xy positions do not depend on the base height).
  const auto feet = engine_.foot_kinematics(s);
  double base_z = nominal_model_.stand_height;
  for (const auto& foot : feet) {
    const double ground = terrain_.height(foot.position.x(), foot.position.y());
    base_z = std::max(base_z, ground + nominal_model_.foot_radius - foot.position.z());
  }
  s.base_position.z() = base_z;

  episode_.command = command_override_ ? *command_override_ : sample_command(cfg_, rng_);
  episode_.last_joint_target = nominal_model_.default_pose;
  episode_.prev_joint_target = nominal_model_.default_pose;
  episode_.last_gain_scale.setConstant(rigidsim::sigmoid(0.0));
  episode_.prev_gain_scale = episode_.last_gain_scale;

  state_ = s;
  active_ = true;
  return observe(cfg_, state_, episode_, rng_);
}

StepResult Env::step(const VecX& raw_action) {
  if (!active_)
    throw InvalidInputError("env: step called on a finished episode; call reset first");

  StepResult out;
  const ActuatorCommand cmd = apply_action(cfg_, nominal_model_, raw_action);
  episode_.prev_joint_target = episode_.last_joint_target;
  episode_.prev_gain_scale = episode_.last_gain_scale;
  episode_.last_joint_target = cmd.target_joint_positions;
  for (int i = 0; i < rigidsim::kNumJoints; ++i)
    episode_.last_gain_scale[i] = rigidsim::sigmoid(cmd.gain_scale_inputs[i]);

  const SimState prev = state_;
  state_.previous_joint_velocities = state_.joint_velocities;
  state_.previous_base_angular_velocity = state_.base_angular_velocity;

  const double sub_dt = cfg_.control_dt / cfg_.sim_substeps;
  Vec6 wrench;
  wrench << episode_.dr.external_torque, episode_.dr.external_force;
  const bool has_wrench = episode_.dr.external_force.squaredNorm() +
                              episode_.dr.external_torque.squaredNorm() >
                          0.0;

  bool diverged = false;
  try {
    for (int k = 0; k < cfg_.sim_substeps; ++k) {
      out.applied_torque = engine_.pd_torques(state_, cmd);
      auto [next, report] =
          engine_.step(state_, out.applied_torque, terrain_, sub_dt, has_wrench ? &wrench : nullptr);
      state_ = std::move(next);
      out.contact.fold(report);
    }
  } catch (const DivergedError&) {
    diverged = true;
  }

  episode_.steps += 1;
  episode_.elapsed = episode_.steps * cfg_.control_dt;

  if (!diverged) {
    episode_.time_since_disturbance += cfg_.control_dt;
    if (episode_.time_since_disturbance >= cfg_.disturbance_period - 1e-12) {
      episode_.time_since_disturbance -= cfg_.disturbance_period;
      const Vec3 dv(rng_.uniform(cfg_.velocity_disturbance.lo, cfg_.velocity_disturbance.hi),
                    rng_.uniform(cfg_.velocity_disturbance.lo, cfg_.velocity_disturbance.hi),
                    rng_.uniform(cfg_.velocity_disturbance.lo, cfg_.velocity_disturbance.hi));
      state_ = Engine::apply_velocity_impulse(state_, dv);
    }

    out.reward =
        compute_rewards(cfg_, episode_.phase, state_, prev, out.contact, episode_, out.applied_torque);
    episode_.tracking_score_accum +=
        out.reward.linear_velocity_tracking + out.reward.angular_velocity_tracking;
    out.joint_acceleration = (state_.joint_velocities - prev.joint_velocities) / cfg_.control_dt;
    out.base_angular_acceleration =
        (state_.base_angular_velocity.head<2>() - prev.base_angular_velocity.head<2>()) /
        cfg_.control_dt;
  }

  const DoneReason reason =
      diverged ? DoneReason::kDiverged
               : classify_termination(cfg_, engine_, terrain_, state_, episode_.steps);
  out.done = reason != DoneReason::kNone;
  out.reason = reason;
  if (out.done) active_ = false;
  out.observation = reason == DoneReason::kDiverged ? VecX::Zero(cfg_.observation_dim())
                                                    : observe(cfg_, state_, episode_, rng_);
  return out;
}

}  // namespace quietgait::quietenv
