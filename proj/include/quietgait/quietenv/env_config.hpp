#pragma once

#include <array>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace quietgait::quietenv {

/// Reward schedule phase. Training starts in the noisy-walking phase and a
/// one-way latch moves every environment to the quiet-walking phase once the
/// tracking score clears the curriculum threshold.
enum class Phase { kNoisy, kQuiet };

const char* phase_name(Phase p);
Phase phase_from_name(const std::string& name);  // throws InvalidInputError

/// Closed interval used for every randomized quantity.
struct Range {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
};

/// Per-group observation noise magnitudes. Each observation element is
/// perturbed by an independent uniform draw in [-level, +level].
struct NoiseLevels {
  double joint_positions = 0.01;   // rad
  double joint_velocities = 1.5;   // rad/s
  double joint_targets = 0.0;      // last commanded targets are fed back exactly
  double gain_scales = 0.0;        // last commanded gain scales likewise
  double foot_contacts = 0.0;      // binary switches
  double gravity = 0.05;           // unit-vector components
  double command = 0.0;
  double gyro = 0.2;               // rad/s
};

/// One column of the reward schedule: scale per term, sign included. The
/// per-step reward contribution of a term is scale * term * control_dt.
struct RewardScales {
  double linear_velocity_tracking = 1.0;
  double angular_velocity_tracking = 1.0;
  double joint_torque = -0.015;
  double base_linear_velocity_z = -3.0;
  double base_orientation = -5.0;
  double base_angular_velocity = -0.05;
  double foot_slippage = -0.15;
  double self_collisions = -10.0;
  double foot_air_time = 2.0;
  double joint_target_difference = -0.02;
  double pd_gain_difference = -0.005;
  double foot_contact_velocity = -5.0;
  double joint_acceleration = -2e-7;
  double base_angular_acceleration = -5e-5;
};

/// When the contact-velocity penalty applies: only at the step a foot's
/// switch turns on (charging the squared touchdown speed once per landing),
/// or continuously for every foot in contact.
enum class ContactVelocityMode { kTouchdown, kContinuous };

/// Full environment configuration. Every number lives here by name so that
/// experiment variants are plain config edits; defaults reproduce the
/// standard training setup.
struct EnvConfig {
  static constexpr int kActionDim = 24;  // 12 joint targets + 12 gain inputs

  double control_dt = 0.01;   // s, policy rate 100 Hz
  int sim_substeps = 4;       // physics at 400 Hz
  double episode_length = 20.0;  // s

  // Observation layout and noise.
  bool include_gyro = true;            // append base angular rates (3)
  bool zero_contact_observation = false;  // feed 0 for all contact switches
  NoiseLevels noise;

  // Velocity command ranges; one command is drawn per episode.
  Range command_x{-0.15, 0.30};   // m/s
  Range command_y{-0.10, 0.10};   // m/s
  Range command_yaw{-0.6, 0.6};   // rad/s

  // Action mapping.
  double action_scale = 0.25;     // rad per unit of clipped action
  double action_clip = 4.0;       // joint-target half of the action
  double gain_input_clip = 6.0;   // pre-sigmoid gain half
  bool use_gain_action = true;    // false pins x = 0, i.e. P = 5.0, D = 0.04

  // Reward shaping.
  double tracking_sigma = 0.06;        // denominator of exp(-err^2 / sigma)
  double air_time_threshold = 0.2;     // s credited against each landing
  ContactVelocityMode contact_velocity_mode = ContactVelocityMode::kTouchdown;
  RewardScales noisy_scales;
  RewardScales quiet_scales = {.foot_contact_velocity = -25.0,
                               .joint_acceleration = -4e-7,
                               .base_angular_acceleration = -1e-4};

  // Curriculum latch.
  bool curriculum_enabled = true;
  double curriculum_threshold = 1.5;
  int curriculum_window = 100;  // completed episodes in the running mean
  Phase initial_phase = Phase::kNoisy;

  // Domain randomization, drawn per episode unless noted.
  Range base_mass_delta{-0.4, 0.4};        // kg added to the trunk
  Range velocity_disturbance{-0.2, 0.2};   // m/s per axis, drawn at every tick
  Range external_force{0.0, 0.4};          // N, fixed direction per episode
  Range external_torque{0.0, 0.1};         // N m, fixed direction per episode
  Range terrain_height{0.002, 0.01};       // m, height-field amplitude
  Range friction{0.4, 0.7};
  double disturbance_period = 4.0;         // s between velocity impulses
  int terrain_grid_nodes = 201;            // height-field resolution
  double terrain_cell_size = 0.05;         // m between nodes

  // Reset and termination.
  double reset_joint_noise = 0.05;  // rad, uniform perturbation of the pose
  double reset_yaw_range = 3.141592653589793;  // rad, spawn heading +-range
  double max_roll_pitch = 1.0;      // rad before the episode counts as a fall

  int observation_dim() const { return 55 + 3 + (include_gyro ? 3 : 0); }

  void validate() const;  // throws InvalidInputError naming the bad field

  /// Collapses every randomization range to a point and flattens the
  /// terrain, for controlled evaluation at a fixed friction.
  void disable_randomization(double fixed_friction);
};

/// Scale column for the active phase.
const RewardScales& scales_for(const EnvConfig& cfg, Phase phase);

void to_json(nlohmann::json& j, const EnvConfig& cfg);

/// Parses a config document produced by to_json (or any subset of it;
/// missing keys keep their defaults). Unknown keys and type mismatches are
/// rejected with the offending JSON path in the message.
void from_json(const nlohmann::json& j, EnvConfig& cfg);

EnvConfig load_env_config(const std::string& path);  // empty file = defaults
void save_env_config(const EnvConfig& cfg, const std::string& path);

}  // namespace quietgait::quietenv
