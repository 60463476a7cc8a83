#include "quietgait/quietenv/env_config.hpp"

#include <cctype>
#include <fstream>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "quietgait/common/error.hpp"

namespace quietgait::quietenv {

using nlohmann::json;

const char* phase_name(Phase p) { return p == Phase::kNoisy ? "noisy" : "quiet"; }

Phase phase_from_name(const std::string& name) {
  if (name == "noisy") return Phase::kNoisy;
  if (name == "quiet") return Phase::kQuiet;
  throw InvalidInputError("env config: unknown phase '" + name + "' (expected noisy or quiet)");
}

namespace {

const char* mode_name(ContactVelocityMode m) {
  return m == ContactVelocityMode::kTouchdown ? "touchdown" : "continuous";
}

ContactVelocityMode mode_from_name(const std::string& name, const std::string& path) {
  if (name == "touchdown") return ContactVelocityMode::kTouchdown;
  if (name == "continuous") return ContactVelocityMode::kContinuous;
  throw InvalidInputError("env config: " + path + ": unknown contact-velocity mode '" + name +
                          "' (expected touchdown or continuous)");
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw InvalidInputError("env config: " + path + ": " + what);
}

const json& as_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  return j;
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char* k : known)
      if (key == k) {
        ok = true;
        break;
      }
    if (!ok) fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? key : path + "." + key;
}

void read_number(const json& j, const std::string& path, const char* key, double& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_number()) fail(join(path, key), "expected a number");
  out = it->get<double>();
}

void read_int(const json& j, const std::string& path, const char* key, int& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_number_integer()) fail(join(path, key), "expected an integer");
  out = it->get<int>();
}

void read_bool(const json& j, const std::string& path, const char* key, bool& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_boolean()) fail(join(path, key), "expected a boolean");
  out = it->get<bool>();
}

void read_range(const json& j, const std::string& path, const char* key, Range& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
    fail(join(path, key), "expected [min, max]");
  out.lo = (*it)[0].get<double>();
  out.hi = (*it)[1].get<double>();
}

json range_to_json(const Range& r) { return json::array({r.lo, r.hi}); }

constexpr std::initializer_list<const char*> kScaleKeys = {
    "linear_velocity_tracking", "angular_velocity_tracking", "joint_torque",
    "base_linear_velocity_z",   "base_orientation",          "base_angular_velocity",
    "foot_slippage",            "self_collisions",           "foot_air_time",
    "joint_target_difference",  "pd_gain_difference",        "foot_contact_velocity",
    "joint_acceleration",       "base_angular_acceleration"};

json scales_to_json(const RewardScales& s) {
  return json{{"linear_velocity_tracking", s.linear_velocity_tracking},
              {"angular_velocity_tracking", s.angular_velocity_tracking},
              {"joint_torque", s.joint_torque},
              {"base_linear_velocity_z", s.base_linear_velocity_z},
              {"base_orientation", s.base_orientation},
              {"base_angular_velocity", s.base_angular_velocity},
              {"foot_slippage", s.foot_slippage},
              {"self_collisions", s.self_collisions},
              {"foot_air_time", s.foot_air_time},
              {"joint_target_difference", s.joint_target_difference},
              {"pd_gain_difference", s.pd_gain_difference},
              {"foot_contact_velocity", s.foot_contact_velocity},
              {"joint_acceleration", s.joint_acceleration},
              {"base_angular_acceleration", s.base_angular_acceleration}};
}

void scales_from_json(const json& j, const std::string& path, RewardScales& s) {
  as_object(j, path);
  check_keys(j, path, kScaleKeys);
  read_number(j, path, "linear_velocity_tracking", s.linear_velocity_tracking);
  read_number(j, path, "angular_velocity_tracking", s.angular_velocity_tracking);
  read_number(j, path, "joint_torque", s.joint_torque);
  read_number(j, path, "base_linear_velocity_z", s.base_linear_velocity_z);
  read_number(j, path, "base_orientation", s.base_orientation);
  read_number(j, path, "base_angular_velocity", s.base_angular_velocity);
  read_number(j, path, "foot_slippage", s.foot_slippage);
  read_number(j, path, "self_collisions", s.self_collisions);
  read_number(j, path, "foot_air_time", s.foot_air_time);
  read_number(j, path, "joint_target_difference", s.joint_target_difference);
  read_number(j, path, "pd_gain_difference", s.pd_gain_difference);
  read_number(j, path, "foot_contact_velocity", s.foot_contact_velocity);
  read_number(j, path, "joint_acceleration", s.joint_acceleration);
  read_number(j, path, "base_angular_acceleration", s.base_angular_acceleration);
}

void require_nonneg(double v, const char* name) {
  if (!(v >= 0.0)) throw InvalidInputError(std::string("env config: ") + name + " must be >= 0");
}

void require_valid_range(const Range& r, const char* name) {
  std::ostringstream msg;
  if (!(r.lo <= r.hi)) {
    msg << "env config: " << name << ": min " << r.lo << " exceeds max " << r.hi;
    throw InvalidInputError(msg.str());
  }
}

}  // namespace

const RewardScales& scales_for(const EnvConfig& cfg, Phase phase) {
  return phase == Phase::kNoisy ? cfg.noisy_scales : cfg.quiet_scales;
}

void EnvConfig::validate() const {
  if (!(control_dt > 0.0)) throw InvalidInputError("env config: control_dt must be > 0");
  if (sim_substeps < 1) throw InvalidInputError("env config: sim_substeps must be >= 1");
  if (!(episode_length > 0.0)) throw InvalidInputError("env config: episode_length must be > 0");
  require_nonneg(noise.joint_positions, "observation.noise.joint_positions");
  require_nonneg(noise.joint_velocities, "observation.noise.joint_velocities");
  require_nonneg(noise.joint_targets, "observation.noise.joint_targets");
  require_nonneg(noise.gain_scales, "observation.noise.gain_scales");
  require_nonneg(noise.foot_contacts, "observation.noise.foot_contacts");
  require_nonneg(noise.gravity, "observation.noise.gravity");
  require_nonneg(noise.command, "observation.noise.command");
  require_nonneg(noise.gyro, "observation.noise.gyro");
  require_valid_range(command_x, "commands.linear_x");
  require_valid_range(command_y, "commands.linear_y");
  require_valid_range(command_yaw, "commands.angular_z");
  if (!(action_scale > 0.0)) throw InvalidInputError("env config: action.position_scale must be > 0");
  if (!(action_clip > 0.0)) throw InvalidInputError("env config: action.position_clip must be > 0");
  if (!(gain_input_clip > 0.0))
    throw InvalidInputError("env config: action.gain_input_clip must be > 0");
  if (!(tracking_sigma > 0.0))
    throw InvalidInputError("env config: rewards.tracking_sigma must be > 0");
  require_nonneg(air_time_threshold, "rewards.air_time_threshold");
  require_nonneg(curriculum_threshold, "curriculum.threshold");
  if (curriculum_window < 1) throw InvalidInputError("env config: curriculum.window must be >= 1");
  require_valid_range(base_mass_delta, "randomization.base_mass_delta");
  require_valid_range(velocity_disturbance, "randomization.velocity_disturbance");
  require_valid_range(external_force, "randomization.external_force");
  require_valid_range(external_torque, "randomization.external_torque");
  require_valid_range(terrain_height, "randomization.terrain_height");
  require_valid_range(friction, "randomization.friction");
  require_nonneg(external_force.lo, "randomization.external_force min");
  require_nonneg(external_torque.lo, "randomization.external_torque min");
  require_nonneg(terrain_height.lo, "randomization.terrain_height min");
  if (!(friction.lo >= 0.0))
    throw InvalidInputError("env config: randomization.friction min must be >= 0");
  if (!(disturbance_period > 0.0))
    throw InvalidInputError("env config: randomization.disturbance_period must be > 0");
  if (terrain_grid_nodes < 2)
    throw InvalidInputError("env config: randomization.terrain_grid_nodes must be >= 2");
  if (!(terrain_cell_size > 0.0))
    throw InvalidInputError("env config: randomization.terrain_cell_size must be > 0");
  require_nonneg(reset_joint_noise, "reset.joint_noise");
  require_nonneg(reset_yaw_range, "reset.yaw_range");
  if (!(max_roll_pitch > 0.0))
    throw InvalidInputError("env config: termination.max_roll_pitch must be > 0");
}

void EnvConfig::disable_randomization(double fixed_friction) {
  base_mass_delta = {0.0, 0.0};
  velocity_disturbance = {0.0, 0.0};
  external_force = {0.0, 0.0};
  external_torque = {0.0, 0.0};
  terrain_height = {0.0, 0.0};
  friction = {fixed_friction, fixed_friction};
}

void to_json(json& j, const EnvConfig& cfg) {
  j = json{
      {"control_dt", cfg.control_dt},
      {"sim_substeps", cfg.sim_substeps},
      {"episode_length", cfg.episode_length},
      {"observation",
       {{"include_gyro", cfg.include_gyro},
        {"zero_contact_flags", cfg.zero_contact_observation},
        {"noise",
         {{"joint_positions", cfg.noise.joint_positions},
          {"joint_velocities", cfg.noise.joint_velocities},
          {"joint_targets", cfg.noise.joint_targets},
          {"gain_scales", cfg.noise.gain_scales},
          {"foot_contacts", cfg.noise.foot_contacts},
          {"gravity", cfg.noise.gravity},
          {"command", cfg.noise.command},
          {"gyro", cfg.noise.gyro}}}}},
      {"commands",
       {{"linear_x", range_to_json(cfg.command_x)},
        {"linear_y", range_to_json(cfg.command_y)},
        {"angular_z", range_to_json(cfg.command_yaw)}}},
      {"action",
       {{"position_scale", cfg.action_scale},
        {"position_clip", cfg.action_clip},
        {"gain_input_clip", cfg.gain_input_clip},
        {"use_gain_action", cfg.use_gain_action}}},
      {"rewards",
       {{"tracking_sigma", cfg.tracking_sigma},
        {"air_time_threshold", cfg.air_time_threshold},
        {"contact_velocity_mode", mode_name(cfg.contact_velocity_mode)},
        {"noisy", scales_to_json(cfg.noisy_scales)},
        {"quiet", scales_to_json(cfg.quiet_scales)}}},
      {"curriculum",
       {{"enabled", cfg.curriculum_enabled},
        {"threshold", cfg.curriculum_threshold},
        {"window", cfg.curriculum_window},
        {"initial_phase", phase_name(cfg.initial_phase)}}},
      {"randomization",
       {{"base_mass_delta", range_to_json(cfg.base_mass_delta)},
        {"velocity_disturbance", range_to_json(cfg.velocity_disturbance)},
        {"external_force", range_to_json(cfg.external_force)},
        {"external_torque", range_to_json(cfg.external_torque)},
        {"terrain_height", range_to_json(cfg.terrain_height)},
        {"friction", range_to_json(cfg.friction)},
        {"disturbance_period", cfg.disturbance_period},
        {"terrain_grid_nodes", cfg.terrain_grid_nodes},
        {"terrain_cell_size", cfg.terrain_cell_size}}},
      {"reset",
       {{"joint_noise", cfg.reset_joint_noise}, {"yaw_range", cfg.reset_yaw_range}}},
      {"termination", {{"max_roll_pitch", cfg.max_roll_pitch}}}};
}

void from_json(const json& j, EnvConfig& cfg) {
  cfg = EnvConfig{};
  as_object(j, "(root)");
  check_keys(j, "", {"control_dt", "sim_substeps", "episode_length", "observation", "commands",
                     "action", "rewards", "curriculum", "randomization", "reset", "termination"});
  read_number(j, "", "control_dt", cfg.control_dt);
  read_int(j, "", "sim_substeps", cfg.sim_substeps);
  read_number(j, "", "episode_length", cfg.episode_length);

  if (auto it = j.find("observation"); it != j.end()) {
    const json& o = as_object(*it, "observation");
    check_keys(o, "observation", {"include_gyro", "zero_contact_flags", "noise"});
    read_bool(o, "observation", "include_gyro", cfg.include_gyro);
    read_bool(o, "observation", "zero_contact_flags", cfg.zero_contact_observation);
    if (auto nit = o.find("noise"); nit != o.end()) {
      const json& n = as_object(*nit, "observation.noise");
      check_keys(n, "observation.noise",
                 {"joint_positions", "joint_velocities", "joint_targets", "gain_scales",
                  "foot_contacts", "gravity", "command", "gyro"});
      read_number(n, "observation.noise", "joint_positions", cfg.noise.joint_positions);
      read_number(n, "observation.noise", "joint_velocities", cfg.noise.joint_velocities);
      read_number(n, "observation.noise", "joint_targets", cfg.noise.joint_targets);
      read_number(n, "observation.noise", "gain_scales", cfg.noise.gain_scales);
      read_number(n, "observation.noise", "foot_contacts", cfg.noise.foot_contacts);
      read_number(n, "observation.noise", "gravity", cfg.noise.gravity);
      read_number(n, "observation.noise", "command", cfg.noise.command);
      read_number(n, "observation.noise", "gyro", cfg.noise.gyro);
    }
  }

  if (auto it = j.find("commands"); it != j.end()) {
    const json& c = as_object(*it, "commands");
    check_keys(c, "commands", {"linear_x", "linear_y", "angular_z"});
    read_range(c, "commands", "linear_x", cfg.command_x);
    read_range(c, "commands", "linear_y", cfg.command_y);
    read_range(c, "commands", "angular_z", cfg.command_yaw);
  }

  if (auto it = j.find("action"); it != j.end()) {
    const json& a = as_object(*it, "action");
    check_keys(a, "action", {"position_scale", "position_clip", "gain_input_clip", "use_gain_action"});
    read_number(a, "action", "position_scale", cfg.action_scale);
    read_number(a, "action", "position_clip", cfg.action_clip);
    read_number(a, "action", "gain_input_clip", cfg.gain_input_clip);
    read_bool(a, "action", "use_gain_action", cfg.use_gain_action);
  }

  if (auto it = j.find("rewards"); it != j.end()) {
    const json& r = as_object(*it, "rewards");
    check_keys(r, "rewards",
               {"tracking_sigma", "air_time_threshold", "contact_velocity_mode", "noisy", "quiet"});
    read_number(r, "rewards", "tracking_sigma", cfg.tracking_sigma);
    read_number(r, "rewards", "air_time_threshold", cfg.air_time_threshold);
    if (auto mit = r.find("contact_velocity_mode"); mit != r.end()) {
      if (!mit->is_string()) fail("rewards.contact_velocity_mode", "expected a string");
      cfg.contact_velocity_mode =
          mode_from_name(mit->get<std::string>(), "rewards.contact_velocity_mode");
    }
    if (auto nit = r.find("noisy"); nit != r.end())
      scales_from_json(*nit, "rewards.noisy", cfg.noisy_scales);
    if (auto qit = r.find("quiet"); qit != r.end())
      scales_from_json(*qit, "rewards.quiet", cfg.quiet_scales);
  }

  if (auto it = j.find("curriculum"); it != j.end()) {
    const json& c = as_object(*it, "curriculum");
    check_keys(c, "curriculum", {"enabled", "threshold", "window", "initial_phase"});
    read_bool(c, "curriculum", "enabled", cfg.curriculum_enabled);
    read_number(c, "curriculum", "threshold", cfg.curriculum_threshold);
    read_int(c, "curriculum", "window", cfg.curriculum_window);
    if (auto pit = c.find("initial_phase"); pit != c.end()) {
      if (!pit->is_string()) fail("curriculum.initial_phase", "expected a string");
      cfg.initial_phase = phase_from_name(pit->get<std::string>());
    }
  }

  if (auto it = j.find("randomization"); it != j.end()) {
    const json& r = as_object(*it, "randomization");
    check_keys(r, "randomization",
               {"base_mass_delta", "velocity_disturbance", "external_force", "external_torque",
                "terrain_height", "friction", "disturbance_period", "terrain_grid_nodes",
                "terrain_cell_size"});
    read_range(r, "randomization", "base_mass_delta", cfg.base_mass_delta);
    read_range(r, "randomization", "velocity_disturbance", cfg.velocity_disturbance);
    read_range(r, "randomization", "external_force", cfg.external_force);
    read_range(r, "randomization", "external_torque", cfg.external_torque);
    read_range(r, "randomization", "terrain_height", cfg.terrain_height);
    read_range(r, "randomization", "friction", cfg.friction);
    read_number(r, "randomization", "disturbance_period", cfg.disturbance_period);
    read_int(r, "randomization", "terrain_grid_nodes", cfg.terrain_grid_nodes);
    read_number(r, "randomization", "terrain_cell_size", cfg.terrain_cell_size);
  }

  if (auto it = j.find("reset"); it != j.end()) {
    const json& r = as_object(*it, "reset");
    check_keys(r, "reset", {"joint_noise", "yaw_range"});
    read_number(r, "reset", "joint_noise", cfg.reset_joint_noise);
    read_number(r, "reset", "yaw_range", cfg.reset_yaw_range);
  }

  if (auto it = j.find("termination"); it != j.end()) {
    const json& t = as_object(*it, "termination");
    check_keys(t, "termination", {"max_roll_pitch"});
    read_number(t, "termination", "max_roll_pitch", cfg.max_roll_pitch);
  }

  cfg.validate();
}

EnvConfig load_env_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("env config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  const bool blank =
      text.find_first_not_of(" \t\r\n") == std::string::npos;  // empty file = all defaults
  if (blank) {
    EnvConfig cfg;
    cfg.validate();
    return cfg;
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError("env config: " + path + ": " + e.what());
  }
  EnvConfig cfg;
  from_json(j, cfg);
  return cfg;
}

void save_env_config(const EnvConfig& cfg, const std::string& path) {
  json j;
  to_json(j, cfg);
  std::ofstream out(path);
  if (!out) throw Error("env config: cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace quietgait::quietenv
