#include "quietgait/quietctl/experiment.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>

#include <nlohmann/json.hpp>

#include "quietgait/common/error.hpp"

namespace quietgait::quietctl {

namespace {

struct VariantEntry {
  Variant variant;
  const char* name;
};

constexpr VariantEntry kVariants[] = {
    {Variant::kProposed, "proposed"},
    {Variant::kBaseline, "baseline"},
    {Variant::kNoCurriculumNoisy, "no-curriculum-noisy"},
    {Variant::kNoCurriculumQuiet, "no-curriculum-quiet"},
    {Variant::kNoContactSensor, "no-contact-sensor"},
    {Variant::kFixedPd, "fixed-pd"},
    {Variant::kMoreDrFriction, "more-dr-friction"},
    {Variant::kMoreDrHeight, "more-dr-height"},
};

}  // namespace

const char* variant_name(Variant v) {
  for (const auto& e : kVariants)
    if (e.variant == v) return e.name;
  throw InvalidInputError("variant_name: unknown variant value");
}

Variant variant_from_name(const std::string& name) {
  std::string known;
  for (const auto& e : kVariants) {
    if (name == e.name) return e.variant;
    known += known.empty() ? e.name : std::string(", ") + e.name;
  }
  throw InvalidInputError("unknown variant '" + name + "'; expected one of: " + known);
}

void apply_variant(Variant v, quietenv::EnvConfig& cfg) {
  using quietenv::Phase;
  switch (v) {
    case Variant::kProposed:
      break;
    case Variant::kBaseline:
      cfg.use_gain_action = false;
      cfg.curriculum_enabled = false;
      cfg.initial_phase = Phase::kNoisy;
      cfg.noisy_scales.foot_contact_velocity = 0.0;
      cfg.noisy_scales.joint_acceleration = 0.0;
      cfg.noisy_scales.base_angular_acceleration = 0.0;
      cfg.quiet_scales.foot_contact_velocity = 0.0;
      cfg.quiet_scales.joint_acceleration = 0.0;
      cfg.quiet_scales.base_angular_acceleration = 0.0;
      break;
    case Variant::kNoCurriculumNoisy:
      cfg.curriculum_enabled = false;
      cfg.initial_phase = Phase::kNoisy;
      break;
    case Variant::kNoCurriculumQuiet:
      cfg.curriculum_enabled = false;
      cfg.initial_phase = Phase::kQuiet;
      break;
    case Variant::kNoContactSensor:
      cfg.zero_contact_observation = true;
      break;
    case Variant::kFixedPd:
      cfg.use_gain_action = false;
      break;
    case Variant::kMoreDrFriction:
      cfg.friction = {0.2, 0.9};
      break;
    case Variant::kMoreDrHeight:
      cfg.terrain_height.hi = 0.03;
      break;
  }
}

void ExperimentSpec::validate() const {
  env.validate();
  ppo.validate();
  model.validate();
  if (run_name.empty()) throw InvalidInputError("experiment: run_name must not be empty");
  if (n_envs <= 0) throw InvalidInputError("experiment: n_envs must be positive");
  if (n_iterations <= 0) throw InvalidInputError("experiment: n_iterations must be positive");
  if (checkpoint_every <= 0)
    throw InvalidInputError("experiment: checkpoint_every must be positive");
  if (out_dir.empty()) throw InvalidInputError("experiment: out_dir must not be empty");
}

std::string ExperimentSpec::config_hash() const {
  nlohmann::json j;
  nlohmann::json env_j;
  quietenv::to_json(env_j, env);
  nlohmann::json ppo_j;
  ppolearn::to_json(ppo_j, ppo);
  j["variant"] = variant_name(variant);
  j["env"] = env_j;
  j["ppo"] = ppo_j;
  j["model"] = rigidsim::robot_model_to_json(model);
  j["n_envs"] = n_envs;
  j["n_iterations"] = n_iterations;
  return fnv1a_hex(j.dump());
}

ppolearn::PpoConfig experiment_ppo_defaults() {
  ppolearn::PpoConfig ppo;
  ppo.initial_action_std = 0.3;
  return ppo;
}

rigidsim::VecX observation_scales(const quietenv::EnvConfig& cfg) {
  using rigidsim::VecX;
  VecX s = VecX::Ones(cfg.observation_dim());
  s.segment(12, 12).setConstant(0.05);  // joint velocities, tens of rad/s raw
  s(55) = 2.0;                          // command v_x
  s(56) = 2.0;                          // command v_y
  s(57) = 0.25;                         // command w_z
  if (cfg.include_gyro) s.segment(58, 3).setConstant(0.25);  // body rates
  return s;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string csv_double(double v) {
  char best[40];
  std::snprintf(best, sizeof(best), "%.17g", v);
  for (int prec = 1; prec <= 17; ++prec) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v && std::strlen(buf) < std::strlen(best))
      std::memcpy(best, buf, std::strlen(buf) + 1);
  }
  return best;
}

std::string git_describe() {
#ifdef QUIETGAIT_GIT_DESCRIBE
  return QUIETGAIT_GIT_DESCRIBE;
#else
  return "unknown";
#endif
}

std::string provenance_comment(std::uint64_t seed, const std::string& config_hash) {
  return "# seed=" + std::to_string(seed) + " git=" + git_describe() +
         " config=" + config_hash;
}

}  // namespace quietgait::quietctl
