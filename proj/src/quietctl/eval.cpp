#include "quietgait/quietctl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "quietgait/acoustics/spectrum.hpp"
#include "quietgait/common/error.hpp"
#include "quietgait/ppolearn/checkpoint.hpp"
#include "quietgait/quietenv/env.hpp"

namespace quietgait::quietctl {

namespace {

using quietenv::Env;
using quietenv::EnvConfig;
using quietenv::StepResult;
using rigidsim::Terrain;
using rigidsim::Vec3;
using rigidsim::VecX;

constexpr double kImpactBandLo = 2.0;   // Hz; skip the DC bin
constexpr double kImpactBandHi = 45.0;  // Hz; below control-rate Nyquist

/// Band power of the impulse-train proxy, or the floor when the episode was
/// too short to window.
double impact_proxy_db(const std::vector<acoustics::GaitRecord>& records, double rate,
                       double total_mass) {
  int window = 256;
  while (window > static_cast<int>(records.size()) && window > 64) window /= 2;
  if (static_cast<int>(records.size()) < window) return acoustics::kDbFloor;
  const acoustics::AudioClip clip = acoustics::impact_proxy_signal(records, rate, total_mass);
  if (static_cast<int>(clip.samples.size()) < window) return acoustics::kDbFloor;
  const acoustics::SpectralReport report = acoustics::welch_psd(clip, window);
  return acoustics::band_power_db(report, kImpactBandLo, kImpactBandHi);
}

}  // namespace

void EvalOptions::validate() const {
  if (n_episodes <= 0) throw InvalidInputError("eval: n_episodes must be positive");
  if (!(episode_length > 0.0)) throw InvalidInputError("eval: episode_length must be positive");
  if (!(metrics_duration > 0.0))
    throw InvalidInputError("eval: metrics_duration must be positive");
  if (!(friction > 0.0)) throw InvalidInputError("eval: friction must be positive");
  if (!command.allFinite()) throw InvalidInputError("eval: non-finite command");
}

EnvConfig evaluation_config(EnvConfig cfg, const EvalOptions& opt) {
  cfg.disable_randomization(opt.friction);
  cfg.noise = quietenv::NoiseLevels{.joint_positions = 0.0,
                                    .joint_velocities = 0.0,
                                    .joint_targets = 0.0,
                                    .gain_scales = 0.0,
                                    .foot_contacts = 0.0,
                                    .gravity = 0.0,
                                    .command = 0.0,
                                    .gyro = 0.0};
  cfg.reset_yaw_range = 0.0;  // spawn facing +x so progress is measurable
  cfg.curriculum_enabled = false;
  cfg.episode_length = opt.episode_length;
  return cfg;
}

EvalReport evaluate_policy(const ppolearn::PolicyParams& params, EnvConfig cfg,
                           const rigidsim::RobotModel& model, const EvalOptions& opt,
                           const Terrain* terrain_override) {
  opt.validate();
  cfg = evaluation_config(std::move(cfg), opt);
  ppolearn::check_compatible(params, cfg.observation_dim(), EnvConfig::kActionDim);

  Env env(cfg, model, opt.seed);
  env.set_command_override(opt.command);
  if (terrain_override) env.set_terrain_override(*terrain_override);

  EvalReport report;
  double pooled_speed_sum = 0.0;
  int pooled_touchdowns = 0;
  double band_db_sum = 0.0;
  int band_db_count = 0;

  const VecX obs_scale = observation_scales(cfg);
  for (int ep = 0; ep < opt.n_episodes; ++ep) {
    VecX obs = obs_scale.cwiseProduct(env.reset());
    std::vector<acoustics::GaitRecord> records;
    EpisodeEval e;
    bool done = false;
    while (!done) {
      const auto [mean, value] = ppolearn::forward_one(params, obs);
      (void)value;
      const StepResult r = env.step(mean);
      acoustics::GaitRecord rec;
      rec.time = env.episode().elapsed;
      for (int f = 0; f < rigidsim::kNumLegs; ++f) {
        rec.touchdown[static_cast<size_t>(f)] = r.contact.touchdown[static_cast<size_t>(f)];
        rec.touchdown_speed[static_cast<size_t>(f)] =
            r.contact.touchdown_speed[static_cast<size_t>(f)];
        if (r.contact.touchdown[static_cast<size_t>(f)]) {
          ++e.touchdowns;
          e.touchdown_speed_sum += r.contact.touchdown_speed[static_cast<size_t>(f)];
        }
      }
      for (int i = 0; i < 12; ++i)
        rec.joint_accel[static_cast<size_t>(i)] = r.joint_acceleration[i];
      rec.base_ang_accel_xy[0] = r.base_angular_acceleration[0];
      rec.base_ang_accel_xy[1] = r.base_angular_acceleration[1];
      records.push_back(rec);
      obs = obs_scale.cwiseProduct(r.observation);
      done = r.done;
      e.reason = r.reason;
    }
    e.length = env.episode().elapsed;
    e.tracking_score = env.episodic_tracking_score();
    e.forward_distance = env.state().base_position.x();
    if (records.size() >= 2) {
      const double covered = static_cast<double>(records.size()) * cfg.control_dt;
      e.penalties = acoustics::sim_penalty_metrics(
          records, std::min(opt.metrics_duration, covered));
      e.impact_band_db =
          impact_proxy_db(records, 1.0 / cfg.control_dt, env.engine().total_mass());
    }

    if (e.reason == DoneReason::kTimeout) ++report.successes;
    if (e.reason == DoneReason::kFall || e.reason == DoneReason::kDiverged) ++report.falls;
    pooled_speed_sum += e.touchdown_speed_sum;
    pooled_touchdowns += e.touchdowns;
    report.mean_joint_accel += e.penalties.mean_joint_accel_norm;
    report.mean_base_ang_accel += e.penalties.mean_base_ang_accel_norm;
    report.mean_tracking_score += e.tracking_score;
    report.mean_forward_distance += e.forward_distance;
    if (e.impact_band_db > acoustics::kDbFloor) {
      band_db_sum += e.impact_band_db;
      ++band_db_count;
    }
    report.episodes.push_back(std::move(e));
  }

  const double n = static_cast<double>(opt.n_episodes);
  report.mean_touchdown_speed =
      pooled_touchdowns > 0 ? pooled_speed_sum / pooled_touchdowns : 0.0;
  report.mean_joint_accel /= n;
  report.mean_base_ang_accel /= n;
  report.mean_tracking_score /= n;
  report.mean_forward_distance /= n;
  if (band_db_count > 0) report.mean_impact_band_db = band_db_sum / band_db_count;
  return report;
}

NamedPolicy load_run(const std::string& run_dir) {
  const std::string config_path = run_dir + "/config.json";
  std::ifstream in(config_path);
  if (!in) throw Error("cannot read " + config_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("run config " + config_path + ": " + e.what());
  }
  NamedPolicy np;
  try {
    np.name = j.at("run_name").get<std::string>();
    quietenv::from_json(j.at("env"), np.env);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("run config " + config_path + ": " + e.what());
  }
  const ppolearn::Checkpoint ckpt =
      ppolearn::load_checkpoint_file(run_dir + "/checkpoint_latest.json");
  np.params = ckpt.params;
  ppolearn::check_compatible(np.params, np.env.observation_dim(), EnvConfig::kActionDim);
  return np;
}

std::vector<SlopeRow> sweep_slope(const std::vector<NamedPolicy>& policies,
                                  const rigidsim::RobotModel& model,
                                  const std::vector<double>& angles_deg,
                                  const EvalOptions& opt) {
  std::vector<SlopeRow> rows;
  for (const NamedPolicy& np : policies) {
    for (double deg : angles_deg) {
      const Terrain ramp = Terrain::ramp(deg * M_PI / 180.0, opt.friction);
      const EvalReport report = evaluate_policy(np.params, np.env, model, opt, &ramp);
      SlopeRow row;
      row.name = np.name;
      row.angle_deg = deg;
      row.episodes = opt.n_episodes;
      row.falls = report.falls;
      for (const EpisodeEval& e : report.episodes)
        if (e.reason != DoneReason::kFall && e.reason != DoneReason::kDiverged &&
            e.forward_distance >= 0.5)
          ++row.successes;
      row.mean_touchdown_speed = report.mean_touchdown_speed;
      row.impact_band_db = report.mean_impact_band_db;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<FrictionRow> sweep_friction(const std::vector<NamedPolicy>& policies,
                                        const rigidsim::RobotModel& model,
                                        const std::vector<double>& frictions,
                                        const EvalOptions& opt) {
  std::vector<FrictionRow> rows;
  for (const NamedPolicy& np : policies) {
    for (double mu : frictions) {
      EvalOptions local = opt;
      local.friction = mu;
      const EvalReport report = evaluate_policy(np.params, np.env, model, local);
      FrictionRow row;
      row.name = np.name;
      row.friction = mu;
      row.episodes = opt.n_episodes;
      row.falls = report.falls;
      for (const EpisodeEval& e : report.episodes)
        if (e.reason != DoneReason::kFall && e.reason != DoneReason::kDiverged &&
            e.forward_distance >= 0.5)
          ++row.successes;
      row.mean_touchdown_speed = report.mean_touchdown_speed;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<GainTraceRow> trace_gains(const ppolearn::PolicyParams& params, EnvConfig cfg,
                                      const rigidsim::RobotModel& model, double duration,
                                      const EvalOptions& opt) {
  if (!(duration > 0.0)) throw InvalidInputError("trace: duration must be positive");
  cfg = evaluation_config(std::move(cfg), opt);
  cfg.episode_length = std::max(duration, cfg.control_dt);
  ppolearn::check_compatible(params, cfg.observation_dim(), EnvConfig::kActionDim);

  Env env(cfg, model, opt.seed);
  env.set_command_override(opt.command);
  const VecX obs_scale = observation_scales(cfg);
  VecX obs = obs_scale.cwiseProduct(env.reset());
  std::vector<GainTraceRow> rows;
  bool done = false;
  while (!done && env.episode().elapsed < duration - 1e-12) {
    const auto [mean, value] = ppolearn::forward_one(params, obs);
    (void)value;
    const StepResult r = env.step(mean);
    GainTraceRow row;
    row.time = env.episode().elapsed;
    for (int i = 0; i < 12; ++i)
      row.gain_scale[static_cast<size_t>(i)] = env.episode().last_gain_scale[i];
    for (int f = 0; f < rigidsim::kNumLegs; ++f)
      row.contact[static_cast<size_t>(f)] = r.contact.in_contact[static_cast<size_t>(f)];
    row.fr_foot_speed = r.contact.foot_velocity[0].norm();
    rows.push_back(row);
    obs = obs_scale.cwiseProduct(r.observation);
    done = r.done;
  }
  return rows;
}

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  return out;
}

}  // namespace

void write_eval_csv(const std::string& path, const EvalReport& report,
                    const std::string& provenance) {
  auto out = open_csv(path);
  out << "episode,length_s,reason,tracking_score,forward_distance_m,touchdowns,"
         "mean_touchdown_speed,mean_joint_accel,mean_base_ang_accel,impact_band_db\n"
      << provenance << "\n";
  for (size_t i = 0; i < report.episodes.size(); ++i) {
    const EpisodeEval& e = report.episodes[i];
    const double ep_speed =
        e.touchdowns > 0 ? e.touchdown_speed_sum / e.touchdowns : 0.0;
    out << i << "," << csv_double(e.length) << "," << done_reason_name(e.reason) << ","
        << csv_double(e.tracking_score) << "," << csv_double(e.forward_distance) << ","
        << e.touchdowns << "," << csv_double(ep_speed) << ","
        << csv_double(e.penalties.mean_joint_accel_norm) << ","
        << csv_double(e.penalties.mean_base_ang_accel_norm) << ","
        << csv_double(e.impact_band_db) << "\n";
  }
}

void write_slope_csv(const std::string& path, const std::vector<SlopeRow>& rows,
                     const std::string& provenance) {
  auto out = open_csv(path);
  out << "name,angle_deg,episodes,successes,success_rate,mean_touchdown_speed,"
         "impact_band_db,falls\n"
      << provenance << "\n";
  for (const SlopeRow& r : rows)
    out << r.name << "," << csv_double(r.angle_deg) << "," << r.episodes << ","
        << r.successes << ","
        << csv_double(static_cast<double>(r.successes) / std::max(r.episodes, 1)) << ","
        << csv_double(r.mean_touchdown_speed) << "," << csv_double(r.impact_band_db) << ","
        << r.falls << "\n";
}

void write_friction_csv(const std::string& path, const std::vector<FrictionRow>& rows,
                        const std::string& provenance) {
  auto out = open_csv(path);
  out << "name,friction,episodes,successes,success_rate,mean_touchdown_speed,falls\n"
      << provenance << "\n";
  for (const FrictionRow& r : rows)
    out << r.name << "," << csv_double(r.friction) << "," << r.episodes << ","
        << r.successes << ","
        << csv_double(static_cast<double>(r.successes) / std::max(r.episodes, 1)) << ","
        << csv_double(r.mean_touchdown_speed) << "," << r.falls << "\n";
}

void write_trace_csv(const std::string& path, const std::vector<GainTraceRow>& rows,
                     const std::string& provenance) {
  auto out = open_csv(path);
  out << "time_s";
  for (int i = 0; i < 12; ++i) out << ",gain_scale_" << i;
  out << ",contact_fr,contact_fl,contact_hr,contact_hl,fr_foot_speed\n" << provenance << "\n";
  for (const GainTraceRow& r : rows) {
    out << csv_double(r.time);
    for (double g : r.gain_scale) out << "," << csv_double(g);
    for (bool c : r.contact) out << "," << (c ? 1 : 0);
    out << "," << csv_double(r.fr_foot_speed) << "\n";
  }
}

}  // namespace quietgait::quietctl
