// quietctl: the experiment harness for the quiet-walking lab. Subcommands
// cover training, evaluation, the slope and friction sweeps, gain traces,
// audio analysis and config validation. Exit codes: 0 success, 1 usage or
// configuration problem, 2 runtime failure.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "quietgait/acoustics/audio.hpp"
#include "quietgait/acoustics/spectrum.hpp"
#include "quietgait/common/error.hpp"
#include "quietgait/ppolearn/checkpoint.hpp"
#include "quietgait/quietctl/eval.hpp"
#include "quietgait/quietctl/experiment.hpp"
#include "quietgait/quietctl/trainer.hpp"
#include "quietgait/quietenv/env_config.hpp"

namespace {

using namespace quietgait;
using quietctl::EvalOptions;
using quietctl::ExperimentSpec;
using quietctl::NamedPolicy;
using quietctl::Variant;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

std::vector<double> parse_double_list(const std::string& csv, const std::string& what) {
  std::vector<double> out;
  std::string token;
  std::istringstream in(csv);
  while (std::getline(in, token, ',')) {
    try {
      size_t pos = 0;
      const double v = std::stod(token, &pos);
      if (pos != token.size()) throw std::invalid_argument(token);
      out.push_back(v);
    } catch (const std::exception&) {
      throw InvalidInputError(what + ": '" + token + "' is not a number");
    }
  }
  if (out.empty()) throw InvalidInputError(what + ": empty list");
  return out;
}

quietenv::EnvConfig resolve_env_config(const std::string& config_path,
                                       const std::string& variant_name) {
  quietenv::EnvConfig cfg;
  if (!config_path.empty()) cfg = quietenv::load_env_config(config_path);
  quietctl::apply_variant(quietctl::variant_from_name(variant_name), cfg);
  cfg.validate();
  return cfg;
}

int cmd_train(const std::string& config_path, const std::string& variant,
              const std::string& name, std::uint64_t seed, int envs, int iters,
              int checkpoint_every, int stop_after_quiet, const std::string& out_dir,
              bool quiet_progress) {
  ExperimentSpec spec;
  spec.variant = quietctl::variant_from_name(variant);
  spec.env = resolve_env_config(config_path, variant);
  spec.seed = seed;
  spec.n_envs = envs;
  spec.n_iterations = iters;
  spec.checkpoint_every = checkpoint_every;
  spec.stop_after_quiet = stop_after_quiet;
  spec.out_dir = out_dir;
  spec.run_name = name.empty() ? variant + "-s" + std::to_string(seed) : name;

  quietctl::ProgressFn progress;
  if (!quiet_progress) {
    progress = [](const quietctl::MetricsRow& row) {
      if (row.iteration % 25 == 0 || row.iteration == 1)
        std::printf("iter %5d  score %.3f  phase %s  ep_total %.3f  touchdown %.3f m/s  kl %.4f\n",
                    row.iteration, row.tracking_score, quietenv::phase_name(row.phase),
                    row.episodic_total, row.mean_touchdown_speed, row.kl);
    };
  }

  const quietctl::TrainSummary summary = quietctl::train_experiment(spec, progress);
  std::printf("run %s: %d iterations, flip at %d, tracking score %.3f%s\n",
              spec.run_name.c_str(), summary.iterations, summary.flip_iteration,
              summary.final_tracking_score, summary.diverged ? " [DIVERGED]" : "");
  std::printf("metrics: %s\ncheckpoint: %s\n", summary.metrics_path.c_str(),
              summary.checkpoint_path.c_str());
  return summary.diverged ? kExitRuntime : kExitOk;
}

int cmd_eval(const std::string& run_dir, const std::string& checkpoint_path, int episodes,
             const std::string& command_csv, double friction, std::uint64_t seed,
             const std::string& out_path) {
  NamedPolicy np = quietctl::load_run(run_dir);
  if (!checkpoint_path.empty()) {
    const ppolearn::Checkpoint ckpt = ppolearn::load_checkpoint_file(checkpoint_path);
    np.params = ckpt.params;
  }
  EvalOptions opt;
  opt.n_episodes = episodes;
  opt.friction = friction;
  opt.seed = seed;
  const auto cmd = parse_double_list(command_csv, "--command");
  if (cmd.size() != 3) throw InvalidInputError("--command: expected vx,vy,wz");
  opt.command = rigidsim::Vec3(cmd[0], cmd[1], cmd[2]);

  const quietctl::EvalReport report =
      quietctl::evaluate_policy(np.params, np.env, rigidsim::RobotModel::default_model(), opt);
  std::printf("%s: %d/%d timeouts, %d falls\n", np.name.c_str(), report.successes,
              opt.n_episodes, report.falls);
  std::printf("touchdown speed %.4f m/s, joint accel %.2f rad/s^2, base ang accel %.2f rad/s^2\n",
              report.mean_touchdown_speed, report.mean_joint_accel,
              report.mean_base_ang_accel);
  std::printf("tracking score %.3f, forward distance %.3f m, impact band %.1f dB\n",
              report.mean_tracking_score, report.mean_forward_distance,
              report.mean_impact_band_db);
  if (!out_path.empty()) {
    quietctl::write_eval_csv(out_path, report,
                             quietctl::provenance_comment(seed, quietctl::fnv1a_hex(run_dir)));
    std::printf("wrote %s\n", out_path.c_str());
  }
  return kExitOk;
}

int cmd_sweep_slope(const std::vector<std::string>& run_dirs, const std::string& angles_csv,
                    int episodes, double friction, std::uint64_t seed,
                    const std::string& out_path) {
  std::vector<NamedPolicy> policies;
  for (const auto& dir : run_dirs) policies.push_back(quietctl::load_run(dir));
  const auto angles = parse_double_list(angles_csv, "--angles");
  EvalOptions opt;
  opt.n_episodes = episodes;
  opt.friction = friction;
  opt.seed = seed;
  const auto rows =
      quietctl::sweep_slope(policies, rigidsim::RobotModel::default_model(), angles, opt);
  for (const auto& r : rows)
    std::printf("%-24s %5.1f deg  success %d/%d  touchdown %.4f m/s  band %.1f dB\n",
                r.name.c_str(), r.angle_deg, r.successes, r.episodes,
                r.mean_touchdown_speed, r.impact_band_db);
  if (!out_path.empty()) {
    quietctl::write_slope_csv(out_path, rows,
                              quietctl::provenance_comment(seed, quietctl::fnv1a_hex(angles_csv)));
    std::printf("wrote %s\n", out_path.c_str());
  }
  return kExitOk;
}

int cmd_sweep_dr(const std::vector<std::string>& run_dirs, const std::string& frictions_csv,
                 int episodes, std::uint64_t seed, const std::string& out_path) {
  std::vector<NamedPolicy> policies;
  for (const auto& dir : run_dirs) policies.push_back(quietctl::load_run(dir));
  const auto frictions = parse_double_list(frictions_csv, "--frictions");
  EvalOptions opt;
  opt.n_episodes = episodes;
  opt.seed = seed;
  const auto rows = quietctl::sweep_friction(policies, rigidsim::RobotModel::default_model(),
                                             frictions, opt);
  for (const auto& r : rows)
    std::printf("%-24s mu %.2f  success %d/%d  touchdown %.4f m/s\n", r.name.c_str(),
                r.friction, r.successes, r.episodes, r.mean_touchdown_speed);
  if (!out_path.empty()) {
    quietctl::write_friction_csv(
        out_path, rows, quietctl::provenance_comment(seed, quietctl::fnv1a_hex(frictions_csv)));
    std::printf("wrote %s\n", out_path.c_str());
  }
  return kExitOk;
}

int cmd_trace_gains(const std::string& run_dir, double duration, std::uint64_t seed,
                    const std::string& out_path) {
  const NamedPolicy np = quietctl::load_run(run_dir);
  EvalOptions opt;
  opt.seed = seed;
  const auto rows = quietctl::trace_gains(np.params, np.env,
                                          rigidsim::RobotModel::default_model(), duration, opt);
  std::printf("%zu samples over %.2f s\n", rows.size(),
              rows.empty() ? 0.0 : rows.back().time);
  if (!out_path.empty()) {
    quietctl::write_trace_csv(out_path, rows,
                              quietctl::provenance_comment(seed, quietctl::fnv1a_hex(run_dir)));
    std::printf("wrote %s\n", out_path.c_str());
  }
  return kExitOk;
}

int cmd_analyze_wav(const std::vector<std::string>& paths, const std::string& band_csv,
                    const std::string& out_path) {
  const auto band = parse_double_list(band_csv, "--band");
  if (band.size() != 2) throw InvalidInputError("--band: expected lo,hi in Hz");

  struct Row {
    std::string file;
    bool ok = false;
    double band_db = 0.0;
    double peak_hz = 0.0;
    std::string error;
  };
  std::vector<Row> rows;
  int failures = 0;
  for (const auto& path : paths) {
    Row row;
    row.file = path;
    try {
      const acoustics::AudioClip clip = acoustics::read_wav_file(path);
      int window = 4096;
      while (window > static_cast<int>(clip.samples.size()) && window > 64) window /= 2;
      const acoustics::SpectralReport report = acoustics::welch_psd(clip, window);
      row.band_db = acoustics::band_power_db(report, band[0], band[1]);
      size_t peak = 0;
      for (size_t i = 1; i < report.psd.size(); ++i)
        if (report.psd[i] > report.psd[peak]) peak = i;
      row.peak_hz = report.freq_hz[peak];
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
      ++failures;
    }
    rows.push_back(std::move(row));
  }

  std::ostringstream csv;
  csv << "file,status,band_power_db,peak_hz,error\n"
      << quietctl::provenance_comment(0, quietctl::fnv1a_hex(band_csv)) << "\n";
  for (const auto& r : rows) {
    if (r.ok)
      csv << r.file << ",ok," << quietctl::csv_double(r.band_db) << ","
          << quietctl::csv_double(r.peak_hz) << ",\n";
    else
      csv << r.file << ",error,,,\"" << r.error << "\"\n";
  }
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write " + out_path);
    out << csv.str();
    std::printf("wrote %s\n", out_path.c_str());
  }
  for (const auto& r : rows)
    if (!r.ok) std::fprintf(stderr, "analyze-wav: %s: %s\n", r.file.c_str(), r.error.c_str());
  return failures > 0 ? kExitRuntime : kExitOk;
}

int cmd_validate_config(const std::string& config_path, const std::string& variant) {
  const quietenv::EnvConfig cfg = resolve_env_config(config_path, variant);
  nlohmann::json j;
  quietenv::to_json(j, cfg);
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quiet-walking locomotion lab"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker thread cap (overrides QUIETGAIT_THREADS)");

  // train
  auto* train = app.add_subcommand("train", "run one training experiment");
  std::string config_path, variant = "proposed", name, out_dir = "runs";
  std::uint64_t seed = 1;
  int envs = 256, iters = 1500, checkpoint_every = 250, stop_after_quiet = -1;
  bool quiet_progress = false;
  train->add_option("--config", config_path, "environment config JSON");
  train->add_option("--variant", variant, "experiment variant")->capture_default_str();
  train->add_option("--name", name, "run name (default <variant>-s<seed>)");
  train->add_option("--seed", seed, "master seed")->capture_default_str();
  train->add_option("--envs", envs, "parallel environments")->capture_default_str();
  train->add_option("--iters", iters, "training iterations")->capture_default_str();
  train->add_option("--checkpoint-every", checkpoint_every, "checkpoint cadence")
      ->capture_default_str();
  train->add_option("--stop-after-quiet", stop_after_quiet,
                    "stop N iterations after the phase flip (<0: run all)");
  train->add_option("--out", out_dir, "output directory")->capture_default_str();
  train->add_flag("--quiet", quiet_progress, "suppress progress lines");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a trained run");
  std::string run_dir, checkpoint_path, command_csv = "0.2,0,0", out_path;
  int episodes = 10;
  double friction = 0.55;
  std::uint64_t eval_seed = 1234;
  eval->add_option("--run", run_dir, "training run directory")->required();
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint override");
  eval->add_option("--episodes", episodes, "evaluation episodes")->capture_default_str();
  eval->add_option("--command", command_csv, "vx,vy,wz")->capture_default_str();
  eval->add_option("--friction", friction, "ground friction")->capture_default_str();
  eval->add_option("--seed", eval_seed, "evaluation seed")->capture_default_str();
  eval->add_option("--out", out_path, "per-episode CSV path");

  // sweep-slope
  auto* slope = app.add_subcommand("sweep-slope", "ramp-climb success sweep");
  std::vector<std::string> slope_runs;
  std::string angles_csv = "0,2,4,6,8,10";
  int slope_episodes = 3;
  double slope_friction = 0.55;
  std::uint64_t slope_seed = 1234;
  std::string slope_out;
  slope->add_option("--run", slope_runs, "training run directory (repeatable)")->required();
  slope->add_option("--angles", angles_csv, "slope angles in degrees")->capture_default_str();
  slope->add_option("--episodes", slope_episodes, "episodes per angle")->capture_default_str();
  slope->add_option("--friction", slope_friction, "ramp friction")->capture_default_str();
  slope->add_option("--seed", slope_seed, "evaluation seed")->capture_default_str();
  slope->add_option("--out", slope_out, "sweep CSV path");

  // sweep-dr
  auto* dr = app.add_subcommand("sweep-dr", "friction robustness sweep");
  std::vector<std::string> dr_runs;
  std::string frictions_csv = "0.2,0.35,0.5,0.65,0.8";
  int dr_episodes = 3;
  std::uint64_t dr_seed = 1234;
  std::string dr_out;
  dr->add_option("--run", dr_runs, "training run directory (repeatable)")->required();
  dr->add_option("--frictions", frictions_csv, "friction grid")->capture_default_str();
  dr->add_option("--episodes", dr_episodes, "episodes per point")->capture_default_str();
  dr->add_option("--seed", dr_seed, "evaluation seed")->capture_default_str();
  dr->add_option("--out", dr_out, "sweep CSV path");

  // trace-gains
  auto* trace = app.add_subcommand("trace-gains", "log the applied gain schedule");
  std::string trace_run, trace_out;
  double trace_duration = 10.0;
  std::uint64_t trace_seed = 1234;
  trace->add_option("--run", trace_run, "training run directory")->required();
  trace->add_option("--duration", trace_duration, "seconds to trace")->capture_default_str();
  trace->add_option("--seed", trace_seed, "rollout seed")->capture_default_str();
  trace->add_option("--out", trace_out, "trace CSV path");

  // analyze-wav
  auto* wav = app.add_subcommand("analyze-wav", "band power and peak of WAV files");
  std::vector<std::string> wav_paths;
  std::string band_csv = "20,20000", wav_out;
  wav->add_option("files", wav_paths, "WAV files")->required();
  wav->add_option("--band", band_csv, "band lo,hi in Hz")->capture_default_str();
  wav->add_option("--out", wav_out, "CSV path (default stdout)");

  // validate-config
  auto* validate = app.add_subcommand("validate-config", "echo the resolved config");
  std::string validate_path, validate_variant = "proposed";
  validate->add_option("--config", validate_path, "environment config JSON");
  validate->add_option("--variant", validate_variant, "variant to apply")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  if (threads > 0) {
    const std::string value = std::to_string(threads);
    setenv("QUIETGAIT_THREADS", value.c_str(), 1);
  }

  try {
    if (*train)
      return cmd_train(config_path, variant, name, seed, envs, iters, checkpoint_every,
                       stop_after_quiet, out_dir, quiet_progress);
    if (*eval) {
      if (episodes <= 0) throw InvalidInputError("--episodes must be positive");
      return cmd_eval(run_dir, checkpoint_path, episodes, command_csv, friction, eval_seed,
                      out_path);
    }
    if (*slope)
      return cmd_sweep_slope(slope_runs, angles_csv, slope_episodes, slope_friction,
                             slope_seed, slope_out);
    if (*dr) return cmd_sweep_dr(dr_runs, frictions_csv, dr_episodes, dr_seed, dr_out);
    if (*trace) return cmd_trace_gains(trace_run, trace_duration, trace_seed, trace_out);
    if (*wav) return cmd_analyze_wav(wav_paths, band_csv, wav_out);
    if (*validate) return cmd_validate_config(validate_path, validate_variant);
  } catch (const InvalidInputError& e) {  // covers ParseError
    std::fprintf(stderr, "quietctl: %s\n", e.what());
    return kExitUsage;
  } catch (const CheckpointMismatchError& e) {
    std::fprintf(stderr, "quietctl: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "quietctl: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
