#include "quietgait/quietctl/trainer.hpp"

#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "quietgait/common/error.hpp"
#include "quietgait/ppolearn/checkpoint.hpp"
#include "quietgait/ppolearn/policy.hpp"
#include "quietgait/ppolearn/ppo.hpp"
#include "quietgait/quietenv/vec_env.hpp"

namespace quietgait::quietctl {

namespace {

namespace fs = std::filesystem;
using quietenv::Phase;
using quietenv::RewardBreakdown;
using quietenv::VecEnv;
using rigidsim::MatX;
using rigidsim::VecX;

constexpr int kNumTerms = RewardBreakdown::kNumTerms;

// Child-stream ids far above any per-env id VecEnv takes (one per env).
constexpr uint64_t kPolicyInitStream = 1u << 20;
constexpr uint64_t kActionStream = (1u << 20) + 1;
constexpr uint64_t kUpdateStream = (1u << 20) + 2;

const auto& fmt = csv_double;

void write_config_json(const ExperimentSpec& spec, const std::string& path) {
  nlohmann::json env_j, ppo_j;
  quietenv::to_json(env_j, spec.env);
  ppolearn::to_json(ppo_j, spec.ppo);
  nlohmann::json j{{"run_name", spec.run_name},
                   {"variant", variant_name(spec.variant)},
                   {"seed", spec.seed},
                   {"n_envs", spec.n_envs},
                   {"n_iterations", spec.n_iterations},
                   {"checkpoint_every", spec.checkpoint_every},
                   {"stop_after_quiet", spec.stop_after_quiet},
                   {"env", env_j},
                   {"ppo", ppo_j},
                   {"model", rigidsim::robot_model_to_json(spec.model)},
                   {"config_hash", spec.config_hash()}};
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace

std::string metrics_header() {
  std::string h = "iteration";
  for (const auto& name : RewardBreakdown::term_names()) h += std::string(",ep_") + name;
  h += ",ep_total,tracking_score,phase,mean_touchdown_speed,mean_episode_length,lr,kl";
  return h;
}

std::string metrics_row_csv(const MetricsRow& row) {
  std::string s = std::to_string(row.iteration);
  for (double t : row.episodic_terms) s += "," + fmt(t);
  s += "," + fmt(row.episodic_total);
  s += "," + fmt(row.tracking_score);
  s += std::string(",") + quietenv::phase_name(row.phase);
  s += "," + fmt(row.mean_touchdown_speed);
  s += "," + fmt(row.mean_episode_length);
  s += "," + fmt(row.lr);
  s += "," + fmt(row.kl);
  return s;
}

TrainSummary train_experiment(const ExperimentSpec& spec, const ProgressFn& progress) {
  spec.validate();
  const std::string dir = spec.run_dir();
  fs::create_directories(dir);
  write_config_json(spec, dir + "/config.json");

  const int obs_dim = spec.env.observation_dim();
  const int act_dim = quietenv::EnvConfig::kActionDim;
  const int n = spec.n_envs;
  const int T = spec.ppo.rollout_steps;

  VecEnv vec(spec.env, spec.model, n, spec.seed);
  Rng master(spec.seed);
  Rng init_rng = master.derive(kPolicyInitStream);
  Rng act_rng = master.derive(kActionStream);
  Rng update_rng = master.derive(kUpdateStream);

  ppolearn::PolicyParams params = ppolearn::PolicyParams::init(
      obs_dim, act_dim, 128, spec.ppo.initial_action_std, init_rng);
  ppolearn::AdamState adam = ppolearn::AdamState::init(params, spec.ppo.lr_initial);
  ppolearn::RolloutBuffer buffer;
  buffer.resize(n, T, obs_dim, act_dim);

  TrainSummary summary;
  summary.metrics_path = dir + "/metrics.csv";
  const std::string ckpt_path = dir + "/checkpoint_latest.json";

  std::ofstream metrics(summary.metrics_path);
  if (!metrics) throw Error("cannot write " + summary.metrics_path);
  metrics << metrics_header() << "\n"
          << provenance_comment(spec.seed, spec.config_hash()) << "\n";

  // Windowed episodic statistics (same window as the curriculum gate).
  const size_t window = static_cast<size_t>(spec.env.curriculum_window);
  MatX term_accum = MatX::Zero(kNumTerms, n);
  std::deque<std::array<double, kNumTerms>> completed_terms;
  std::deque<double> completed_lengths;

  const VecX obs_scale = observation_scales(spec.env);
  MatX obs = obs_scale.asDiagonal() * vec.reset_all();
  VecEnv::Step step;
  MatX actions(act_dim, n);

  const auto save_ckpt = [&](long iteration) {
    ppolearn::save_checkpoint_file(ckpt_path, params, spec.ppo, iteration,
                                   vec.phase() == Phase::kQuiet ? 1 : 0);
    summary.checkpoint_path = ckpt_path;
  };

  for (int iter = 1; iter <= spec.n_iterations; ++iter) {
    int touchdowns = 0;
    double touchdown_speed_sum = 0.0;

    for (int t = 0; t < T; ++t) {
      const ppolearn::EvalResult fwd = ppolearn::forward(params, obs);
      VecX log_probs(n);
      for (int e = 0; e < n; ++e) {
        auto [action, lp] = ppolearn::sample_action(params, fwd.mean.col(e), act_rng);
        actions.col(e) = action;
        log_probs[e] = lp;
      }
      vec.step(actions, step);

      // The optimizer sees totals clipped at zero. A tumbling policy earns a
      // net-negative step reward while termination is worth exactly zero, so
      // with signed totals the quickest way to maximize return is to fall
      // over immediately; clipping removes that incentive. Reported episodic
      // terms stay signed.
      VecX rewards = step.reward.cwiseMax(0.0);
      // A timeout is not a real terminal: the value of the state the episode
      // was cut off in is folded into the final reward before the advantage
      // recursion treats the step as done.
      std::vector<int> timeout_envs;
      for (int e = 0; e < n; ++e)
        if (step.done[static_cast<size_t>(e)] &&
            step.reason[static_cast<size_t>(e)] == DoneReason::kTimeout)
          timeout_envs.push_back(e);
      if (!timeout_envs.empty()) {
        MatX term_obs(obs_dim, static_cast<int>(timeout_envs.size()));
        for (size_t k = 0; k < timeout_envs.size(); ++k)
          term_obs.col(static_cast<int>(k)) =
              obs_scale.asDiagonal() * step.terminal_observations.col(timeout_envs[k]);
        const ppolearn::EvalResult vterm = ppolearn::forward(params, term_obs);
        for (size_t k = 0; k < timeout_envs.size(); ++k)
          rewards[timeout_envs[k]] += spec.ppo.gamma * vterm.value[static_cast<int>(k)];
      }

      for (int e = 0; e < n; ++e) {
        const int col = buffer.col(t, e);
        buffer.obs.col(col) = obs.col(e);
        buffer.actions.col(col) = actions.col(e);
        buffer.log_probs[col] = log_probs[e];
        buffer.values[col] = fwd.value[e];
        buffer.rewards[col] = rewards[e];
        buffer.dones[static_cast<size_t>(col)] = step.done[static_cast<size_t>(e)];
        buffer.done_reasons[static_cast<size_t>(col)] = step.reason[static_cast<size_t>(e)];
      }

      term_accum += step.reward_terms;
      for (int e = 0; e < n; ++e) {
        if (!step.done[static_cast<size_t>(e)]) continue;
        std::array<double, kNumTerms> ep{};
        for (int k = 0; k < kNumTerms; ++k) ep[static_cast<size_t>(k)] = term_accum(k, e);
        completed_terms.push_back(ep);
        term_accum.col(e).setZero();
      }
      for (double len : step.completed_lengths) completed_lengths.push_back(len);
      while (completed_terms.size() > window) completed_terms.pop_front();
      while (completed_lengths.size() > window) completed_lengths.pop_front();

      touchdowns += step.touchdown_count;
      touchdown_speed_sum += step.touchdown_speed_sum;
      obs = obs_scale.asDiagonal() * step.observations;
    }

    buffer.bootstrap = ppolearn::forward(params, obs).value;

    ppolearn::UpdateStats stats;
    try {
      stats = ppolearn::ppo_update(params, buffer, spec.ppo, adam, update_rng);
    } catch (const DivergedError&) {
      summary.diverged = true;
      summary.iterations = iter;
      break;
    }

    const Phase before = vec.phase();
    const Phase after = vec.update_curriculum();
    if (before == Phase::kNoisy && after == Phase::kQuiet) summary.flip_iteration = iter;

    MetricsRow row;
    row.iteration = iter;
    if (!completed_terms.empty()) {
      for (const auto& ep : completed_terms)
        for (int k = 0; k < kNumTerms; ++k) row.episodic_terms[static_cast<size_t>(k)] += ep[static_cast<size_t>(k)];
      for (int k = 0; k < kNumTerms; ++k) {
        row.episodic_terms[static_cast<size_t>(k)] /= static_cast<double>(completed_terms.size());
        row.episodic_total += row.episodic_terms[static_cast<size_t>(k)];
      }
    }
    row.tracking_score = vec.latch().running_mean();
    row.phase = after;
    row.mean_touchdown_speed = touchdowns > 0 ? touchdown_speed_sum / touchdowns : 0.0;
    if (!completed_lengths.empty()) {
      for (double len : completed_lengths) row.mean_episode_length += len;
      row.mean_episode_length /= static_cast<double>(completed_lengths.size());
    }
    row.lr = stats.lr;
    row.kl = stats.approx_kl;
    metrics << metrics_row_csv(row) << "\n";
    metrics.flush();
    if (progress) progress(row);

    summary.iterations = iter;
    summary.final_tracking_score = row.tracking_score;
    if (iter % spec.checkpoint_every == 0) save_ckpt(iter);
    if (spec.stop_after_quiet >= 0 && summary.flip_iteration > 0 &&
        iter >= summary.flip_iteration + spec.stop_after_quiet)
      break;
  }

  if (!summary.diverged) save_ckpt(summary.iterations);
  save_summary(summary, dir + "/summary.json");
  return summary;
}

void save_summary(const TrainSummary& summary, const std::string& path) {
  nlohmann::json j{{"iterations", summary.iterations},
                   {"flip_iteration", summary.flip_iteration},
                   {"final_tracking_score", summary.final_tracking_score},
                   {"diverged", summary.diverged},
                   {"metrics_path", summary.metrics_path},
                   {"checkpoint_path", summary.checkpoint_path}};
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << "\n";
}

TrainSummary load_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("summary " + path + ": " + e.what());
  }
  TrainSummary s;
  try {
    s.iterations = j.at("iterations").get<int>();
    s.flip_iteration = j.at("flip_iteration").get<int>();
    s.final_tracking_score = j.at("final_tracking_score").get<double>();
    s.diverged = j.at("diverged").get<bool>();
    s.metrics_path = j.at("metrics_path").get<std::string>();
    s.checkpoint_path = j.at("checkpoint_path").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("summary " + path + ": " + e.what());
  }
  return s;
}

}  // namespace quietgait::quietctl
