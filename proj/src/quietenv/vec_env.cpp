#include "quietgait/quietenv/vec_env.hpp"

#include <sstream>

#include "quietgait/common/error.hpp"
#include "quietgait/common/parallel.hpp"

namespace quietgait::quietenv {

void VecEnv::Step::resize(int obs_dim, int n_envs) {
  observations.resize(obs_dim, n_envs);
  terminal_observations.resize(obs_dim, n_envs);
  reward.resize(n_envs);
  reward_terms.resize(RewardBreakdown::kNumTerms, n_envs);
  done.assign(static_cast<size_t>(n_envs), 0);
  reason.assign(static_cast<size_t>(n_envs), DoneReason::kNone);
  completed_scores.clear();
  completed_lengths.clear();
  touchdown_count = 0;
  touchdown_speed_sum = 0.0;
}

VecEnv::VecEnv(const EnvConfig& cfg, const rigidsim::RobotModel& model, int n_envs, uint64_t seed)
    : cfg_(cfg), phase_(cfg.initial_phase) {
  if (n_envs < 1) throw InvalidInputError("vec env: need at least one environment");
  cfg_.validate();
  latch_.window = cfg_.curriculum_window;
  latch_.quiet = cfg_.initial_phase == Phase::kQuiet;
  Rng master(seed);
  envs_.reserve(static_cast<size_t>(n_envs));
  for (int i = 0; i < n_envs; ++i)
    envs_.emplace_back(cfg_, model, master.derive(static_cast<uint64_t>(i)));
  scratch_.resize(static_cast<size_t>(n_envs));
}

MatX VecEnv::reset_all() {
  MatX obs(obs_dim(), n_envs());
  for (int i = 0; i < n_envs(); ++i) obs.col(i) = envs_[static_cast<size_t>(i)].reset();
  return obs;
}

void VecEnv::step(const MatX& actions, Step& out) {
  const int n = n_envs();
  if (actions.rows() != EnvConfig::kActionDim || actions.cols() != n) {
    std::ostringstream msg;
    msg << "vec env: action batch must be " << EnvConfig::kActionDim << " x " << n << ", got "
        << actions.rows() << " x " << actions.cols();
    throw InvalidInputError(msg.str());
  }
  out.resize(obs_dim(), n);

  parallel_for(n, [&](int i) {
    const VecX action = actions.col(i);
    scratch_[static_cast<size_t>(i)] = envs_[static_cast<size_t>(i)].step(action);
  });

  // Serial pass: batch assembly, latch bookkeeping and auto-resets, in env
  // order so nothing depends on the worker count.
  for (int i = 0; i < n; ++i) {
    Env& env = envs_[static_cast<size_t>(i)];
    const StepResult& r = scratch_[static_cast<size_t>(i)];
    out.reward[i] = r.reward.total();
    const auto terms = r.reward.terms();
    for (int t = 0; t < RewardBreakdown::kNumTerms; ++t) out.reward_terms(t, i) = terms[t];
    out.done[static_cast<size_t>(i)] = r.done ? 1 : 0;
    out.reason[static_cast<size_t>(i)] = r.reason;
    for (int f = 0; f < rigidsim::kNumLegs; ++f) {
      if (r.contact.touchdown[f]) {
        ++out.touchdown_count;
        out.touchdown_speed_sum += r.contact.touchdown_speed[f];
      }
    }
    if (r.done) {
      out.terminal_observations.col(i) = r.observation;
      out.completed_scores.push_back(env.episodic_tracking_score());
      out.completed_lengths.push_back(env.episode().elapsed);
      latch_.record(env.episodic_tracking_score());
      out.observations.col(i) = env.reset();
    } else {
      out.observations.col(i) = r.observation;
    }
  }
}

Phase VecEnv::update_curriculum() {
  if (!cfg_.curriculum_enabled) return phase_;
  const Phase p = curriculum_update(latch_, cfg_.curriculum_threshold);
  if (p != phase_) {
    phase_ = p;
    for (auto& env : envs_) env.set_phase(p);
  }
  return phase_;
}

}  // namespace quietgait::quietenv
