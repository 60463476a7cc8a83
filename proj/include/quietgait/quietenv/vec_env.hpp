#pragma once

#include <vector>

#include "quietgait/quietenv/env.hpp"
#include "quietgait/rigidsim/types.hpp"

namespace quietgait::quietenv {

using rigidsim::MatX;

/// Fixed-size batch of independent environments stepping in lockstep, with
/// auto-reset: when an episode ends, its terminal observation is reported
/// and the returned observation column already belongs to the next episode.
/// The only cross-environment state is the curriculum latch, which is
/// evaluated at explicit synchronization points.
class VecEnv {
 public:
  struct Step {
    MatX observations;           // obs_dim x n, post-reset where done
    MatX terminal_observations;  // obs_dim x n, valid only where done
    VecX reward;                 // total per env
    MatX reward_terms;           // 14 x n, scaled per-step contributions
    std::vector<std::uint8_t> done;
    std::vector<DoneReason> reason;
    std::vector<double> completed_scores;   // episodic tracking scores, env order
    std::vector<double> completed_lengths;  // s
    int touchdown_count = 0;
    double touchdown_speed_sum = 0.0;       // m/s summed over touchdowns

    void resize(int obs_dim, int n_envs);
  };

  VecEnv(const EnvConfig& cfg, const rigidsim::RobotModel& model, int n_envs, uint64_t seed);

  int n_envs() const { return static_cast<int>(envs_.size()); }
  int obs_dim() const { return cfg_.observation_dim(); }

  /// Resets every environment; columns are per-env observations.
  MatX reset_all();

  /// Steps every environment with its action column (24 x n). Completed
  /// episodes are recorded in the latch and reset in env order, so results
  /// do not depend on the worker-thread count.
  void step(const MatX& actions, Step& out);

  /// Once-per-iteration latch evaluation; propagates a flip to every env.
  /// Returns the phase new episodes will start in.
  Phase update_curriculum();

  Phase phase() const { return phase_; }
  const CurriculumLatch& latch() const { return latch_; }
  Env& env(int i) { return envs_[static_cast<size_t>(i)]; }
  const Env& env(int i) const { return envs_[static_cast<size_t>(i)]; }
  const EnvConfig& config() const { return cfg_; }

 private:
  EnvConfig cfg_;
  std::vector<Env> envs_;
  std::vector<StepResult> scratch_;
  CurriculumLatch latch_;
  Phase phase_;
};

}  // namespace quietgait::quietenv
