#pragma once

// Clipped-surrogate proximal policy optimization with generalized advantage
// estimation, Adam, a global gradient-norm clip, and a KL-adaptive learning
// rate. Gradients are hand-derived for the fixed network shape and verified
// against central finite differences in the test suite.

#include <cstdint>
#include <nlohmann/json.hpp>
#include <vector>

#include "quietgait/common/episode.hpp"
#include "quietgait/common/rng.hpp"
#include "quietgait/ppolearn/policy.hpp"

namespace quietgait::ppolearn {

struct PpoConfig {
  double gamma = 0.99;
  double lam = 0.95;
  double clip = 0.2;
  int epochs = 5;
  int minibatches = 4;
  double value_loss_coef = 1.0;  // applied to the clipped value loss
  double entropy_coef = 0.01;
  double kl_target = 0.01;       // halve lr above 2x, double below 0.5x
  double lr_initial = 1e-3;
  double lr_min = 1e-5;
  double lr_max = 1e-2;
  double max_grad_norm = 1.0;
  int rollout_steps = 24;
  double initial_action_std = 1.0;

  void validate() const;
};

void to_json(nlohmann::json& j, const PpoConfig& c);
void from_json(const nlohmann::json& j, PpoConfig& c);

/// Rectangular rollout storage. Sample columns are time-major: the column for
/// step t of environment e is t * n_envs + e, which also fixes the reduction
/// order for deterministic updates.
struct RolloutBuffer {
  int n_envs = 0;
  int n_steps = 0;
  MatX obs;        // obs_dim x (n_steps * n_envs)
  MatX actions;    // act_dim x (n_steps * n_envs)
  VecX log_probs;  // n_steps * n_envs
  VecX values;     // n_steps * n_envs
  VecX rewards;    // n_steps * n_envs
  std::vector<std::uint8_t> dones;        // 1 where the episode ended at this step
  std::vector<DoneReason> done_reasons;   // parallel to dones
  VecX bootstrap;  // per-env value estimate beyond the horizon

  void resize(int n_envs, int n_steps, int obs_dim, int act_dim);
  int size() const { return n_envs * n_steps; }
  int col(int t, int e) const { return t * n_envs + e; }
};

/// Generalized advantage estimation over a single environment's sequence:
/// delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t, with V beyond the
/// horizon supplied by `bootstrap`; A_t = delta_t + gamma * lam * (1 - done_t)
/// * A_{t+1}; returns = A + V.
std::pair<VecX, VecX> gae(const VecX& rewards, const VecX& values,
                          const std::vector<std::uint8_t>& dones, double bootstrap,
                          double gamma, double lam);

/// Buffer-wide GAE: applies gae() per environment and scatters back into
/// time-major order.
std::pair<VecX, VecX> compute_advantages(const RolloutBuffer& buffer, double gamma, double lam);

/// Shifts and scales to zero mean and unit (population) standard deviation,
/// with a 1e-8 guard against degenerate batches. Applied to every minibatch's
/// advantages before the gradient step.
void normalize_advantages(VecX& adv);

/// One minibatch of flattened samples (columns).
struct Minibatch {
  MatX obs;
  MatX actions;
  VecX old_log_prob;
  VecX old_value;
  VecX advantage;  // expected normalized by the caller
  VecX ret;
};

struct Gradients {
  std::vector<MatX> dW_actor, dW_critic;
  std::vector<VecX> db_actor, db_critic;
  VecX d_log_std;

  void resize_like(const PolicyParams& p);
  void set_zero();
  double squared_norm() const;
  void scale(double s);
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double lr = 0.0;
  double grad_norm = 0.0;
};

/// Total PPO loss on one minibatch and, when `grads` is non-null, its
/// analytic gradient. Loss = -mean(min(rho A, clip(rho) A))
/// + value_loss_coef * mean(max((V-R)^2, (Vclip-R)^2)) - entropy_coef * H.
UpdateStats ppo_loss_and_grad(const PolicyParams& params, const Minibatch& mb,
                              const PpoConfig& cfg, Gradients* grads);

/// Adam first/second moment state plus the adaptive learning rate.
struct AdamState {
  std::vector<MatX> mW_actor, vW_actor, mW_critic, vW_critic;
  std::vector<VecX> mb_actor, vb_actor, mb_critic, vb_critic;
  VecX m_log_std, v_log_std;
  long step = 0;
  double lr = 1e-3;

  static AdamState init(const PolicyParams& p, double lr);
};

/// Runs epochs x minibatches of clipped-surrogate updates over the buffer.
/// Advantages are normalized per minibatch; the learning rate adapts from the
/// KL estimate before each gradient step; gradients are norm-clipped, applied
/// with Adam, and log_std is clamped to its bounds afterwards. Throws
/// DivergedError with diagnostics when a loss goes non-finite.
UpdateStats ppo_update(PolicyParams& params, const RolloutBuffer& buffer, const PpoConfig& cfg,
                       AdamState& adam, Rng& rng);

}  // namespace quietgait::ppolearn
