#include "quietgait/ppolearn/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "quietgait/common/error.hpp"

namespace quietgait::ppolearn {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void adam_apply(MatX& theta, MatX& m, MatX& v, const MatX& g, double lr, double bc1, double bc2) {
  m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
  v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g.cwiseProduct(g);
  theta.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + kAdamEps);
}

void adam_apply(VecX& theta, VecX& m, VecX& v, const VecX& g, double lr, double bc1, double bc2) {
  m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
  v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g.cwiseProduct(g);
  theta.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + kAdamEps);
}

}  // namespace

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidInputError("ppo config: gamma must be in (0, 1]");
  if (!(lam > 0.0 && lam <= 1.0)) throw InvalidInputError("ppo config: lambda must be in (0, 1]");
  if (!(clip > 0.0)) throw InvalidInputError("ppo config: clip must be positive");
  if (epochs < 1) throw InvalidInputError("ppo config: epochs must be >= 1");
  if (minibatches < 1) throw InvalidInputError("ppo config: minibatches must be >= 1");
  if (!(value_loss_coef >= 0.0)) throw InvalidInputError("ppo config: value loss coef must be >= 0");
  if (!(entropy_coef >= 0.0)) throw InvalidInputError("ppo config: entropy coef must be >= 0");
  if (!(kl_target > 0.0)) throw InvalidInputError("ppo config: KL target must be positive");
  if (!(lr_min > 0.0 && lr_min <= lr_max))
    throw InvalidInputError("ppo config: learning-rate bounds must satisfy 0 < min <= max");
  if (!(lr_initial >= lr_min && lr_initial <= lr_max))
    throw InvalidInputError("ppo config: initial learning rate must lie within its bounds");
  if (!(max_grad_norm > 0.0)) throw InvalidInputError("ppo config: gradient clip must be positive");
  if (rollout_steps < 1) throw InvalidInputError("ppo config: rollout length must be >= 1");
  if (!(initial_action_std > 0.0))
    throw InvalidInputError("ppo config: initial action std must be positive");
}

void to_json(nlohmann::json& j, const PpoConfig& c) {
  j = nlohmann::json{{"gamma", c.gamma},
                     {"lambda", c.lam},
                     {"clip", c.clip},
                     {"epochs", c.epochs},
                     {"minibatches", c.minibatches},
                     {"value_loss_coef", c.value_loss_coef},
                     {"entropy_coef", c.entropy_coef},
                     {"kl_target", c.kl_target},
                     {"lr_initial", c.lr_initial},
                     {"lr_min", c.lr_min},
                     {"lr_max", c.lr_max},
                     {"max_grad_norm", c.max_grad_norm},
                     {"rollout_steps", c.rollout_steps},
                     {"initial_action_std", c.initial_action_std}};
}

void from_json(const nlohmann::json& j, PpoConfig& c) {
  c.gamma = j.at("gamma").get<double>();
  c.lam = j.at("lambda").get<double>();
  c.clip = j.at("clip").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.minibatches = j.at("minibatches").get<int>();
  c.value_loss_coef = j.at("value_loss_coef").get<double>();
  c.entropy_coef = j.at("entropy_coef").get<double>();
  c.kl_target = j.at("kl_target").get<double>();
  c.lr_initial = j.at("lr_initial").get<double>();
  c.lr_min = j.at("lr_min").get<double>();
  c.lr_max = j.at("lr_max").get<double>();
  c.max_grad_norm = j.at("max_grad_norm").get<double>();
  c.rollout_steps = j.at("rollout_steps").get<int>();
  c.initial_action_std = j.at("initial_action_std").get<double>();
}

void RolloutBuffer::resize(int envs, int steps, int obs_dim, int act_dim) {
  n_envs = envs;
  n_steps = steps;
  const int n = envs * steps;
  obs.resize(obs_dim, n);
  actions.resize(act_dim, n);
  log_probs.resize(n);
  values.resize(n);
  rewards.resize(n);
  dones.assign(n, 0);
  done_reasons.assign(n, DoneReason::kNone);
  bootstrap = VecX::Zero(envs);
}

std::pair<VecX, VecX> gae(const VecX& rewards, const VecX& values,
                          const std::vector<std::uint8_t>& dones, double bootstrap, double gamma,
                          double lam) {
  const auto t_len = rewards.size();
  if (values.size() != t_len || static_cast<Eigen::Index>(dones.size()) != t_len)
    throw InvalidInputError("gae: rewards, values, and dones must have equal length");
  VecX adv(t_len), ret(t_len);
  double running = 0.0;
  for (Eigen::Index t = t_len - 1; t >= 0; --t) {
    const double not_done = dones[t] ? 0.0 : 1.0;
    const double v_next = (t + 1 < t_len) ? values[t + 1] : bootstrap;
    const double delta = rewards[t] + gamma * v_next * not_done - values[t];
    running = delta + gamma * lam * not_done * running;
    adv[t] = running;
    ret[t] = adv[t] + values[t];
  }
  return {adv, ret};
}

std::pair<VecX, VecX> compute_advantages(const RolloutBuffer& buffer, double gamma, double lam) {
  const int n = buffer.size();
  VecX adv(n), ret(n);
  VecX r(buffer.n_steps), v(buffer.n_steps);
  std::vector<std::uint8_t> d(buffer.n_steps);
  for (int e = 0; e < buffer.n_envs; ++e) {
    for (int t = 0; t < buffer.n_steps; ++t) {
      const int c = buffer.col(t, e);
      r[t] = buffer.rewards[c];
      v[t] = buffer.values[c];
      d[t] = buffer.dones[c];
    }
    const auto [a_seq, ret_seq] = gae(r, v, d, buffer.bootstrap[e], gamma, lam);
    for (int t = 0; t < buffer.n_steps; ++t) {
      const int c = buffer.col(t, e);
      adv[c] = a_seq[t];
      ret[c] = ret_seq[t];
    }
  }
  return {adv, ret};
}

void normalize_advantages(VecX& adv) {
  if (adv.size() == 0) return;
  const double mean = adv.mean();
  const double var = (adv.array() - mean).square().mean();
  adv = (adv.array() - mean) / (std::sqrt(var) + 1e-8);
}

void Gradients::resize_like(const PolicyParams& p) {
  auto shape = [](const std::vector<LayerParams>& net, std::vector<MatX>& dW,
                  std::vector<VecX>& db) {
    dW.resize(net.size());
    db.resize(net.size());
    for (std::size_t l = 0; l < net.size(); ++l) {
      dW[l].resize(net[l].W.rows(), net[l].W.cols());
      db[l].resize(net[l].b.size());
    }
  };
  shape(p.actor, dW_actor, db_actor);
  shape(p.critic, dW_critic, db_critic);
  d_log_std.resize(p.log_std.size());
}

void Gradients::set_zero() {
  for (auto& m : dW_actor) m.setZero();
  for (auto& m : dW_critic) m.setZero();
  for (auto& v : db_actor) v.setZero();
  for (auto& v : db_critic) v.setZero();
  d_log_std.setZero();
}

double Gradients::squared_norm() const {
  double s = 0.0;
  for (const auto& m : dW_actor) s += m.squaredNorm();
  for (const auto& m : dW_critic) s += m.squaredNorm();
  for (const auto& v : db_actor) s += v.squaredNorm();
  for (const auto& v : db_critic) s += v.squaredNorm();
  return s + d_log_std.squaredNorm();
}

void Gradients::scale(double s) {
  for (auto& m : dW_actor) m *= s;
  for (auto& m : dW_critic) m *= s;
  for (auto& v : db_actor) v *= s;
  for (auto& v : db_critic) v *= s;
  d_log_std *= s;
}

UpdateStats ppo_loss_and_grad(const PolicyParams& params, const Minibatch& mb,
                              const PpoConfig& cfg, Gradients* grads) {
  const auto batch = mb.obs.cols();
  if (batch == 0) throw InvalidInputError("ppo loss: empty minibatch");
  const double inv_batch = 1.0 / static_cast<double>(batch);

  ForwardCache actor_cache, critic_cache;
  const MatX mean = net_forward(params.actor, mb.obs, grads ? &actor_cache : nullptr);
  const MatX value_row = net_forward(params.critic, mb.obs, grads ? &critic_cache : nullptr);
  const VecX lp_new = log_prob(params, mean, mb.actions);

  // -- clipped surrogate --------------------------------------------------
  double policy_loss = 0.0, kl_sum = 0.0;
  VecX g_lp = VecX::Zero(batch);  // d(policy loss)/d(lp_new)
  for (Eigen::Index j = 0; j < batch; ++j) {
    const double log_ratio = lp_new[j] - mb.old_log_prob[j];
    const double rho = std::exp(log_ratio);
    const double a = mb.advantage[j];
    const double unclipped = rho * a;
    const double clipped = std::clamp(rho, 1.0 - cfg.clip, 1.0 + cfg.clip) * a;
    policy_loss -= std::min(unclipped, clipped) * inv_batch;
    if (unclipped <= clipped) g_lp[j] = -rho * a * inv_batch;
    kl_sum += (rho - 1.0) - log_ratio;  // non-negative KL estimator
  }
  const double approx_kl = kl_sum * inv_batch;

  // -- clipped value loss -------------------------------------------------
  double value_loss = 0.0;
  VecX g_v = VecX::Zero(batch);
  for (Eigen::Index j = 0; j < batch; ++j) {
    const double v = value_row(0, j);
    const double dv = std::clamp(v - mb.old_value[j], -cfg.clip, cfg.clip);
    const double v_clip = mb.old_value[j] + dv;
    const double err = v - mb.ret[j];
    const double err_clip = v_clip - mb.ret[j];
    if (err * err >= err_clip * err_clip) {
      value_loss += err * err * inv_batch;
      g_v[j] = cfg.value_loss_coef * 2.0 * err * inv_batch;
    } else {
      value_loss += err_clip * err_clip * inv_batch;
      if (std::abs(v - mb.old_value[j]) < cfg.clip)
        g_v[j] = cfg.value_loss_coef * 2.0 * err_clip * inv_batch;
    }
  }

  const double ent = entropy(params);
  const double total =
      policy_loss + cfg.value_loss_coef * value_loss - cfg.entropy_coef * ent;
  if (!std::isfinite(total))
    throw DivergedError("ppo update: non-finite loss (policy=" + std::to_string(policy_loss) +
                        ", value=" + std::to_string(value_loss) +
                        ", entropy=" + std::to_string(ent) + ")");

  if (grads != nullptr) {
    grads->resize_like(params);
    grads->set_zero();
    // policy head: d lp/d mean_ij = (a_ij - mean_ij)/sigma_i^2
    MatX d_mean(params.act_dim, batch);
    for (int i = 0; i < params.act_dim; ++i) {
      const double inv_var = std::exp(-2.0 * params.log_std[i]);
      double dls = 0.0;
      for (Eigen::Index j = 0; j < batch; ++j) {
        const double diff = mb.actions(i, j) - mean(i, j);
        d_mean(i, j) = g_lp[j] * diff * inv_var;
        dls += g_lp[j] * (diff * diff * inv_var - 1.0);
      }
      // entropy gradient: dH/d log_std_i = 1
      grads->d_log_std[i] = dls - cfg.entropy_coef;
    }
    net_backward(params.actor, actor_cache, d_mean, grads->dW_actor, grads->db_actor);
    net_backward(params.critic, critic_cache, g_v.transpose(), grads->dW_critic,
                 grads->db_critic);
  }

  UpdateStats stats;
  stats.policy_loss = policy_loss;
  stats.value_loss = value_loss;
  stats.entropy = ent;
  stats.approx_kl = approx_kl;
  return stats;
}

AdamState AdamState::init(const PolicyParams& p, double lr) {
  AdamState s;
  auto shape = [](const std::vector<LayerParams>& net, std::vector<MatX>& m, std::vector<MatX>& v,
                  std::vector<VecX>& mb, std::vector<VecX>& vb) {
    m.resize(net.size());
    v.resize(net.size());
    mb.resize(net.size());
    vb.resize(net.size());
    for (std::size_t l = 0; l < net.size(); ++l) {
      m[l] = MatX::Zero(net[l].W.rows(), net[l].W.cols());
      v[l] = MatX::Zero(net[l].W.rows(), net[l].W.cols());
      mb[l] = VecX::Zero(net[l].b.size());
      vb[l] = VecX::Zero(net[l].b.size());
    }
  };
  shape(p.actor, s.mW_actor, s.vW_actor, s.mb_actor, s.vb_actor);
  shape(p.critic, s.mW_critic, s.vW_critic, s.mb_critic, s.vb_critic);
  s.m_log_std = VecX::Zero(p.log_std.size());
  s.v_log_std = VecX::Zero(p.log_std.size());
  s.step = 0;
  s.lr = lr;
  return s;
}

UpdateStats ppo_update(PolicyParams& params, const RolloutBuffer& buffer, const PpoConfig& cfg,
                       AdamState& adam, Rng& rng) {
  cfg.validate();
  const int n = buffer.size();
  if (n < cfg.minibatches)
    throw InvalidInputError("ppo update: buffer smaller than the minibatch count");

  const auto [advantages, returns] = compute_advantages(buffer, cfg.gamma, cfg.lam);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  Gradients grads;
  UpdateStats mean_stats;
  int n_updates = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the caller's stream keeps runs bitwise reproducible
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[rng.uniform_index(static_cast<std::size_t>(i) + 1)]);

    for (int b = 0; b < cfg.minibatches; ++b) {
      const int lo = static_cast<int>(static_cast<long>(n) * b / cfg.minibatches);
      const int hi = static_cast<int>(static_cast<long>(n) * (b + 1) / cfg.minibatches);
      const int m = hi - lo;
      if (m == 0) continue;

      Minibatch mb;
      mb.obs.resize(buffer.obs.rows(), m);
      mb.actions.resize(buffer.actions.rows(), m);
      mb.old_log_prob.resize(m);
      mb.old_value.resize(m);
      mb.advantage.resize(m);
      mb.ret.resize(m);
      for (int i = 0; i < m; ++i) {
        const int c = order[lo + i];
        mb.obs.col(i) = buffer.obs.col(c);
        mb.actions.col(i) = buffer.actions.col(c);
        mb.old_log_prob[i] = buffer.log_probs[c];
        mb.old_value[i] = buffer.values[c];
        mb.advantage[i] = advantages[c];
        mb.ret[i] = returns[c];
      }
      normalize_advantages(mb.advantage);

      const UpdateStats s = ppo_loss_and_grad(params, mb, cfg, &grads);

      // adapt the learning rate from the drift before stepping
      if (s.approx_kl > 2.0 * cfg.kl_target)
        adam.lr = std::max(cfg.lr_min, adam.lr * 0.5);
      else if (s.approx_kl < 0.5 * cfg.kl_target)
        adam.lr = std::min(cfg.lr_max, adam.lr * 2.0);

      const double norm = std::sqrt(grads.squared_norm());
      if (norm > cfg.max_grad_norm) grads.scale(cfg.max_grad_norm / norm);

      adam.step += 1;
      const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam.step));
      const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam.step));
      for (int l = 0; l < 4; ++l) {
        adam_apply(params.actor[l].W, adam.mW_actor[l], adam.vW_actor[l], grads.dW_actor[l],
                   adam.lr, bc1, bc2);
        adam_apply(params.actor[l].b, adam.mb_actor[l], adam.vb_actor[l], grads.db_actor[l],
                   adam.lr, bc1, bc2);
        adam_apply(params.critic[l].W, adam.mW_critic[l], adam.vW_critic[l], grads.dW_critic[l],
                   adam.lr, bc1, bc2);
        adam_apply(params.critic[l].b, adam.mb_critic[l], adam.vb_critic[l], grads.db_critic[l],
                   adam.lr, bc1, bc2);
      }
      adam_apply(params.log_std, adam.m_log_std, adam.v_log_std, grads.d_log_std, adam.lr, bc1,
                 bc2);
      for (int i = 0; i < params.act_dim; ++i)
        params.log_std[i] = std::clamp(params.log_std[i], kLogStdMin, kLogStdMax);

      mean_stats.policy_loss += s.policy_loss;
      mean_stats.value_loss += s.value_loss;
      mean_stats.entropy += s.entropy;
      mean_stats.approx_kl += s.approx_kl;
      mean_stats.grad_norm += norm;
      ++n_updates;
    }
  }

  if (n_updates > 0) {
    mean_stats.policy_loss /= n_updates;
    mean_stats.value_loss /= n_updates;
    mean_stats.entropy /= n_updates;
    mean_stats.approx_kl /= n_updates;
    mean_stats.grad_norm /= n_updates;
  }
  mean_stats.lr = adam.lr;
  return mean_stats;
}

}  // namespace quietgait::ppolearn
