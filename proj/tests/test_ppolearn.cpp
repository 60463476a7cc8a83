#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

#include "quietgait/common/error.hpp"
#include "quietgait/common/rng.hpp"
#include "quietgait/ppolearn/checkpoint.hpp"
#include "quietgait/ppolearn/policy.hpp"
#include "quietgait/ppolearn/ppo.hpp"

using namespace quietgait;
using namespace quietgait::ppolearn;

namespace {

PolicyParams toy_params(int obs_dim, int act_dim, int hidden, unsigned seed) {
  Rng rng(seed);
  PolicyParams p = PolicyParams::init(obs_dim, act_dim, hidden, 1.0, rng);
  // break the zero-bias symmetry so gradients flow everywhere
  for (auto& l : p.actor)
    for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b[i] = 0.1 * rng.normal();
  for (auto& l : p.critic)
    for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b[i] = 0.1 * rng.normal();
  for (int i = 0; i < act_dim; ++i) p.log_std[i] = rng.uniform(-0.7, 0.3);
  return p;
}

Minibatch toy_minibatch(const PolicyParams& p, int batch, unsigned seed) {
  Rng rng(seed);
  Minibatch mb;
  mb.obs.resize(p.obs_dim, batch);
  for (Eigen::Index j = 0; j < batch; ++j)
    for (int i = 0; i < p.obs_dim; ++i) mb.obs(i, j) = rng.normal();
  const EvalResult ev = forward(p, mb.obs);
  mb.actions.resize(p.act_dim, batch);
  for (Eigen::Index j = 0; j < batch; ++j)
    for (int i = 0; i < p.act_dim; ++i)
      mb.actions(i, j) = ev.mean(i, j) + std::exp(p.log_std[i]) * rng.normal();
  const VecX lp = log_prob(p, ev.mean, mb.actions);
  mb.old_log_prob.resize(batch);
  mb.old_value.resize(batch);
  mb.advantage.resize(batch);
  mb.ret.resize(batch);
  for (int j = 0; j < batch; ++j) {
    // keep every sample a safe distance from the clip kinks so finite
    // differences see a smooth function
    const double off = rng.uniform(0.05, 0.25) * (rng.uniform01() < 0.5 ? 1.0 : -1.0);
    mb.old_log_prob[j] = lp[j] - off;
    mb.old_value[j] = ev.value[j] + rng.uniform(0.3, 0.8) * (j % 2 == 0 ? 1.0 : -1.0);
    mb.advantage[j] = rng.normal(0.0, 1.5);
    mb.ret[j] = ev.value[j] + rng.normal(0.0, 0.5);
  }
  return mb;
}

double total_loss(const PolicyParams& p, const Minibatch& mb, const PpoConfig& cfg) {
  const UpdateStats s = ppo_loss_and_grad(p, mb, cfg, nullptr);
  return s.policy_loss + cfg.value_loss_coef * s.value_loss - cfg.entropy_coef * s.entropy;
}

// Central finite difference through an arbitrary parameter slot; the slot
// must point inside `p`.
double fd_grad(PolicyParams& p, double* slot, const Minibatch& mb, const PpoConfig& cfg,
               double eps) {
  const double saved = *slot;
  *slot = saved + eps;
  const double up = total_loss(p, mb, cfg);
  *slot = saved - eps;
  const double down = total_loss(p, mb, cfg);
  *slot = saved;
  return (up - down) / (2.0 * eps);
}

}  // namespace

TEST_CASE("forward: all-zero parameters give zero outputs") {
  PolicyParams p;
  p.obs_dim = 5;
  p.act_dim = 3;
  p.hidden_dim = 4;
  const int da[5] = {5, 4, 4, 4, 3};
  const int dc[5] = {5, 4, 4, 4, 1};
  p.actor.resize(4);
  p.critic.resize(4);
  for (int l = 0; l < 4; ++l) {
    p.actor[l].W = MatX::Zero(da[l + 1], da[l]);
    p.actor[l].b = VecX::Zero(da[l + 1]);
    p.critic[l].W = MatX::Zero(dc[l + 1], dc[l]);
    p.critic[l].b = VecX::Zero(dc[l + 1]);
  }
  p.log_std = VecX::Zero(3);
  const auto [mean, value] = forward_one(p, VecX::Ones(5));
  CHECK(mean.norm() == 0.0);
  CHECK(value == 0.0);
}

TEST_CASE("forward: hidden activation is ELU") {
  // one hidden unit fed exactly -1, then passed through a linear layer
  std::vector<LayerParams> net(2);
  net[0].W = MatX::Constant(1, 1, 1.0);
  net[0].b = VecX::Constant(1, 0.0);
  net[1].W = MatX::Constant(1, 1, 1.0);
  net[1].b = VecX::Constant(1, 0.0);
  MatX x(1, 1);
  x(0, 0) = -1.0;
  const MatX y = net_forward(net, x, nullptr);
  CHECK(y(0, 0) == doctest::Approx(std::exp(-1.0) - 1.0).epsilon(1e-15));
  CHECK(y(0, 0) == doctest::Approx(-0.6321205588285577).epsilon(1e-12));
}

TEST_CASE("forward matches an independent layer-by-layer evaluation") {
  const PolicyParams p = toy_params(6, 3, 8, 21);
  Rng rng(22);
  VecX obs(6);
  for (int i = 0; i < 6; ++i) obs[i] = rng.normal();

  // plain-loop re-evaluation without Eigen products
  auto run_net = [&](const std::vector<LayerParams>& net) {
    std::vector<double> a(obs.data(), obs.data() + obs.size());
    for (std::size_t l = 0; l < net.size(); ++l) {
      std::vector<double> z(net[l].W.rows(), 0.0);
      for (Eigen::Index i = 0; i < net[l].W.rows(); ++i) {
        double acc = net[l].b[i];
        for (Eigen::Index k = 0; k < net[l].W.cols(); ++k) acc += net[l].W(i, k) * a[k];
        z[i] = acc;
      }
      if (l + 1 < net.size())
        for (double& v : z) v = v > 0.0 ? v : std::exp(v) - 1.0;
      a = z;
    }
    return a;
  };
  const auto [mean, value] = forward_one(p, obs);
  const auto mean_ref = run_net(p.actor);
  const auto value_ref = run_net(p.critic);
  for (int i = 0; i < 3; ++i) CHECK(mean[i] == doctest::Approx(mean_ref[i]).epsilon(1e-12));
  CHECK(value == doctest::Approx(value_ref[0]).epsilon(1e-12));
}

TEST_CASE("forward rejects mismatched observation dimensions") {
  const PolicyParams p = toy_params(6, 3, 8, 33);
  CHECK_THROWS_AS(forward(p, MatX::Zero(7, 2)), InvalidInputError);
}

TEST_CASE("sample_action: concentration at the std floor and exact density") {
  Rng rng(44);
  PolicyParams p = toy_params(4, 24, 8, 45);
  p.log_std.setConstant(kLogStdMin);  // std = 1e-4
  const VecX mean = VecX::Constant(24, 0.3);
  int close = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const auto [action, lp] = sample_action(p, mean, rng);
    if ((action - mean).cwiseAbs().maxCoeff() < 1e-3) ++close;
  }
  CHECK(close >= 999);

  // density at the mean: -sum(log_std) - (n/2) log(2 pi)
  p.log_std.setConstant(-0.25);
  const MatX m1 = mean, a1 = mean;
  const double lp_at_mean = log_prob(p, m1, a1)[0];
  const double expect = 24.0 * 0.25 - 12.0 * std::log(2.0 * std::numbers::pi);
  CHECK(lp_at_mean == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("sample_action: empirical std tracks exp(log_std)") {
  Rng rng(77);
  PolicyParams p = toy_params(4, 2, 8, 78);
  p.log_std[0] = std::log(0.7);
  p.log_std[1] = std::log(1.9);
  const VecX mean = VecX::Zero(2);
  const int n = 100000;
  double s0 = 0.0, s1 = 0.0, q0 = 0.0, q1 = 0.0;
  for (int t = 0; t < n; ++t) {
    const auto [a, lp] = sample_action(p, mean, rng);
    s0 += a[0];
    s1 += a[1];
    q0 += a[0] * a[0];
    q1 += a[1] * a[1];
  }
  const double std0 = std::sqrt(q0 / n - (s0 / n) * (s0 / n));
  const double std1 = std::sqrt(q1 / n - (s1 / n) * (s1 / n));
  CHECK(std0 == doctest::Approx(0.7).epsilon(0.02));
  CHECK(std1 == doctest::Approx(1.9).epsilon(0.02));
}

TEST_CASE("gae: rewards-to-go limit and single-step arithmetic") {
  VecX r(4), v(4);
  r << 1.0, 2.0, 3.0, 4.0;
  v.setZero();
  std::vector<std::uint8_t> dones(4, 0);
  const auto [adv, ret] = gae(r, v, dones, 0.0, 1.0, 1.0);
  CHECK(adv[0] == doctest::Approx(10.0));
  CHECK(adv[1] == doctest::Approx(9.0));
  CHECK(adv[2] == doctest::Approx(7.0));
  CHECK(adv[3] == doctest::Approx(4.0));
  for (int t = 0; t < 4; ++t) CHECK(ret[t] == doctest::Approx(adv[t]));  // V = 0

  VecX r1(1), v1(1);
  r1 << 1.0;
  v1 << 0.5;
  const auto [a1, ret1] = gae(r1, v1, {1}, 0.0, 0.99, 0.95);
  CHECK(a1[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ret1[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gae matches a brute-force double-sum oracle") {
  Rng rng(99);
  const int t_len = 100;
  VecX r(t_len), v(t_len);
  std::vector<std::uint8_t> dones(t_len, 0);
  for (int t = 0; t < t_len; ++t) {
    r[t] = rng.normal();
    v[t] = rng.normal();
    if (rng.uniform01() < 0.07) dones[t] = 1;
  }
  const double gamma = 0.99, lam = 0.95, bootstrap = 0.37;
  const auto [adv, ret] = gae(r, v, dones, bootstrap, gamma, lam);

  for (int t = 0; t < t_len; ++t) {
    // A_t = sum_l (gamma lam)^l delta_{t+l}, truncated at the first done
    double expect = 0.0;
    double w = 1.0;
    for (int l = 0; t + l < t_len; ++l) {
      const int k = t + l;
      const double not_done = dones[k] ? 0.0 : 1.0;
      const double v_next = (k + 1 < t_len) ? v[k + 1] : bootstrap;
      const double delta = r[k] + gamma * v_next * not_done - v[k];
      expect += w * delta;
      if (dones[k]) break;
      w *= gamma * lam;
    }
    CHECK(adv[t] == doctest::Approx(expect).epsilon(1e-10));
    CHECK(ret[t] == doctest::Approx(expect + v[t]).epsilon(1e-10));
  }
}

TEST_CASE("ppo loss: zero advantages give a zero actor gradient") {
  const PolicyParams p = toy_params(5, 3, 6, 101);
  Minibatch mb = toy_minibatch(p, 8, 102);
  mb.advantage.setZero();
  PpoConfig cfg;
  Gradients g;
  ppo_loss_and_grad(p, mb, cfg, &g);
  for (const auto& m : g.dW_actor) CHECK(m.norm() == 0.0);
  for (const auto& v : g.db_actor) CHECK(v.norm() == 0.0);
  // the critic still learns and the entropy bonus still shapes log_std
  double critic_norm = 0.0;
  for (const auto& m : g.dW_critic) critic_norm += m.norm();
  CHECK(critic_norm > 0.0);
}

TEST_CASE("ppo loss: positive-advantage ratio above the clip uses the clipped value") {
  const PolicyParams p = toy_params(4, 2, 4, 111);
  Minibatch mb = toy_minibatch(p, 1, 112);
  const EvalResult ev = forward(p, mb.obs);
  const VecX lp = log_prob(p, ev.mean, mb.actions);
  mb.old_log_prob[0] = lp[0] - std::log(1.5);  // rho = 1.5
  mb.advantage[0] = 2.0;
  PpoConfig cfg;
  cfg.entropy_coef = 0.0;
  cfg.value_loss_coef = 0.0;
  const UpdateStats s = ppo_loss_and_grad(p, mb, cfg, nullptr);
  CHECK(s.policy_loss == doctest::Approx(-1.2 * 2.0).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
  const PolicyParams base = toy_params(3, 2, 4, 201);
  const Minibatch mb = toy_minibatch(base, 6, 202);
  PpoConfig cfg;  // full loss: surrogate + clipped value + entropy
  Gradients g;
  ppo_loss_and_grad(base, mb, cfg, &g);

  const double eps = 1e-5;
  double worst = 0.0;
  // walk every parameter of every block via index-based access on copies
  auto fd_check = [&](auto get_param, auto get_grad, Eigen::Index count) {
    for (Eigen::Index i = 0; i < count; ++i) {
      PolicyParams p = base;
      double* slot = get_param(p, i);
      const double fd = fd_grad(p, slot, mb, cfg, eps);
      const double an = get_grad(g, i);
      const double scale = std::max({std::abs(fd), std::abs(an), 1e-6});
      const double rel = std::abs(fd - an) / scale;
      worst = std::max(worst, rel);
      CHECK(rel < 1e-4);
    }
  };

  for (int l = 0; l < 4; ++l) {
    fd_check(
        [l](PolicyParams& p, Eigen::Index i) { return p.actor[l].W.data() + i; },
        [l](const Gradients& gr, Eigen::Index i) { return gr.dW_actor[l].data()[i]; },
        base.actor[l].W.size());
    fd_check(
        [l](PolicyParams& p, Eigen::Index i) { return p.actor[l].b.data() + i; },
        [l](const Gradients& gr, Eigen::Index i) { return gr.db_actor[l].data()[i]; },
        base.actor[l].b.size());
    fd_check(
        [l](PolicyParams& p, Eigen::Index i) { return p.critic[l].W.data() + i; },
        [l](const Gradients& gr, Eigen::Index i) { return gr.dW_critic[l].data()[i]; },
        base.critic[l].W.size());
    fd_check(
        [l](PolicyParams& p, Eigen::Index i) { return p.critic[l].b.data() + i; },
        [l](const Gradients& gr, Eigen::Index i) { return gr.db_critic[l].data()[i]; },
        base.critic[l].b.size());
  }
  fd_check([](PolicyParams& p, Eigen::Index i) { return p.log_std.data() + i; },
           [](const Gradients& gr, Eigen::Index i) { return gr.d_log_std.data()[i]; },
           base.log_std.size());
  MESSAGE("worst relative gradient error: ", worst);
}

TEST_CASE("entropy equals its closed form") {
  PolicyParams p = toy_params(4, 24, 8, 301);
  Rng rng(302);
  for (int i = 0; i < 24; ++i) p.log_std[i] = rng.uniform(-2.0, 1.0);
  double expect = 0.0;
  for (int i = 0; i < 24; ++i)
    expect += p.log_std[i] + 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  CHECK(entropy(p) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("advantage normalization hits mean zero and unit std") {
  Rng rng(401);
  VecX adv(144);
  for (Eigen::Index i = 0; i < adv.size(); ++i) adv[i] = rng.normal(3.0, 17.0);
  normalize_advantages(adv);
  const double mean = adv.mean();
  const double stddev = std::sqrt((adv.array() - mean).square().mean());
  CHECK(std::abs(mean) < 1e-6);
  CHECK(std::abs(stddev - 1.0) < 1e-6);
}

namespace {

RolloutBuffer random_buffer(const PolicyParams& p, int n_envs, int n_steps, unsigned seed) {
  Rng rng(seed);
  RolloutBuffer buf;
  buf.resize(n_envs, n_steps, p.obs_dim, p.act_dim);
  for (int t = 0; t < n_steps; ++t) {
    for (int e = 0; e < n_envs; ++e) {
      const int c = buf.col(t, e);
      for (int i = 0; i < p.obs_dim; ++i) buf.obs(i, c) = rng.normal();
      const auto [mean, value] = forward_one(p, buf.obs.col(c));
      const auto [action, lp] = sample_action(p, mean, rng);
      buf.actions.col(c) = action;
      buf.log_probs[c] = lp;
      buf.values[c] = value;
      buf.rewards[c] = rng.normal(0.1, 0.4);
      if (rng.uniform01() < 0.05) {
        buf.dones[c] = 1;
        buf.done_reasons[c] = DoneReason::kFall;
      }
    }
  }
  for (int e = 0; e < n_envs; ++e) buf.bootstrap[e] = rng.normal();
  return buf;
}

}  // namespace

TEST_CASE("ppo update is bitwise deterministic") {
  auto run = [] {
    PolicyParams p = toy_params(8, 4, 16, 501);
    const RolloutBuffer buf = random_buffer(p, 4, 16, 502);
    PpoConfig cfg;
    AdamState adam = AdamState::init(p, cfg.lr_initial);
    Rng rng(503);
    for (int it = 0; it < 3; ++it) ppo_update(p, buf, cfg, adam, rng);
    return p;
  };
  const PolicyParams a = run();
  const PolicyParams b = run();
  for (int l = 0; l < 4; ++l) {
    CHECK(std::memcmp(a.actor[l].W.data(), b.actor[l].W.data(),
                      sizeof(double) * a.actor[l].W.size()) == 0);
    CHECK(std::memcmp(a.critic[l].W.data(), b.critic[l].W.data(),
                      sizeof(double) * a.critic[l].W.size()) == 0);
  }
  CHECK(std::memcmp(a.log_std.data(), b.log_std.data(), sizeof(double) * a.log_std.size()) == 0);
}

TEST_CASE("adaptive learning rate stays inside its bounds") {
  PolicyParams p = toy_params(6, 3, 8, 601);
  PpoConfig cfg;
  AdamState adam = AdamState::init(p, cfg.lr_initial);
  Rng rng(602);
  for (int it = 0; it < 12; ++it) {
    const RolloutBuffer buf = random_buffer(p, 4, 12, 603 + it);
    const UpdateStats s = ppo_update(p, buf, cfg, adam, rng);
    CHECK(s.lr >= cfg.lr_min);
    CHECK(s.lr <= cfg.lr_max);
    CHECK(adam.lr >= cfg.lr_min);
    CHECK(adam.lr <= cfg.lr_max);
  }
  // force the boundary cases directly
  adam.lr = cfg.lr_max;
  {
    const RolloutBuffer buf = random_buffer(p, 4, 12, 699);
    ppo_update(p, buf, cfg, adam, rng);
    CHECK(adam.lr <= cfg.lr_max);
  }
  adam.lr = cfg.lr_min;
  {
    const RolloutBuffer buf = random_buffer(p, 4, 12, 700);
    ppo_update(p, buf, cfg, adam, rng);
    CHECK(adam.lr >= cfg.lr_min);
  }
}

TEST_CASE("log_std stays clamped through updates") {
  PolicyParams p = toy_params(6, 3, 8, 801);
  PpoConfig cfg;
  AdamState adam = AdamState::init(p, cfg.lr_initial);
  Rng rng(802);
  for (int it = 0; it < 8; ++it) {
    const RolloutBuffer buf = random_buffer(p, 4, 12, 810 + it);
    ppo_update(p, buf, cfg, adam, rng);
    for (int i = 0; i < p.act_dim; ++i) {
      CHECK(p.log_std[i] >= kLogStdMin - 1e-15);
      CHECK(p.log_std[i] <= kLogStdMax + 1e-15);
    }
  }
}

TEST_CASE("checkpoint round trip is bitwise exact") {
  Rng rng(901);
  const PolicyParams p = PolicyParams::init(58, 24, 128, 1.0, rng);
  PpoConfig cfg;
  const nlohmann::json doc = save_checkpoint(p, cfg, 321, 1);
  // serialize to text and parse back, as the file path does
  const Checkpoint ck = load_checkpoint(nlohmann::json::parse(doc.dump()));
  CHECK(ck.iteration == 321);
  CHECK(ck.curriculum_phase == 1);
  CHECK(ck.config.gamma == cfg.gamma);
  for (int l = 0; l < 4; ++l) {
    CHECK(std::memcmp(ck.params.actor[l].W.data(), p.actor[l].W.data(),
                      sizeof(double) * p.actor[l].W.size()) == 0);
    CHECK(std::memcmp(ck.params.actor[l].b.data(), p.actor[l].b.data(),
                      sizeof(double) * p.actor[l].b.size()) == 0);
    CHECK(std::memcmp(ck.params.critic[l].W.data(), p.critic[l].W.data(),
                      sizeof(double) * p.critic[l].W.size()) == 0);
  }
  CHECK(std::memcmp(ck.params.log_std.data(), p.log_std.data(), sizeof(double) * 24) == 0);
}

TEST_CASE("checkpoint rejects malformed documents") {
  Rng rng(902);
  const PolicyParams p = PolicyParams::init(6, 3, 8, 1.0, rng);
  PpoConfig cfg;
  nlohmann::json doc = save_checkpoint(p, cfg, 1, 0);

  nlohmann::json missing = doc;
  missing.erase("critic");
  CHECK_THROWS_WITH_AS(load_checkpoint(missing), doctest::Contains("critic"), ParseError);

  nlohmann::json bad_num = doc;
  bad_num["log_std"][1] = "not-a-number";
  CHECK_THROWS_AS(load_checkpoint(bad_num), ParseError);

  CHECK_THROWS_AS(load_checkpoint(nlohmann::json::array()), ParseError);
}

TEST_CASE("checkpoint shape mismatches name the offending layer") {
  Rng rng(903);
  const PolicyParams p = PolicyParams::init(61, 24, 16, 1.0, rng);
  PpoConfig cfg;
  nlohmann::json doc = save_checkpoint(p, cfg, 1, 0);
  // claim a different observation dim than the stored matrices have
  doc["obs_dim"] = 58;
  CHECK_THROWS_WITH_AS(load_checkpoint(doc), doctest::Contains("actor layer 0"),
                       CheckpointMismatchError);

  // a loaded 61-dim policy refuses to drive a 58-dim environment
  const Checkpoint ck = load_checkpoint(save_checkpoint(p, cfg, 1, 0));
  CHECK_THROWS_WITH_AS(check_compatible(ck.params, 58, 24), doctest::Contains("actor layer 0"),
                       CheckpointMismatchError);
  CHECK_NOTHROW(check_compatible(ck.params, 61, 24));
}

TEST_CASE("buffer-wide advantages equal per-environment gae") {
  PolicyParams p = toy_params(5, 2, 6, 1001);
  const RolloutBuffer buf = random_buffer(p, 3, 20, 1002);
  const auto [adv, ret] = compute_advantages(buf, 0.99, 0.95);
  for (int e = 0; e < 3; ++e) {
    VecX r(20), v(20);
    std::vector<std::uint8_t> d(20);
    for (int t = 0; t < 20; ++t) {
      r[t] = buf.rewards[buf.col(t, e)];
      v[t] = buf.values[buf.col(t, e)];
      d[t] = buf.dones[buf.col(t, e)];
    }
    const auto [a_ref, ret_ref] = gae(r, v, d, buf.bootstrap[e], 0.99, 0.95);
    for (int t = 0; t < 20; ++t) {
      CHECK(adv[buf.col(t, e)] == a_ref[t]);
      CHECK(ret[buf.col(t, e)] == ret_ref[t]);
    }
  }
}
