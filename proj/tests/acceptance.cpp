// Acceptance gate: ten go/no-go checks, one [PASS]/[FAIL] line each.
//
// Checks 1-6 and 10 are self-contained and finish in minutes. Checks 7-9
// measure trained policies: they read run directories named
// <variant>-s<seed> (seeds 1..3) under $QUIETGAIT_RUNS_DIR, defaulting to
// "artifacts/runs". Reproduce missing runs with scripts/train_matrix.sh.
//
// The binary exits 0 only if every check passes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "quietgait/acoustics/spectrum.hpp"
#include "quietgait/common/rng.hpp"
#include "quietgait/ppolearn/checkpoint.hpp"
#include "quietgait/ppolearn/ppo.hpp"
#include "quietgait/quietctl/eval.hpp"
#include "quietgait/quietctl/experiment.hpp"
#include "quietgait/quietctl/trainer.hpp"
#include "quietgait/quietenv/env.hpp"
#include "quietgait/rigidsim/engine.hpp"

using namespace quietgait;
using namespace quietgait::rigidsim;
using namespace quietgait::ppolearn;
using namespace quietgait::quietenv;
using namespace quietgait::quietctl;

namespace {

int g_failures = 0;

void report(int index, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d. %s: %s\n", ok ? "PASS" : "FAIL", index, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. PPO loss gradients vs central finite differences on a toy net.

double total_loss(const PolicyParams& p, const Minibatch& mb, const PpoConfig& cfg) {
  const UpdateStats s = ppo_loss_and_grad(p, mb, cfg, nullptr);
  return s.policy_loss + cfg.value_loss_coef * s.value_loss - cfg.entropy_coef * s.entropy;
}

void check_gradients() {
  Rng rng(2024);
  PolicyParams p = PolicyParams::init(6, 3, 4, 0.8, rng);
  const int batch = 32;

  Minibatch mb;
  mb.obs.resize(p.obs_dim, batch);
  for (int j = 0; j < batch; ++j)
    for (int i = 0; i < p.obs_dim; ++i) mb.obs(i, j) = rng.normal();
  const EvalResult ev = forward(p, mb.obs);
  mb.actions.resize(p.act_dim, batch);
  for (int j = 0; j < batch; ++j)
    for (int i = 0; i < p.act_dim; ++i)
      mb.actions(i, j) = ev.mean(i, j) + std::exp(p.log_std[i]) * rng.normal();
  const VecX lp = log_prob(p, ev.mean, mb.actions);
  mb.old_log_prob.resize(batch);
  mb.old_value.resize(batch);
  mb.advantage.resize(batch);
  mb.ret.resize(batch);
  for (int j = 0; j < batch; ++j) {
    // keep samples away from the clip kinks so the loss is smooth at the
    // finite-difference scale
    const double off = rng.uniform(0.05, 0.25) * (rng.uniform01() < 0.5 ? 1.0 : -1.0);
    mb.old_log_prob[j] = lp[j] - off;
    mb.old_value[j] = ev.value[j] + rng.uniform(0.3, 0.8) * (j % 2 == 0 ? 1.0 : -1.0);
    mb.advantage[j] = rng.normal(0.0, 1.5);
    mb.ret[j] = ev.value[j] + rng.normal(0.0, 0.5);
  }

  Gradients g;
  ppo_loss_and_grad(p, mb, PpoConfig{}, &g);

  const PpoConfig cfg{};
  const double eps = 1e-6;
  double max_rel = 0.0;
  auto probe = [&](double* slot, double analytic) {
    const double saved = *slot;
    *slot = saved + eps;
    const double up = total_loss(p, mb, cfg);
    *slot = saved - eps;
    const double down = total_loss(p, mb, cfg);
    *slot = saved;
    const double fd = (up - down) / (2.0 * eps);
    const double rel = std::abs(analytic - fd) / std::max(1.0, std::abs(fd));
    max_rel = std::max(max_rel, rel);
  };

  for (size_t l = 0; l < p.actor.size(); ++l) {
    for (int i = 0; i < p.actor[l].W.size(); ++i)
      probe(p.actor[l].W.data() + i, g.dW_actor[l].data()[i]);
    for (int i = 0; i < p.actor[l].b.size(); ++i)
      probe(p.actor[l].b.data() + i, g.db_actor[l].data()[i]);
  }
  for (size_t l = 0; l < p.critic.size(); ++l) {
    for (int i = 0; i < p.critic[l].W.size(); ++i)
      probe(p.critic[l].W.data() + i, g.dW_critic[l].data()[i]);
    for (int i = 0; i < p.critic[l].b.size(); ++i)
      probe(p.critic[l].b.data() + i, g.db_critic[l].data()[i]);
  }
  for (int i = 0; i < p.log_std.size(); ++i)
    probe(p.log_std.data() + i, g.d_log_std.data()[i]);

  report(1, "loss gradients vs finite differences",
         max_rel < 1e-4, fmt("max relative error %.3e (tolerance 1e-4)", max_rel));
}

// ---------------------------------------------------------------------------
// 2. GAE against the brute-force double sum.

void check_gae() {
  Rng rng(7);
  double worst = 0.0;
  for (int seq = 0; seq < 1000; ++seq) {
    const int t_len = 5 + static_cast<int>(rng.uniform(0.0, 96.0));
    VecX r(t_len), v(t_len);
    std::vector<std::uint8_t> dones(static_cast<size_t>(t_len), 0);
    for (int t = 0; t < t_len; ++t) {
      r[t] = rng.normal();
      v[t] = rng.normal();
      if (rng.uniform01() < 0.08) dones[static_cast<size_t>(t)] = 1;
    }
    const double gamma = rng.uniform(0.9, 0.999);
    const double lam = rng.uniform(0.8, 1.0);
    const double bootstrap = rng.normal();
    const auto [adv, ret] = gae(r, v, dones, bootstrap, gamma, lam);

    for (int t = 0; t < t_len; ++t) {
      double expect = 0.0;
      double w = 1.0;
      for (int l = 0; t + l < t_len; ++l) {
        const int k = t + l;
        const double not_done = dones[static_cast<size_t>(k)] ? 0.0 : 1.0;
        const double v_next = (k + 1 < t_len) ? v[k + 1] : bootstrap;
        expect += w * (r[k] + gamma * v_next * not_done - v[k]);
        if (dones[static_cast<size_t>(k)]) break;
        w *= gamma * lam;
      }
      worst = std::max(worst, std::abs(adv[t] - expect) / std::max(1.0, std::abs(expect)));
      worst = std::max(worst,
                       std::abs(ret[t] - (expect + v[t])) / std::max(1.0, std::abs(expect + v[t])));
    }
  }
  report(2, "gae vs brute-force double sum",
         worst <= 1e-10, fmt("1000 sequences, worst deviation %.3e (tolerance 1e-10)", worst));
}

// ---------------------------------------------------------------------------
// 3. Physics oracles: ballistic flight, pendulum energy, stance, friction cone.

SimState standing_state(const RobotModel& m) {
  SimState s;
  s.base_position = Vec3(0, 0, m.stand_height);
  s.joint_positions = m.default_pose;
  return s;
}

void check_physics() {
  const RobotModel m = RobotModel::default_model();
  std::string detail;
  bool ok = true;

  {  // ballistic: COM follows the semi-implicit closed form
    const Engine eng(m);
    SimState s = standing_state(m);
    s.base_position = Vec3(0, 0, 3.0);
    s.base_linear_velocity = Vec3(0.3, -0.2, 2.5);
    const double dt = 0.0025;
    const Vec3 com0 = eng.com_position(s);
    const Vec3 v0 = s.base_linear_velocity;
    double max_err = 0.0;
    for (int n = 1; n <= 400; ++n) {
      s = eng.step(s, Vec12::Zero(), Terrain::flat(), dt).first;
      const double t = n * dt;
      Vec3 expect = com0 + v0 * t;
      expect.z() -= 0.5 * 9.81 * t * (t + dt);
      max_err = std::max(max_err, (eng.com_position(s) - expect).norm());
    }
    ok = ok && max_err < 1e-6;
    detail += fmt("ballistic %.2e m", max_err);
  }

  {  // passive pendulum energy drift vs a 10x-rate reference
    RobotModel pm = m;
    pm.fixed_base = true;
    for (int j = 0; j < 12; ++j) pm.locked_joints[j] = (j != 0);
    const Engine eng(pm);
    auto run = [&](double dt, int steps) {
      SimState s;
      s.base_position = Vec3(0, 0, 1.0);
      s.joint_positions = pm.default_pose;
      s.joint_positions[0] += 0.5;
      std::vector<double> energy;
      energy.reserve(static_cast<size_t>(steps));
      for (int n = 0; n < steps; ++n) {
        s = eng.step(s, Vec12::Zero(), Terrain::flat(), dt).first;
        energy.push_back(eng.mechanical_energy(s));
      }
      return energy;
    };
    const auto coarse = run(0.0025, 4000);
    const auto fine = run(0.00025, 40000);
    auto window_mean = [](const std::vector<double>& e, double lo, double hi) {
      const size_t a = static_cast<size_t>(lo * e.size());
      const size_t b = static_cast<size_t>(hi * e.size());
      double sum = 0.0;
      for (size_t i = a; i < b; ++i) sum += e[i];
      return sum / static_cast<double>(b - a);
    };
    const double scale = std::abs(window_mean(fine, 0.0, 0.2));
    const double drift =
        std::abs(window_mean(coarse, 0.8, 1.0) - window_mean(fine, 0.8, 1.0)) / scale;
    ok = ok && drift < 0.01;
    detail += fmt(", pendulum drift %.2f%%", 100.0 * drift);
  }

  {  // stance: settle then hold 5 s with <= 2 mm penetration, no contact flips
    const Engine eng(m);
    const Terrain ground = Terrain::flat(0.7);
    SimState s = standing_state(m);
    ActuatorCommand hold;
    hold.target_joint_positions = m.default_pose;
    for (int n = 0; n < 400; ++n) s = eng.step(s, eng.pd_torques(s, hold), ground, 0.0025).first;
    int flips = 0;
    double max_penetration = 0.0, worst_cone = -1.0;
    for (int n = 0; n < 2000; ++n) {
      auto [next, rep] = eng.step(s, eng.pd_torques(s, hold), ground, 0.0025);
      s = next;
      const auto feet = eng.foot_kinematics(s);
      for (int leg = 0; leg < 4; ++leg) {
        if (!rep.feet[leg].in_contact) ++flips;
        const double tangential = rep.feet[leg].contact_force.head<2>().norm();
        worst_cone = std::max(worst_cone,
                              tangential - ground.friction * rep.feet[leg].normal_force);
        max_penetration =
            std::max(max_penetration, -(feet[leg].position.z() - m.foot_radius));
      }
    }
    ok = ok && flips == 0 && max_penetration <= 0.002 && worst_cone <= 1e-9;
    detail += fmt(", stance penetration %.2f mm (%d flips)", 1000.0 * max_penetration, flips);

    // friction cone on a slippery ramp
    const double angle = 6.0 * std::numbers::pi / 180.0;
    const Terrain ramp = Terrain::ramp(angle, 0.25);
    const Vec3 nrm(-std::sin(angle), 0.0, std::cos(angle));
    SimState rs = standing_state(m);
    rs.base_position.z() = m.stand_height + 0.02;
    double worst_ramp = -1.0;
    for (int step = 0; step < 2400; ++step) {
      auto [next, rep] = eng.step(rs, eng.pd_torques(rs, hold), ramp, 0.0025);
      rs = next;
      for (const auto& f : rep.feet) {
        const double fn = f.contact_force.dot(nrm);
        const double ft = (f.contact_force - fn * nrm).norm();
        worst_ramp = std::max(worst_ramp, ft - ramp.friction * std::max(fn, 0.0));
      }
    }
    ok = ok && worst_ramp <= 1e-9;
    detail += fmt(", cone excess %.1e", std::max(worst_cone, worst_ramp));
  }

  report(3, "physics oracles", ok, detail);
}

// ---------------------------------------------------------------------------
// 4. Gain equation conformance on random commands.

void check_gain_equation() {
  const EnvConfig cfg;
  const RobotModel m = RobotModel::default_model();
  Rng rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 20000; ++trial) {
    VecX raw(EnvConfig::kActionDim);
    for (int i = 0; i < raw.size(); ++i)
      raw[i] = (trial % 7 == 0) ? rng.uniform(-50.0, 50.0) : rng.normal(0.0, 2.0);
    const ActuatorCommand cmd = apply_action(cfg, m, raw);
    Vec12 p_gain, d_gain;
    Engine::pd_gains(cmd.gain_scale_inputs, p_gain, d_gain);
    for (int i = 0; i < 12; ++i) {
      const double sig = 1.0 / (1.0 + std::exp(-cmd.gain_scale_inputs[i]));
      worst = std::max(worst, std::abs(p_gain[i] - (3.0 + 4.0 * sig)));
      worst = std::max(worst, std::abs(d_gain[i] - (0.03 + 0.02 * sig)));
    }
  }
  report(4, "adaptive gain equation", worst <= 1e-12,
         fmt("20000 random commands, worst deviation %.3e (tolerance 1e-12)", worst));
}

// ---------------------------------------------------------------------------
// 5. Spectral pipeline: tone power, naive-DFT oracle, reference convention.

std::vector<double> naive_welch(const std::vector<double>& x, int window, double overlap) {
  const int advance = std::max(1, static_cast<int>(window * (1.0 - overlap)));
  const int n_seg = (static_cast<int>(x.size()) - window) / advance + 1;
  std::vector<double> w(static_cast<size_t>(window));
  for (int i = 0; i < window; ++i)
    w[static_cast<size_t>(i)] =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (window - 1));
  double wss = 0.0;
  for (double v : w) wss += v * v;
  std::vector<double> psd(static_cast<size_t>(window / 2 + 1), 0.0);
  for (int seg = 0; seg < n_seg; ++seg) {
    std::vector<std::complex<double>> spec(static_cast<size_t>(window));
    for (int k = 0; k < window; ++k) {
      std::complex<double> acc(0.0, 0.0);
      for (int i = 0; i < window; ++i) {
        const double ang = -2.0 * std::numbers::pi * k * i / window;
        acc += x[static_cast<size_t>(seg * advance + i)] * w[static_cast<size_t>(i)] *
               std::complex<double>(std::cos(ang), std::sin(ang));
      }
      spec[static_cast<size_t>(k)] = acc;
    }
    for (int k = 0; k <= window / 2; ++k) {
      const double mag2 = std::norm(spec[static_cast<size_t>(k)]);
      const double one_sided = (k == 0 || k == window / 2) ? 1.0 : 2.0;
      psd[static_cast<size_t>(k)] += one_sided * mag2 / (wss * window);
    }
  }
  for (double& v : psd) v /= n_seg;
  return psd;
}

void check_spectral() {
  bool ok = true;
  std::string detail;

  {  // unit-amplitude tone at bin 85 of 4096 at 48 kHz: band power within 0.5 dB
    acoustics::AudioClip clip;
    clip.sample_rate = 48000.0;
    clip.samples.resize(4096);
    for (int i = 0; i < 4096; ++i)
      clip.samples[static_cast<size_t>(i)] =
          std::cos(2.0 * std::numbers::pi * 85.0 * i / 4096.0);
    const auto rep = acoustics::welch_psd(clip);
    const double db_err = std::abs(10.0 * std::log10(rep.psd[85] / 0.5));
    ok = ok && db_err < 0.5;
    detail += fmt("tone %.3f dB", db_err);
  }

  {  // Welch equals a naive-DFT mirror on a random multi-segment signal
    Rng rng(31);
    acoustics::AudioClip clip;
    clip.sample_rate = 8000.0;
    clip.samples.resize(1024);
    for (auto& s : clip.samples) s = rng.uniform(-1.0, 1.0);
    const auto rep = acoustics::welch_psd(clip, 512, 0.5);
    const auto oracle = naive_welch(clip.samples, 512, 0.5);
    double worst = 0.0;
    for (size_t k = 0; k < oracle.size(); ++k)
      worst = std::max(worst,
                       std::abs(rep.psd[k] - oracle[k]) / std::max(oracle[k], 1e-12));
    ok = ok && worst < 1e-6;
    detail += fmt(", welch vs dft %.2e", worst);
  }

  {  // the 1e-10-amplitude reference tone defines 0 dB
    acoustics::AudioClip clip;
    clip.sample_rate = 48000.0;
    clip.samples.resize(4096);
    for (int i = 0; i < 4096; ++i)
      clip.samples[static_cast<size_t>(i)] =
          1e-10 * std::cos(2.0 * std::numbers::pi * 85.0 * i / 4096.0);
    const double db = acoustics::band_power_db(acoustics::welch_psd(clip), 990.0, 1000.0);
    ok = ok && std::abs(db) < 0.5;
    detail += fmt(", reference %.3f dB", db);
  }

  report(5, "spectral pipeline", ok, detail);
}

// ---------------------------------------------------------------------------
// 6. Curriculum latch: flips exactly once, at the first crossing.

void check_latch() {
  bool ok = true;
  std::string detail;

  {  // ramped scores: find the first crossing independently, compare
    CurriculumLatch latch;
    int flips = 0, flip_at = -1;
    int expect_at = -1;
    std::deque<double> mirror;
    for (int i = 0; i < 800; ++i) {
      const double score = 0.005 * i;
      latch.record(score);
      mirror.push_back(score);
      if (static_cast<int>(mirror.size()) > latch.window) mirror.pop_front();
      double mean = 0.0;
      for (double v : mirror) mean += v;
      mean /= static_cast<double>(mirror.size());
      const bool was_quiet = latch.quiet;
      curriculum_update(latch, 1.5);
      if (!was_quiet && latch.quiet) {
        ++flips;
        flip_at = i;
      }
      if (expect_at < 0 && mean > 1.5) expect_at = i;
    }
    ok = ok && flips == 1 && flip_at == expect_at;
    detail += fmt("ramp flips %d at %d (expected %d)", flips, flip_at, expect_at);
  }

  {  // oscillating scores that re-cross downward: still exactly one flip
    CurriculumLatch latch;
    Rng rng(5);
    int flips = 0;
    for (int i = 0; i < 3000; ++i) {
      latch.record(i < 600 ? rng.uniform(0.0, 1.0)
                           : (i < 1200 ? rng.uniform(1.4, 2.0) : rng.uniform(0.0, 0.4)));
      const bool was_quiet = latch.quiet;
      curriculum_update(latch, 1.5);
      if (!was_quiet && latch.quiet) ++flips;
      if (latch.quiet && was_quiet) ok = ok && latch.quiet;  // never reverts
    }
    ok = ok && flips == 1 && latch.quiet;
    detail += fmt(", noisy stream flips %d and holds", flips);
  }

  report(6, "curriculum latch", ok, detail);
}

// ---------------------------------------------------------------------------
// 7-9. Trained-policy criteria.

struct TrainedRun {
  NamedPolicy policy;
  TrainSummary summary;
};

std::string runs_root() {
  const char* env = std::getenv("QUIETGAIT_RUNS_DIR");
  return env != nullptr && *env != '\0' ? env : "artifacts/runs";
}

bool load_matrix(const std::string& variant, std::vector<TrainedRun>& out, std::string& missing) {
  out.clear();
  for (int seed = 1; seed <= 3; ++seed) {
    const std::string dir = runs_root() + "/" + variant + "-s" + std::to_string(seed);
    if (!std::filesystem::exists(dir + "/checkpoint_latest.json")) {
      missing += (missing.empty() ? "" : ", ") + dir;
      continue;
    }
    TrainedRun run;
    run.policy = load_run(dir);
    run.summary = load_summary(dir + "/summary.json");
    out.push_back(std::move(run));
  }
  return out.size() == 3;
}

double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

EvalOptions matrix_eval_options() {
  EvalOptions opt;
  opt.n_episodes = 10;
  opt.command = Vec3(0.2, 0.0, 0.0);
  opt.seed = 4242;
  return opt;
}

EvalReport eval_run(const TrainedRun& run) {
  return evaluate_policy(run.policy.params, run.policy.env,
                         RobotModel::default_model(), matrix_eval_options());
}

void check_training(const std::vector<TrainedRun>& proposed, bool loaded,
                    const std::string& missing, std::vector<EvalReport>& proposed_reports) {
  if (!loaded) {
    report(7, "desk-scale training", false, "missing runs: " + missing);
    return;
  }
  int flipped = 0;
  std::vector<double> successes;
  std::string per_seed;
  for (const auto& run : proposed) {
    if (run.summary.flip_iteration > 0 && run.summary.flip_iteration <= 3000) ++flipped;
    const EvalReport rep = eval_run(run);
    proposed_reports.push_back(rep);
    int walk_success = 0;
    for (const auto& ep : rep.episodes)
      if (ep.reason == DoneReason::kTimeout && ep.forward_distance >= 0.5) ++walk_success;
    successes.push_back(walk_success);
    per_seed += fmt(" %d/10", walk_success);
  }
  const bool ok = flipped >= 2 && median3(successes) >= 8.0;
  report(7, "desk-scale training", ok,
         fmt("phase flips %d/3, walk successes%s (median %.0f, need >= 8)", flipped,
             per_seed.c_str(), median3(successes)));
}

void check_quietness(const std::vector<EvalReport>& proposed,
                     const std::vector<TrainedRun>& baseline, bool loaded,
                     const std::string& missing, std::vector<EvalReport>& baseline_reports) {
  if (!loaded || proposed.empty()) {
    report(8, "quietness ordering", false,
           proposed.empty() ? "skipped: criterion 7 runs unavailable" : "missing runs: " + missing);
    return;
  }
  std::vector<double> p_td, p_ja, p_ba, b_td, b_ja, b_ba;
  for (const auto& rep : proposed) {
    p_td.push_back(rep.mean_touchdown_speed);
    p_ja.push_back(rep.mean_joint_accel);
    p_ba.push_back(rep.mean_base_ang_accel);
  }
  for (const auto& run : baseline) {
    const EvalReport rep = eval_run(run);
    baseline_reports.push_back(rep);
    b_td.push_back(rep.mean_touchdown_speed);
    b_ja.push_back(rep.mean_joint_accel);
    b_ba.push_back(rep.mean_base_ang_accel);
  }
  const double td_ratio = median3(p_td) / median3(b_td);
  const bool ok = td_ratio <= 0.6 && median3(p_ja) < median3(b_ja) &&
                  median3(p_ba) < median3(b_ba);
  report(8, "quietness ordering", ok,
         fmt("touchdown %.3f vs %.3f m/s (ratio %.2f, need <= 0.60), joint accel %.1f vs %.1f, "
             "base accel %.1f vs %.1f",
             median3(p_td), median3(b_td), td_ratio, median3(p_ja), median3(b_ja),
             median3(p_ba), median3(b_ba)));
}

double max_successful_slope(const TrainedRun& run, const std::vector<double>& angles) {
  EvalOptions opt = matrix_eval_options();
  opt.n_episodes = 3;
  const auto rows = sweep_slope(run.policy.params, run.policy.env,
                                RobotModel::default_model(), angles, opt);
  double best = -1.0;
  for (const auto& row : rows)
    if (row.successes * 2 > row.episodes) best = std::max(best, row.angle_deg);
  return best;
}

void check_ablations(const std::vector<EvalReport>& proposed_reports,
                     const std::vector<TrainedRun>& proposed,
                     const std::vector<EvalReport>& baseline_reports) {
  std::vector<TrainedRun> fixed_pd, ncq, drh;
  std::string missing;
  const bool l1 = load_matrix("fixed-pd", fixed_pd, missing);
  const bool l2 = load_matrix("no-curriculum-quiet", ncq, missing);
  const bool l3 = load_matrix("more-dr-height", drh, missing);
  if (!l1 || !l2 || !l3 || proposed_reports.empty() || baseline_reports.empty()) {
    report(9, "ablation orderings", false,
           !missing.empty() ? "missing runs: " + missing
                            : "skipped: criterion 7/8 runs unavailable");
    return;
  }

  std::vector<double> p_td, b_td, f_td;
  for (const auto& rep : proposed_reports) p_td.push_back(rep.mean_touchdown_speed);
  for (const auto& rep : baseline_reports) b_td.push_back(rep.mean_touchdown_speed);
  for (const auto& run : fixed_pd) f_td.push_back(eval_run(run).mean_touchdown_speed);
  const bool fixed_ok = median3(f_td) >= median3(p_td);

  std::vector<double> ncq_track;
  for (const auto& run : ncq) ncq_track.push_back(run.summary.final_tracking_score);
  const bool ncq_ok = median3(ncq_track) < 0.5;

  const std::vector<double> angles = {0.0, 2.0, 4.0, 6.0, 8.0, 10.0};
  std::vector<double> drh_slope, p_slope, drh_td;
  for (const auto& run : drh) {
    drh_slope.push_back(max_successful_slope(run, angles));
    drh_td.push_back(eval_run(run).mean_touchdown_speed);
  }
  for (const auto& run : proposed) p_slope.push_back(max_successful_slope(run, angles));
  const bool drh_ok =
      median3(drh_slope) > median3(p_slope) && median3(drh_td) < median3(b_td);

  report(9, "ablation orderings", fixed_ok && ncq_ok && drh_ok,
         fmt("fixed-pd touchdown %.3f vs proposed %.3f (need >=); no-curriculum-quiet tracking "
             "%.3f (need < 0.5); slopes %.0f deg vs %.0f deg with touchdown %.3f vs baseline "
             "%.3f",
             median3(f_td), median3(p_td), median3(ncq_track), median3(drh_slope),
             median3(p_slope), median3(drh_td), median3(b_td)));
}

// ---------------------------------------------------------------------------
// 10. Determinism: twin smoke runs produce identical metrics bytes.

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "quietgait-acceptance";
  fs::remove_all(root);
  std::string csv[2];
  for (int rep = 0; rep < 2; ++rep) {
    ExperimentSpec spec;
    spec.run_name = "twin-" + std::to_string(rep);
    spec.seed = 4242;
    spec.n_envs = 8;
    spec.n_iterations = 10;
    spec.checkpoint_every = 10;
    spec.out_dir = (root / "runs").string();
    apply_variant(spec.variant, spec.env);
    train_experiment(spec);
    csv[rep] = read_file(spec.run_dir() + "/metrics.csv");
  }
  const bool ok = !csv[0].empty() && csv[0] == csv[1];
  report(10, "determinism", ok,
         fmt("twin 8-env/10-iteration runs, %zu metric bytes %s", csv[0].size(),
             ok ? "identical" : "DIFFER"));
  fs::remove_all(root);
}

}  // namespace

int main() {
  std::printf("acceptance gate (runs dir: %s)\n", runs_root().c_str());
  check_gradients();
  check_gae();
  check_physics();
  check_gain_equation();
  check_spectral();
  check_latch();

  std::vector<TrainedRun> proposed, baseline;
  std::vector<EvalReport> proposed_reports, baseline_reports;
  std::string missing_p, missing_b;
  const bool loaded_p = load_matrix("proposed", proposed, missing_p);
  const bool loaded_b = load_matrix("baseline", baseline, missing_b);
  check_training(proposed, loaded_p, missing_p, proposed_reports);
  check_quietness(proposed_reports, baseline, loaded_b, missing_b, baseline_reports);
  check_ablations(proposed_reports, proposed, baseline_reports);

  check_determinism();

  std::printf("%d/10 criteria passed\n", 10 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
