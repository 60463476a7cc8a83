#include "quietgait/acoustics/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "quietgait/common/error.hpp"

namespace quietgait::acoustics {

namespace {

void time_bounds(const std::vector<GaitRecord>& records, double& t_min, double& t_max) {
  t_min = std::numeric_limits<double>::infinity();
  t_max = -std::numeric_limits<double>::infinity();
  for (const GaitRecord& r : records) {
    t_min = std::min(t_min, r.time);
    t_max = std::max(t_max, r.time);
  }
}

}  // namespace

PenaltyMetrics sim_penalty_metrics(const std::vector<GaitRecord>& records, double duration) {
  if (!(duration > 0.0)) throw InvalidInputError("sim_penalty_metrics: duration must be positive");
  if (records.size() < 2)
    throw InvalidInputError("sim_penalty_metrics: need at least two trajectory records");

  double t0 = 0.0, t1 = 0.0;
  time_bounds(records, t0, t1);
  // records sample control intervals, so n records spanning [t0, t1] cover
  // (t1 - t0) * n / (n - 1) seconds of trajectory
  const double n = static_cast<double>(records.size());
  const double coverage = (t1 - t0) * n / (n - 1.0);
  if (coverage + 1e-9 < duration)
    throw InvalidInputError("sim_penalty_metrics: trajectory covers " + std::to_string(coverage) +
                            " s, shorter than the requested " + std::to_string(duration) + " s");

  double joint_sum = 0.0, base_sum = 0.0;
  long steps = 0;
  double speed_sum = 0.0;
  long touchdowns = 0;
  for (const GaitRecord& r : records) {
    if (r.time - t0 >= duration - 1e-12) continue;
    double jq = 0.0;
    for (double a : r.joint_accel) jq += a * a;
    joint_sum += std::sqrt(jq);
    base_sum += std::hypot(r.base_ang_accel_xy[0], r.base_ang_accel_xy[1]);
    ++steps;
    for (int leg = 0; leg < 4; ++leg) {
      if (r.touchdown[leg]) {
        speed_sum += r.touchdown_speed[leg];
        ++touchdowns;
      }
    }
  }
  if (steps == 0) throw InvalidInputError("sim_penalty_metrics: no records inside the window");

  PenaltyMetrics out;
  out.duration = duration;
  out.mean_joint_accel_norm = joint_sum / steps;
  out.mean_base_ang_accel_norm = base_sum / steps;
  if (touchdowns > 0) out.mean_contact_speed = speed_sum / touchdowns;
  return out;
}

AudioClip impact_proxy_signal(const std::vector<GaitRecord>& records, double rate,
                              double total_mass) {
  if (!(rate > 0.0)) throw InvalidInputError("impact_proxy_signal: rate must be positive");
  if (!(total_mass > 0.0))
    throw InvalidInputError("impact_proxy_signal: total mass must be positive");

  AudioClip clip;
  clip.sample_rate = rate;
  if (records.empty()) return clip;

  double t0 = 0.0, t1 = 0.0;
  time_bounds(records, t0, t1);
  const auto length = static_cast<std::size_t>(std::lround((t1 - t0) * rate)) + 1;
  clip.samples.assign(length, 0.0);

  const double m_eff = total_mass / 4.0;
  for (const GaitRecord& r : records) {
    const auto idx = static_cast<std::size_t>(std::lround((r.time - t0) * rate));
    for (int leg = 0; leg < 4; ++leg) {
      if (r.touchdown[leg]) {
        const double v = r.touchdown_speed[leg];
        clip.samples[idx] += 0.5 * m_eff * v * v;
      }
    }
  }
  return clip;
}

}  // namespace quietgait::acoustics
