#pragma once

// Walking-noise penalty metrics computed from simulated gait trajectories:
// mean foot touchdown speed, mean joint-acceleration norm, and mean base
// angular-acceleration (roll/pitch) norm, averaged over a fixed duration.
// Also synthesizes an impulse-train audio proxy from touchdown impacts so the
// spectral pipeline can run on simulated gaits.

#include <array>
#include <optional>
#include <vector>

#include "quietgait/acoustics/audio.hpp"

namespace quietgait::acoustics {

/// One control-step sample of the quantities the penalty metrics average.
struct GaitRecord {
  double time = 0.0;                              // seconds
  std::array<bool, 4> touchdown{};                // per foot, this step
  std::array<double, 4> touchdown_speed{};        // m/s, valid where touchdown
  std::array<double, 12> joint_accel{};           // rad/s^2
  std::array<double, 2> base_ang_accel_xy{};      // rad/s^2, roll/pitch rates
};

struct PenaltyMetrics {
  std::optional<double> mean_contact_speed;  // m/s; absent when no touchdowns
  double mean_joint_accel_norm = 0.0;        // rad/s^2, 12-dim Euclidean norm
  double mean_base_ang_accel_norm = 0.0;     // rad/s^2, 2-dim Euclidean norm
  double duration = 0.0;                     // seconds actually averaged
};

/// Averages over the first `duration` seconds of the trajectory. The records
/// must cover at least that long (record count times the mean step). The
/// contact metric is the mean speed over touchdown events; the acceleration
/// metrics are time-means of the per-step Euclidean norms. Results do not
/// depend on the order of the records.
PenaltyMetrics sim_penalty_metrics(const std::vector<GaitRecord>& records,
                                   double duration = 10.0);

/// Impulse train sampled at `rate`: each touchdown deposits an impulse of
/// amplitude (1/2) * (total_mass/4) * speed^2 at its time slot (kinetic energy
/// of one leg's share of the mass). Amplitudes are not clamped so the
/// quadratic speed law is exact; clamp on WAV export if needed.
AudioClip impact_proxy_signal(const std::vector<GaitRecord>& records, double rate,
                              double total_mass);

}  // namespace quietgait::acoustics
