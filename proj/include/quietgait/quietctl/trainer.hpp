#pragma once

// The training loop: vectorized rollouts feeding the clipped-surrogate
// learner, the per-iteration metrics log, periodic checkpoints, and the
// curriculum evaluation between iterations.

#include <array>
#include <functional>
#include <string>

#include "quietgait/quietctl/experiment.hpp"
#include "quietgait/quietenv/env_config.hpp"
#include "quietgait/quietenv/rewards.hpp"

namespace quietgait::quietctl {

/// One metrics-CSV row. The per-term values are means of full-episode sums
/// over a window of the most recent completed episodes (same window length
/// as the curriculum gate), so they read as "reward earned per episode".
struct MetricsRow {
  int iteration = 0;
  std::array<double, quietenv::RewardBreakdown::kNumTerms> episodic_terms{};
  double episodic_total = 0.0;
  double tracking_score = 0.0;  // curriculum running mean
  quietenv::Phase phase = quietenv::Phase::kNoisy;
  double mean_touchdown_speed = 0.0;  // m/s over this iteration's touchdowns
  double mean_episode_length = 0.0;   // s, windowed
  double lr = 0.0;
  double kl = 0.0;
};

/// The CSV header matching write_metrics_row.
std::string metrics_header();
std::string metrics_row_csv(const MetricsRow& row);

struct TrainSummary {
  int iterations = 0;           // actually run
  int flip_iteration = -1;      // iteration whose update latched quiet; -1 = never
  double final_tracking_score = 0.0;
  bool diverged = false;
  std::string metrics_path;
  std::string checkpoint_path;  // last checkpoint written
};

/// Optional per-iteration observer (progress printing).
using ProgressFn = std::function<void(const MetricsRow&)>;

/// Runs the full experiment into spec.run_dir(): writes config.json,
/// metrics.csv (one row per iteration), checkpoint_latest.json on the
/// checkpoint cadence and at the end, and summary.json. On optimizer
/// divergence the loop stops, the last written checkpoint stays untouched,
/// and the summary reports diverged = true.
TrainSummary train_experiment(const ExperimentSpec& spec, const ProgressFn& progress = {});

void save_summary(const TrainSummary& summary, const std::string& path);
TrainSummary load_summary(const std::string& path);

}  // namespace quietgait::quietctl
