#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfwalk/config.hpp"
#include "mfwalk/simulator.hpp"

namespace mfw {

struct SweepConfig {
  std::vector<std::int64_t> n_list;
  std::vector<double> delta_grid;
  std::vector<double> lambda_grid;
  double horizon = 20'000.0;
  std::int64_t replicates = 1;
  std::uint64_t seed = 0;
  RecurrenceThresholds thresholds;
  std::int64_t max_events = 100'000'000;
  /// Empty: rows are returned but not written.
  std::string output;
  /// 0: MFW_WORKERS from the environment, else the hardware concurrency.
  std::int64_t workers = 0;

  /// Keys: n, delta, lambda (lists or start:stop:step ranges), horizon,
  /// replicates, seed, slope_threshold, t_threshold, return_threshold,
  /// burn_in, grid_points, max_events, output.
  static SweepConfig from_config(const KeyValueConfig& cfg);
  void validate() const;
};

struct SweepRow {
  std::int64_t n = 0;
  double delta = 0.0;
  double lambda = 0.0;
  /// Majority verdict over replicates; ties are inconclusive.
  Verdict verdict = Verdict::Inconclusive;
  double slope = 0.0;    // mean over replicates
  double returns = 0.0;  // mean over replicates
  double bound_transient_below = 0.0;  // (1 + eps_N) 2 delta
  double bound_ergodic_above = 0.0;    // 12 delta + 8 delta^2
  double conjectured_critical = 0.0;
  double continuum_critical = 0.0;
  /// Budget or numerical failure of this point; empty on success.
  std::string error;
};

/// Worker count from MFW_WORKERS, falling back to the hardware concurrency.
std::int64_t default_workers();

/// One row per (n, delta, lambda), sorted in that order. The output file
/// is opened before any simulation so that an unwritable path fails fast
/// with IoError; failures of single points are recorded in their rows.
std::vector<SweepRow> run_sweep(const SweepConfig& config);

void write_sweep_csv(const std::vector<SweepRow>& rows, const SweepConfig& config,
                     const std::string& path);

}  // namespace mfw
