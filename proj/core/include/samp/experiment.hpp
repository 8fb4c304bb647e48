#pragma once

// Runs the trials x strategies grid of an experiment config and writes
//
//   <out>/results.csv                 one row per (trial, strategy)
//   <out>/summary.jsonl               same records plus wall time, one JSON object per line
//   <out>/trajectories/trial<T>_<strategy>.csv
//   <out>/states/trial<T>_<strategy>.bin, <out>/matrices/trial<T>.bin   (optional)
//
// Everything except summary.jsonl is a deterministic function of the config.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "samp/config.hpp"
#include "samp/solvers.hpp"

namespace samp {

struct ResultRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string strategy;
  RunStatus status = RunStatus::Failed;
  std::size_t iterations = 0;
  double final_mse = 0.0;
  double final_nmse_db = 0.0;
  double wall_seconds = 0.0;
  std::size_t clip_events = 0;
  double residual_f1 = 0.0;
  double residual_f2 = 0.0;
  double max_inner_residual = 0.0;
  std::string message;

  /// Failed run or non-finite NMSE.
  bool diverged() const;
};

struct RunOptions {
  bool write_outputs = true;
  unsigned jobs = 0;  // 0: use the config's value
};

/// Trial t uses seed config.seed + t. Per-trial failures are recorded, not thrown.
/// Records are returned (and written) ordered by trial, then by strategy order.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& config,
                                         const RunOptions& options = {});

struct StrategySummary {
  std::string strategy;
  std::size_t records = 0;
  std::size_t diverged = 0;
  double mean_nmse_db = 0.0;    // over non-diverged records; NaN if none
  double median_nmse_db = 0.0;
  double mean_iterations = 0.0;
  double median_iterations = 0.0;
  double mean_residual_f1 = 0.0;
  double max_residual_f1 = 0.0;
  double divergence_rate = 0.0;
};

/// One row per strategy in first-appearance order.
std::vector<StrategySummary> compare_strategies(const std::vector<ResultRecord>& records);

void write_results_csv_header(std::ostream& out);
void write_results_csv_row(std::ostream& out, const ResultRecord& record);
void write_summary_jsonl_row(std::ostream& out, const ResultRecord& record);
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
void write_comparison_table(std::ostream& out, const std::vector<StrategySummary>& rows);

}  // namespace samp
