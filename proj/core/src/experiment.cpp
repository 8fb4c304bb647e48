#include "samp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "samp/error.hpp"
#include "samp/matrix_io.hpp"

namespace samp {
namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

struct TrialOutput {
  std::vector<ResultRecord> records;
  std::vector<Trajectory> trajectories;
};

TrialOutput run_trial(const ExperimentConfig& cfg, std::size_t trial) {
  TrialOutput out;
  const std::uint64_t seed = cfg.seed + trial;
  ProblemInstance problem;
  std::string setup_error;
  try {
    problem = synthesize_problem(cfg.ensemble, cfg.prior, cfg.likelihood, seed);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  if (setup_error.empty() && cfg.output.matrix_dumps)
    write_matrix_binary(cfg.output.directory / "matrices" /
                            ("trial" + std::to_string(trial) + ".bin"),
                        problem.matrix);

  for (StrategyKind kind : cfg.strategies) {
    ResultRecord r;
    r.trial = trial;
    r.seed = seed;
    r.strategy = std::string(strategy_name(kind));
    Trajectory traj;
    if (!setup_error.empty()) {
      r.status = RunStatus::Failed;
      r.message = setup_error;
      r.final_mse = r.final_nmse_db = r.residual_f1 = r.residual_f2 =
          std::numeric_limits<double>::quiet_NaN();
    } else {
      const auto t0 = std::chrono::steady_clock::now();
      RunResult res;
      try {
        res = run(problem, cfg.solver_for(kind));
      } catch (const std::exception& e) {
        res.status = RunStatus::Failed;
        res.message = e.what();
      }
      r.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      r.status = res.status;
      r.message = res.message;
      r.iterations = res.iterations;
      r.clip_events = res.clip_events;
      r.max_inner_residual = res.max_inner_residual;
      if (res.state.x_hat.size() == problem.x_true.size()) {
        r.final_mse = mse(res.state.x_hat, problem.x_true);
        r.final_nmse_db = nmse_db(res.state.x_hat, problem.x_true);
      } else {
        r.final_mse = r.final_nmse_db = std::numeric_limits<double>::quiet_NaN();
      }
      if (!res.trajectory.records.empty()) {
        r.residual_f1 = res.trajectory.records.back().residual_f1;
        r.residual_f2 = res.trajectory.records.back().residual_f2;
      } else {
        r.residual_f1 = r.residual_f2 = std::numeric_limits<double>::quiet_NaN();
      }
      if (cfg.output.state_dumps && res.state.z_hat.size() == problem.y.size())
        write_matrix_binary(cfg.output.directory / "states" /
                                ("trial" + std::to_string(trial) + "_" + r.strategy + ".bin"),
                            pack_state(res.state, problem.y));
      traj = std::move(res.trajectory);
    }
    out.records.push_back(std::move(r));
    out.trajectories.push_back(std::move(traj));
  }
  return out;
}

}  // namespace

bool ResultRecord::diverged() const {
  return status == RunStatus::Failed || !std::isfinite(final_nmse_db);
}

void write_results_csv_header(std::ostream& out) {
  out << "trial,seed,strategy,status,iterations,final_mse,final_nmse_db,clip_events,"
         "residual_f1,residual_f2,max_inner_residual\n";
}

void write_results_csv_row(std::ostream& out, const ResultRecord& r) {
  out << r.trial << ',' << r.seed << ',' << r.strategy << ',' << run_status_name(r.status) << ','
      << r.iterations << ',' << num(r.final_mse) << ',' << num(r.final_nmse_db) << ','
      << r.clip_events << ',' << num(r.residual_f1) << ',' << num(r.residual_f2) << ','
      << num(r.max_inner_residual) << '\n';
}

void write_summary_jsonl_row(std::ostream& out, const ResultRecord& r) {
  auto finite_or_null = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  nlohmann::ordered_json j;
  j["trial"] = r.trial;
  j["seed"] = r.seed;
  j["strategy"] = r.strategy;
  j["status"] = std::string(run_status_name(r.status));
  j["diverged"] = r.diverged();
  j["iterations"] = r.iterations;
  j["final_mse"] = finite_or_null(r.final_mse);
  j["final_nmse_db"] = finite_or_null(r.final_nmse_db);
  j["wall_time_s"] = r.wall_seconds;
  j["clip_events"] = r.clip_events;
  j["residual_f1"] = finite_or_null(r.residual_f1);
  j["residual_f2"] = finite_or_null(r.residual_f2);
  j["max_inner_residual"] = finite_or_null(r.max_inner_residual);
  if (!r.message.empty()) j["message"] = r.message;
  out << j.dump() << '\n';
}

void write_trajectory_csv(std::ostream& out, const Trajectory& t) {
  out << "iteration,mse,nmse_db,residual_f1,residual_f2,clip_count\n";
  for (const IterationRecord& r : t.records)
    out << r.iteration << ',' << num(r.mse) << ',' << num(r.nmse_db) << ',' << num(r.residual_f1)
        << ',' << num(r.residual_f2) << ',' << r.clip_count << '\n';
}

std::vector<ResultRecord> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  ExperimentConfig cfg = config;
  if (!options.write_outputs) cfg.output.state_dumps = cfg.output.matrix_dumps = false;
  validate(cfg.solver);
  if (cfg.trials < 1) throw ConfigError("trials: must be >= 1");
  const unsigned jobs = std::max(
      1u, std::min<unsigned>(options.jobs ? options.jobs : cfg.jobs,
                             static_cast<unsigned>(std::min<std::size_t>(cfg.trials, 1024))));

  std::ofstream results, summary;
  if (options.write_outputs) {
    fs::create_directories(cfg.output.directory);
    results = open_out(cfg.output.directory / "results.csv");
    summary = open_out(cfg.output.directory / "summary.jsonl");
    write_results_csv_header(results);
  }

  // Workers fill slots in any order; the collector writes the completed
  // prefix so output order is trial order regardless of scheduling.
  std::vector<std::optional<TrialOutput>> slots(cfg.trials);
  std::vector<ResultRecord> all;
  std::mutex mu;
  std::size_t next_to_write = 0;
  std::atomic<std::size_t> next_trial{0};
  std::exception_ptr io_error;

  auto flush_ready = [&]() {
    while (next_to_write < slots.size() && slots[next_to_write]) {
      TrialOutput& t = *slots[next_to_write];
      for (std::size_t i = 0; i < t.records.size(); ++i) {
        const ResultRecord& r = t.records[i];
        if (options.write_outputs) {
          write_results_csv_row(results, r);
          write_summary_jsonl_row(summary, r);
          results.flush();
          summary.flush();
          if (cfg.output.trajectories) {
            auto f = open_out(cfg.output.directory / "trajectories" /
                              ("trial" + std::to_string(r.trial) + "_" + r.strategy + ".csv"));
            write_trajectory_csv(f, t.trajectories[i]);
          }
        }
        all.push_back(r);
      }
      slots[next_to_write].reset();
      ++next_to_write;
    }
  };

  auto worker = [&]() {
    for (;;) {
      const std::size_t trial = next_trial.fetch_add(1);
      if (trial >= cfg.trials) return;
      TrialOutput out;
      try {
        out = run_trial(cfg, trial);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!io_error) io_error = std::current_exception();
        next_trial = cfg.trials;
        return;
      }
      std::lock_guard lock(mu);
      slots[trial] = std::move(out);
      try {
        flush_ready();
      } catch (...) {
        if (!io_error) io_error = std::current_exception();
        next_trial = cfg.trials;
        return;
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (io_error) std::rethrow_exception(io_error);
  return all;
}

std::vector<StrategySummary> compare_strategies(const std::vector<ResultRecord>& records) {
  std::vector<StrategySummary> rows;
  std::vector<std::vector<const ResultRecord*>> groups;
  for (const ResultRecord& r : records) {
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const StrategySummary& s) { return s.strategy == r.strategy; });
    if (it == rows.end()) {
      rows.push_back({});
      rows.back().strategy = r.strategy;
      groups.emplace_back();
      it = rows.end() - 1;
    }
    groups[static_cast<std::size_t>(it - rows.begin())].push_back(&r);
  }
  for (std::size_t g = 0; g < rows.size(); ++g) {
    StrategySummary& s = rows[g];
    std::vector<double> nmse, iters, res;
    for (const ResultRecord* r : groups[g]) {
      ++s.records;
      if (r->diverged()) {
        ++s.diverged;
        continue;
      }
      nmse.push_back(r->final_nmse_db);
      iters.push_back(static_cast<double>(r->iterations));
      if (std::isfinite(r->residual_f1)) res.push_back(r->residual_f1);
    }
    s.mean_nmse_db = mean(nmse);
    s.median_nmse_db = median(nmse);
    s.mean_iterations = mean(iters);
    s.median_iterations = median(iters);
    s.mean_residual_f1 = mean(res);
    s.max_residual_f1 =
        res.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::max_element(res.begin(), res.end());
    s.divergence_rate = static_cast<double>(s.diverged) / static_cast<double>(s.records);
  }
  return rows;
}

void write_comparison_table(std::ostream& out, const std::vector<StrategySummary>& rows) {
  out << "strategy,records,diverged,divergence_rate,mean_nmse_db,median_nmse_db,"
         "mean_iterations,median_iterations,mean_residual_f1,max_residual_f1\n";
  for (const StrategySummary& s : rows)
    out << s.strategy << ',' << s.records << ',' << s.diverged << ',' << num(s.divergence_rate)
        << ',' << num(s.mean_nmse_db) << ',' << num(s.median_nmse_db) << ','
        << num(s.mean_iterations) << ',' << num(s.median_iterations) << ','
        << num(s.mean_residual_f1) << ',' << num(s.max_residual_f1) << '\n';
}

}  // namespace samp
