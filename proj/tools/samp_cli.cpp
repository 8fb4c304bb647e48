// samp: run experiments, check stationary-point identities of dumped states,
// and tabulate R-transforms of a matrix.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "samp/config.hpp"
#include "samp/ensembles.hpp"
#include "samp/error.hpp"
#include "samp/experiment.hpp"
#include "samp/free_probability.hpp"
#include "samp/matrix_io.hpp"
#include "samp/oracle.hpp"

namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

int cmd_run(const std::string& config_path, const std::optional<std::uint64_t>& seed,
            const std::string& out_dir, const std::vector<std::string>& strategies,
            unsigned jobs) {
  samp::ExperimentConfig cfg = samp::parse_config(config_path);
  if (seed) {
    cfg.seed = *seed;
    cfg.ensemble.seed = *seed;
  }
  if (!out_dir.empty()) cfg.output.directory = out_dir;
  if (!strategies.empty()) {
    cfg.strategies.clear();
    for (const auto& s : strategies) {
      const auto k = samp::parse_strategy_kind(s);
      if (!k) throw samp::ConfigError("--strategy: unknown strategy '" + s + "'");
      cfg.strategies.push_back(*k);
    }
  }
  samp::RunOptions opts;
  opts.jobs = jobs;
  const auto records = samp::run_experiment(cfg, opts);
  samp::write_comparison_table(std::cout, samp::compare_strategies(records));
  std::size_t diverged = 0;
  for (const auto& r : records) diverged += r.diverged();
  if (diverged)
    std::cerr << diverged << " of " << records.size() << " runs diverged; see "
              << (cfg.output.directory / "summary.jsonl").string() << "\n";
  return 0;
}

int cmd_check(const std::string& state_path, const std::string& matrix_path,
              const std::string& config_path, double tolerance) {
  const samp::ExperimentConfig cfg = samp::parse_config(config_path);
  const Eigen::MatrixXd a = samp::read_matrix(matrix_path);
  const Eigen::MatrixXd dump = samp::read_matrix(state_path);
  if (dump.rows() != a.rows() + a.cols())
    throw samp::DimensionError("state dump has " + std::to_string(dump.rows()) +
                               " rows but the matrix implies K + N = " +
                               std::to_string(a.rows() + a.cols()));
  const samp::UnpackedState u = samp::unpack_state(dump, a.cols());
  const samp::FixedPointReport report =
      samp::check_fixed_point(u.state, a, cfg.prior, cfg.likelihood, u.y);
  const double woodbury = samp::check_woodbury(a, u.state.lambda_x, u.state.lambda_z);
  const double tau_m = samp::check_tilde_tau_m(u.state, a, cfg.likelihood, u.y);
  std::cout << samp::to_key_value(report) << "woodbury=" << num(woodbury) << '\n'
            << "tilde_tau_m=" << num(tau_m) << '\n';
  if (tolerance > 0.0 && !(report.max() <= tolerance)) {
    std::cerr << "max residual " << num(report.max()) << " exceeds " << num(tolerance) << '\n';
    return 1;
  }
  return 0;
}

double safe_r(const samp::EmpiricalSpectrum& sp, double omega) {
  const auto q = samp::r_transform_query(sp, omega);
  return q.converged ? q.value : std::nan("");
}

int cmd_spectrum(const std::string& matrix_path, const std::vector<double>& omegas,
                 double lambda_z, double lambda_x, const std::string& spectrum_out) {
  if (!(lambda_z > 0.0) || !(lambda_x > 0.0))
    throw samp::DomainError("--lambda-z and --lambda-x must be > 0");
  const Eigen::MatrixXd a = samp::read_matrix(matrix_path);
  const double alpha = static_cast<double>(a.rows()) / static_cast<double>(a.cols());
  const Eigen::MatrixXd jz = lambda_z * (a.transpose() * a);
  const Eigen::MatrixXd jx = (a * a.transpose()) / lambda_x;
  const samp::EmpiricalSpectrum sz = samp::spectrum_of_symmetric(0.5 * (jz + jz.transpose()));
  const samp::EmpiricalSpectrum sx = samp::spectrum_of_symmetric(0.5 * (jx + jx.transpose()));
  const Eigen::VectorXd lz = Eigen::VectorXd::Constant(a.rows(), lambda_z);
  const Eigen::VectorXd lx = Eigen::VectorXd::Constant(a.cols(), lambda_x);
  if (!spectrum_out.empty()) {
    std::ofstream f(spectrum_out);
    if (!f) throw std::runtime_error("cannot write " + spectrum_out);
    samp::write_spectrum_csv(f, sz);
  }
  std::cout << "omega,r_jz_numerical,r_jz_closed_form,r_jx_numerical,r_jx_closed_form\n";
  for (double w : omegas) {
    auto closed = [&](auto f, const Eigen::VectorXd& l) {
      try {
        return f(l, alpha, w);
      } catch (const samp::DomainError&) {
        return std::nan("");
      }
    };
    std::cout << num(w) << ',' << num(safe_r(sz, w)) << ',' << num(closed(samp::r_mp_jz, lz))
              << ',' << num(safe_r(sx, w)) << ',' << num(closed(samp::r_mp_jx, lx)) << '\n';
  }
  return 0;
}

int cmd_sample(const std::string& kind, Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
               double constant, const std::string& out, bool csv) {
  samp::EnsembleSpec spec;
  const auto k = samp::parse_ensemble_kind(kind);
  if (!k) throw samp::ConfigError("--kind: unknown ensemble '" + kind + "'");
  spec.kind = *k;
  spec.rows = rows;
  spec.cols = cols;
  spec.seed = seed;
  if (constant > 0.0) spec.profile = samp::ConstantProfile{constant};
  const samp::SampledMatrix m = samp::sample_matrix(spec);
  if (csv)
    samp::write_matrix_csv(out, m.matrix);
  else
    samp::write_matrix_binary(out, m.matrix);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GAMP / EP / S-AMP experiments and identity checks"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> strategies;
  unsigned jobs = 0;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the base seed");
  run->add_option("--out-dir", out_dir, "Override the output directory");
  run->add_option("--strategy", strategies, "Override the strategy list (repeatable)");
  run->add_option("--jobs", jobs, "Concurrent trials (default: config value)");

  std::string state_path, matrix_path, check_config;
  double tolerance = 0.0;
  auto* check = app.add_subcommand("check-identities",
                                   "Evaluate stationary-point identities of a state dump");
  check->add_option("state-dump", state_path, "State dump (binary or CSV)")->required()->check(CLI::ExistingFile);
  check->add_option("matrix-path", matrix_path, "Matrix A (binary or CSV)")->required()->check(CLI::ExistingFile);
  check->add_option("--config", check_config, "Config naming the prior and likelihood")->required()->check(CLI::ExistingFile);
  check->add_option("--tolerance", tolerance, "Exit non-zero when the max residual exceeds this");

  std::string spectrum_matrix, spectrum_out;
  std::vector<double> omegas;
  double lambda_z = 1.0, lambda_x = 1.0;
  auto* spectrum = app.add_subcommand(
      "spectrum", "Tabulate numerical and closed-form R-transforms of J_z = lz A^T A and J_x = A A^T / lx");
  spectrum->add_option("matrix-path", spectrum_matrix, "Matrix A (binary or CSV)")->required()->check(CLI::ExistingFile);
  spectrum->add_option("--omega", omegas, "Arguments (comma separated)")->required()->delimiter(',');
  spectrum->add_option("--lambda-z", lambda_z, "Scalar Lz");
  spectrum->add_option("--lambda-x", lambda_x, "Scalar Lx");
  spectrum->add_option("--spectrum-out", spectrum_out, "Write the J_z spectrum as CSV");

  std::string kind = "iid-gaussian", sample_out;
  Eigen::Index rows = 0, cols = 0;
  std::uint64_t sample_seed = 0;
  double constant = 0.0;
  bool csv = false;
  auto* sample = app.add_subcommand("sample-matrix", "Draw a matrix from an ensemble");
  sample->add_option("--kind", kind, "Ensemble kind");
  sample->add_option("--rows", rows, "N")->required();
  sample->add_option("--cols", cols, "K")->required();
  sample->add_option("--seed", sample_seed, "Seed");
  sample->add_option("--constant", constant, "Constant singular value (invariant kinds)");
  sample->add_option("--out", sample_out, "Output path")->required();
  sample->add_flag("--csv", csv, "Write CSV instead of binary");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, seed, out_dir, strategies, jobs);
    if (*check) return cmd_check(state_path, matrix_path, check_config, tolerance);
    if (*spectrum) return cmd_spectrum(spectrum_matrix, omegas, lambda_z, lambda_x, spectrum_out);
    if (*sample) return cmd_sample(kind, rows, cols, sample_seed, constant, sample_out, csv);
  } catch (const samp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
