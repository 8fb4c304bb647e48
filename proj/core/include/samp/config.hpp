#pragma once

// Experiment configuration, stored as strict JSON. Every object rejects keys
// it does not know, with a suggestion for near misses.
//
//   {
//     "schema_version": 1,
//     "ensemble":   {"kind": "iid-gaussian", "N": 200, "K": 100,
//                    "singular_values": "marchenko-pastur" | {"constant": c} | [s1, ...]},
//     "prior":      {"name": "bernoulli-gaussian", "sparsity": 0.1, "mean": 0, "variance": 1},
//     "likelihood": {"name": "awgn", "noise_variance": 0.01},
//     "solver":     {"strategies": ["gamp-full", "exact-ep"], "max_iterations": 500,
//                    "tolerance": 1e-8, "damping": 0.7, "precision_floor": 1e-8,
//                    "covariance_sign": "plus", "inner_tolerance": 1e-10,
//                    "inner_max_iterations": 500,
//                    "samp": {"r_jz": "closed-form-mp", "r_jx": {"constant": 2.0}}},
//     "trials": 1,
//     "seed": 0,
//     "jobs": 1,
//     "output": {"directory": "out", "trajectories": true, "state_dumps": false,
//                "matrix_dumps": false}
//   }
//
// Only "ensemble", "prior" and "likelihood" are required.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "samp/channels.hpp"
#include "samp/ensembles.hpp"
#include "samp/solvers.hpp"

namespace samp {

inline constexpr int kSchemaVersion = 1;

struct OutputSpec {
  std::filesystem::path directory = "out";
  bool trajectories = true;
  bool state_dumps = false;
  bool matrix_dumps = false;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  EnsembleSpec ensemble;
  ChannelModel prior = GaussianPrior{};
  ChannelModel likelihood = AwgnLikelihood{};
  SolverConfig solver;  // solver.strategy holds the shared strategy parameters
  std::vector<StrategyKind> strategies = {StrategyKind::GampFull};
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  OutputSpec output;

  /// solver with strategy.kind replaced by `kind`.
  SolverConfig solver_for(StrategyKind kind) const;
};

/// Throws ConfigError with "<source>:<line>:<column>" for syntax errors and
/// the dotted key path for validation errors.
ExperimentConfig parse_config_text(std::string_view text, std::string_view source = "<config>");
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Closest candidate by edit distance, or "" when nothing is close.
std::string suggest_key(std::string_view key, const std::vector<std::string_view>& candidates);

}  // namespace samp
