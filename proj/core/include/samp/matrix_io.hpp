#pragma once

// Dense matrix and solver-state files.
//
// Binary layout (little-endian):
//   bytes 0-7   magic "SAMPMAT\0"
//   bytes 8-11  rows (uint32)
//   bytes 12-15 cols (uint32)
//   then rows*cols float64 values, row-major.
//
// CSV: one matrix row per line, comma separated, no header.

#include <filesystem>

#include <Eigen/Dense>

#include "samp/solvers.hpp"

namespace samp {

void write_matrix_binary(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_binary(const std::filesystem::path& path);

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Binary when the file starts with the magic, CSV otherwise.
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

/// State dump: a (K + N) x 8 matrix whose first K rows describe x and last N
/// rows describe z, with columns
///   s_hat, kappa, tilt, lambda, gamma, rho, m, y
/// (m and y are zero on the x rows).
inline constexpr int kStateDumpColumns = 8;

Eigen::MatrixXd pack_state(const EpState& state, const Eigen::VectorXd& y);

struct UnpackedState {
  EpState state;
  Eigen::VectorXd y;
};

/// `cols` is K, the number of x rows.
UnpackedState unpack_state(const Eigen::MatrixXd& dump, Eigen::Index cols);

}  // namespace samp
