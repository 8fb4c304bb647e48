#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "samp/channels.hpp"
#include "samp/rng.hpp"

namespace samp {

enum class EnsembleKind { IidGaussian, RightInvariant, LeftInvariant, BiInvariant, RowOrthogonal };

std::string_view ensemble_name(EnsembleKind kind);
std::optional<EnsembleKind> parse_ensemble_kind(std::string_view name);

/// Singular values of an iid N(0, 1/N) matrix of the same shape.
struct MarchenkoPasturProfile {};
struct ConstantProfile {
  double value = 1.0;
};
struct ListProfile {
  std::vector<double> values;
};
using SingularValueProfile = std::variant<MarchenkoPasturProfile, ConstantProfile, ListProfile>;

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::IidGaussian;
  Eigen::Index rows = 1;  // N
  Eigen::Index cols = 1;  // K
  SingularValueProfile profile = MarchenkoPasturProfile{};
  std::uint64_t seed = 0;

  double alpha() const { return static_cast<double>(rows) / static_cast<double>(cols); }
};

void validate(const EnsembleSpec& spec);

/// A = U * D * V with D = diag(singular_values) padded to N x K. For the
/// invariant kinds all three factors are retained; for iid matrices the
/// factors are empty and singular values are only filled on request.
struct SampledMatrix {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd left;   // U, N x N
  Eigen::MatrixXd right;  // V, K x K

  bool has_factors() const { return left.size() > 0 && right.size() > 0; }
};

/// Haar-distributed T x T orthogonal matrix (QR of an iid Gaussian matrix with
/// the signs of diag(R) folded into Q).
Eigen::MatrixXd haar_orthogonal(Eigen::Index size, Rng& rng);
Eigen::MatrixXd haar_orthogonal(Eigen::Index size, std::uint64_t seed);

SampledMatrix sample_matrix(const EnsembleSpec& spec);
SampledMatrix sample_matrix(const EnsembleSpec& spec, Rng& rng);

/// Eigenvalues of A^T A (K of them) from the retained singular values, or from
/// a symmetric eigendecomposition when the matrix is iid.
Eigen::VectorXd gram_eigenvalues(const SampledMatrix& sampled);
/// Eigenvalues of A A^T (N of them).
Eigen::VectorXd cogram_eigenvalues(const SampledMatrix& sampled);

struct ProblemInstance {
  Eigen::MatrixXd matrix;  // A
  Eigen::VectorXd singular_values;
  Eigen::VectorXd x_true;
  Eigen::VectorXd z_true;
  Eigen::VectorXd y;
  ChannelModel prior;
  ChannelModel likelihood;
  EnsembleSpec ensemble;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
};

/// Draws A from the ensemble (stream "matrix"), x from the prior ("signal")
/// and y from the likelihood at z = A x ("noise"), all derived from `seed`.
ProblemInstance synthesize_problem(const EnsembleSpec& spec, const ChannelModel& prior,
                                   const ChannelModel& likelihood, std::uint64_t seed);

}  // namespace samp
