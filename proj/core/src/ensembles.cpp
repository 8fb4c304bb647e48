#include "samp/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "samp/error.hpp"

namespace samp {
namespace {

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  Eigen::MatrixXd g(rows, cols);
  // Row-major fill order so the stream layout is independent of storage order.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = stddev * rng.normal();
  return g;
}

Eigen::VectorXd profile_values(const EnsembleSpec& spec, Rng& rng) {
  const Eigen::Index r = std::min(spec.rows, spec.cols);
  if (spec.kind == EnsembleKind::RowOrthogonal) return Eigen::VectorXd::Ones(r);
  if (const auto* c = std::get_if<ConstantProfile>(&spec.profile))
    return Eigen::VectorXd::Constant(r, c->value);
  if (const auto* l = std::get_if<ListProfile>(&spec.profile))
    return Eigen::Map<const Eigen::VectorXd>(l->values.data(),
                                             static_cast<Eigen::Index>(l->values.size()));
  const Eigen::MatrixXd g =
      gaussian_matrix(spec.rows, spec.cols, 1.0 / std::sqrt(static_cast<double>(spec.rows)), rng);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(g);
  return svd.singularValues();
}

}  // namespace

std::string_view ensemble_name(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::IidGaussian: return "iid-gaussian";
    case EnsembleKind::RightInvariant: return "right-invariant";
    case EnsembleKind::LeftInvariant: return "left-invariant";
    case EnsembleKind::BiInvariant: return "bi-invariant";
    case EnsembleKind::RowOrthogonal: return "row-orthogonal";
  }
  return "unknown";
}

std::optional<EnsembleKind> parse_ensemble_kind(std::string_view name) {
  for (auto k : {EnsembleKind::IidGaussian, EnsembleKind::RightInvariant,
                 EnsembleKind::LeftInvariant, EnsembleKind::BiInvariant,
                 EnsembleKind::RowOrthogonal})
    if (ensemble_name(k) == name) return k;
  return std::nullopt;
}

void validate(const EnsembleSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1)
    throw DomainError("ensemble: dimensions must be positive, got N=" +
                      std::to_string(spec.rows) + ", K=" + std::to_string(spec.cols));
  if (spec.kind == EnsembleKind::RowOrthogonal && spec.rows > spec.cols)
    throw DomainError("ensemble: row-orthogonal requires N <= K, got N=" +
                      std::to_string(spec.rows) + ", K=" + std::to_string(spec.cols));
  if (const auto* l = std::get_if<ListProfile>(&spec.profile)) {
    const auto r = static_cast<std::size_t>(std::min(spec.rows, spec.cols));
    if (spec.kind != EnsembleKind::IidGaussian && spec.kind != EnsembleKind::RowOrthogonal &&
        l->values.size() != r)
      throw DomainError("ensemble: singular-value list needs " + std::to_string(r) +
                        " entries, got " + std::to_string(l->values.size()));
    for (double v : l->values)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw DomainError("ensemble: singular values must be finite and >= 0");
  }
  if (const auto* c = std::get_if<ConstantProfile>(&spec.profile))
    if (!(c->value >= 0.0) || !std::isfinite(c->value))
      throw DomainError("ensemble: constant singular value must be finite and >= 0");
}

Eigen::MatrixXd haar_orthogonal(Eigen::Index size, Rng& rng) {
  if (size < 1) throw DomainError("haar_orthogonal: size must be >= 1");
  const Eigen::MatrixXd g = gaussian_matrix(size, size, 1.0, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < size; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

Eigen::MatrixXd haar_orthogonal(Eigen::Index size, std::uint64_t seed) {
  Rng rng(seed);
  return haar_orthogonal(size, rng);
}

SampledMatrix sample_matrix(const EnsembleSpec& spec) {
  Rng rng(spec.seed);
  return sample_matrix(spec, rng);
}

SampledMatrix sample_matrix(const EnsembleSpec& spec, Rng& rng) {
  validate(spec);
  const Eigen::Index n = spec.rows, k = spec.cols;
  SampledMatrix out;
  if (spec.kind == EnsembleKind::IidGaussian) {
    out.matrix = gaussian_matrix(n, k, 1.0 / std::sqrt(static_cast<double>(n)), rng);
    return out;
  }

  out.singular_values = profile_values(spec, rng);
  const bool haar_left =
      spec.kind == EnsembleKind::LeftInvariant || spec.kind == EnsembleKind::BiInvariant;
  const bool haar_right = spec.kind != EnsembleKind::LeftInvariant;
  out.left = haar_left ? haar_orthogonal(n, rng) : Eigen::MatrixXd::Identity(n, n);
  out.right = haar_right ? haar_orthogonal(k, rng) : Eigen::MatrixXd::Identity(k, k);

  // U * D * V touches only the leading min(N, K) columns of U / rows of V.
  const Eigen::Index r = out.singular_values.size();
  out.matrix = out.left.leftCols(r) * out.singular_values.asDiagonal() * out.right.topRows(r);
  return out;
}

Eigen::VectorXd gram_eigenvalues(const SampledMatrix& sampled) {
  const Eigen::Index k = sampled.matrix.cols();
  if (sampled.singular_values.size() > 0) {
    Eigen::VectorXd ev = Eigen::VectorXd::Zero(k);
    ev.head(sampled.singular_values.size()) = sampled.singular_values.array().square();
    return ev;
  }
  const Eigen::MatrixXd gram = sampled.matrix.transpose() * sampled.matrix;
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly)
      .eigenvalues();
}

Eigen::VectorXd cogram_eigenvalues(const SampledMatrix& sampled) {
  const Eigen::Index n = sampled.matrix.rows();
  if (sampled.singular_values.size() > 0) {
    Eigen::VectorXd ev = Eigen::VectorXd::Zero(n);
    ev.head(sampled.singular_values.size()) = sampled.singular_values.array().square();
    return ev;
  }
  const Eigen::MatrixXd cogram = sampled.matrix * sampled.matrix.transpose();
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cogram, Eigen::EigenvaluesOnly)
      .eigenvalues();
}

ProblemInstance synthesize_problem(const EnsembleSpec& spec, const ChannelModel& prior,
                                   const ChannelModel& likelihood, std::uint64_t seed) {
  validate(prior);
  validate(likelihood);
  if (!is_prior(prior)) throw DomainError("synthesize_problem: prior slot holds a likelihood");
  if (is_prior(likelihood))
    throw DomainError("synthesize_problem: likelihood slot holds a prior");

  EnsembleSpec effective = spec;
  effective.seed = derive_seed(seed, 0, "matrix");
  SampledMatrix sampled = sample_matrix(effective);

  ProblemInstance p{std::move(sampled.matrix),
                    std::move(sampled.singular_values),
                    Eigen::VectorXd(spec.cols),
                    Eigen::VectorXd(),
                    Eigen::VectorXd(spec.rows),
                    prior,
                    likelihood,
                    effective};
  Rng signal(derive_seed(seed, 0, "signal"));
  for (Eigen::Index k = 0; k < spec.cols; ++k) p.x_true[k] = sample_prior(prior, signal);
  p.z_true = p.matrix * p.x_true;
  Rng noise(derive_seed(seed, 0, "noise"));
  for (Eigen::Index n = 0; n < spec.rows; ++n) p.y[n] = sample_likelihood(likelihood, p.z_true[n], noise);
  return p;
}

}  // namespace samp
