#include "samp/oracle.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <string>

#include "samp/error.hpp"

namespace samp {
namespace {

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

void require_size(const Eigen::VectorXd& v, Eigen::Index n, const char* name) {
  if (v.size() != n)
    throw DimensionError(std::string("check_fixed_point: ") + name + " has " +
                         std::to_string(v.size()) + " entries, expected " + std::to_string(n));
}

Eigen::LLT<Eigen::MatrixXd> factor_precision(const Eigen::MatrixXd& a,
                                             const Eigen::VectorXd& lambda_x,
                                             const Eigen::VectorXd& lambda_z, const char* who) {
  Eigen::MatrixXd p = a.transpose() * lambda_z.asDiagonal() * a;
  p.diagonal() += lambda_x;
  Eigen::LLT<Eigen::MatrixXd> llt(p);
  if (llt.info() != Eigen::Success)
    throw BeliefImproperError(std::string(who) + ": Lx + A^T Lz A is not positive definite");
  return llt;
}

}  // namespace

LmmseSolution lmmse(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double prior_variance,
                    double noise_variance) {
  if (!(prior_variance > 0.0) || !(noise_variance > 0.0))
    throw DomainError("lmmse: variances must be > 0");
  if (a.rows() != y.size()) throw DimensionError("lmmse: rows of A and size of y differ");
  const Eigen::Index k = a.cols();
  Eigen::MatrixXd p = a.transpose() * a / noise_variance;
  p.diagonal().array() += 1.0 / prior_variance;
  Eigen::LLT<Eigen::MatrixXd> llt(p);
  if (llt.info() != Eigen::Success) throw NumericError("lmmse: factorization failed", 0.0);
  LmmseSolution out;
  out.sigma_x = llt.solve(Eigen::MatrixXd::Identity(k, k));
  out.x_hat = llt.solve(a.transpose() * y / noise_variance);
  return out;
}

double FixedPointReport::max() const {
  return std::max({residual_f1_mean, residual_f1_moment_match, residual_f2_precision,
                   residual_f2_variance, residual_m});
}

FixedPointReport check_fixed_point(const EpState& s, const Eigen::MatrixXd& a,
                                   const ChannelModel& prior, const ChannelModel& likelihood,
                                   const Eigen::VectorXd& y) {
  const Eigen::Index n = a.rows(), k = a.cols();
  for (const auto* v : {&s.x_hat, &s.kappa_x, &s.tilt_x, &s.lambda_x, &s.gamma_x, &s.rho_x})
    require_size(*v, k, "x-side vector");
  for (const auto* v : {&s.z_hat, &s.kappa_z, &s.tilt_z, &s.lambda_z, &s.gamma_z, &s.rho_z, &s.m})
    require_size(*v, n, "z-side vector");
  require_size(y, n, "y");

  const auto llt = factor_precision(a, s.lambda_x, s.lambda_z, "check_fixed_point");
  const Eigen::MatrixXd sigma_x = llt.solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::VectorXd sx = sigma_x.diagonal();
  const Eigen::VectorXd sz = (a * sigma_x * a.transpose()).diagonal();
  const Eigen::VectorXd x_belief = sigma_x * (s.gamma_x + a.transpose() * s.gamma_z);
  const Eigen::VectorXd z_belief = a * x_belief;

  const std::span<const ChannelModel> px(&prior, 1);
  const std::span<const ChannelModel> pz(&likelihood, 1);
  const VectorMoments mx = vector_moments(px, s.kappa_x, s.tilt_x);
  const VectorMoments mz = vector_moments(pz, s.kappa_z, s.tilt_z, y);

  FixedPointReport r;
  r.residual_f1_mean = std::max({max_abs(s.x_hat - sx.cwiseProduct(s.gamma_x + s.rho_x)),
                                 max_abs(s.z_hat - sz.cwiseProduct(s.gamma_z + s.rho_z)),
                                 max_abs(s.x_hat - x_belief), max_abs(s.z_hat - z_belief)});
  r.residual_f1_moment_match = std::max(max_abs(s.x_hat - mx.mean), max_abs(s.z_hat - mz.mean));
  r.residual_f2_precision =
      std::max(max_abs(sx - (s.lambda_x + s.tilt_x).cwiseInverse()),
               max_abs(sz - (s.lambda_z + s.tilt_z).cwiseInverse()));
  r.residual_f2_variance = std::max(max_abs(sx - mx.variance), max_abs(sz - mz.variance));
  r.residual_m =
      std::max(max_abs(s.m - s.tilt_z.cwiseProduct(s.z_hat - s.kappa_z)),
               max_abs(s.m - (s.gamma_z - s.lambda_z.cwiseProduct(a * s.x_hat))));
  return r;
}

double check_woodbury(const Eigen::MatrixXd& a, const Eigen::VectorXd& lambda_x,
                      const Eigen::VectorXd& lambda_z) {
  const Eigen::Index n = a.rows(), k = a.cols();
  if (lambda_x.size() != k || lambda_z.size() != n)
    throw DimensionError("check_woodbury: precision sizes do not match A");
  if (!(lambda_x.minCoeff() > 0.0) || !(lambda_z.minCoeff() > 0.0))
    throw DomainError("check_woodbury: precisions must be > 0");

  const auto llt = factor_precision(a, lambda_x, lambda_z, "check_woodbury");
  const Eigen::MatrixXd inner = llt.solve(a.transpose());
  const Eigen::VectorXd proj = (a * inner).diagonal();
  const Eigen::VectorXd lhs =
      lambda_z - lambda_z.cwiseAbs2().cwiseProduct(proj);

  Eigen::MatrixXd outer = a * lambda_x.cwiseInverse().asDiagonal() * a.transpose();
  outer.diagonal() += lambda_z.cwiseInverse();
  Eigen::LLT<Eigen::MatrixXd> llt_outer(outer);
  if (llt_outer.info() != Eigen::Success)
    throw NumericError("check_woodbury: Lz^{-1} + A Lx^{-1} A^T factorization failed", 0.0);
  const Eigen::VectorXd rhs = llt_outer.solve(Eigen::MatrixXd::Identity(n, n)).diagonal();
  return max_abs(lhs - rhs);
}

double check_tilde_tau_m(const EpState& s, const Eigen::MatrixXd& a,
                         const ChannelModel& likelihood, const Eigen::VectorXd& y) {
  const Eigen::Index n = a.rows();
  require_size(s.lambda_z, n, "lambda_z");
  require_size(s.tilt_z, n, "tilt_z");
  require_size(s.kappa_z, n, "kappa_z");
  require_size(s.lambda_x, a.cols(), "lambda_x");
  const auto llt = factor_precision(a, s.lambda_x, s.lambda_z, "check_tilde_tau_m");
  const Eigen::VectorXd proj = (a * llt.solve(a.transpose())).diagonal();
  const Eigen::VectorXd dense = s.lambda_z - s.lambda_z.cwiseAbs2().cwiseProduct(proj);

  const std::span<const ChannelModel> pz(&likelihood, 1);
  const Eigen::VectorXd sigma_z = vector_moments(pz, s.kappa_z, s.tilt_z, y).variance;
  const Eigen::VectorXd channel =
      s.tilt_z.cwiseProduct((1.0 - s.tilt_z.array() * sigma_z.array()).matrix());
  return max_abs(dense - channel);
}

std::string to_key_value(const FixedPointReport& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "residual_f1_mean=" << r.residual_f1_mean << '\n'
     << "residual_f1_moment_match=" << r.residual_f1_moment_match << '\n'
     << "residual_f2_precision=" << r.residual_f2_precision << '\n'
     << "residual_f2_variance=" << r.residual_f2_variance << '\n'
     << "residual_m=" << r.residual_m << '\n'
     << "max=" << r.max() << '\n';
  return os.str();
}

}  // namespace samp
