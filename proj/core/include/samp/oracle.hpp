#pragma once

// Dense reference computations used to validate solver states: the Gaussian
// posterior, the moment-consistency identities of a stationary point, and the
// matrix-inversion-lemma form of the z-side precision.

#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "samp/channels.hpp"
#include "samp/solvers.hpp"

namespace samp {

struct LmmseSolution {
  Eigen::VectorXd x_hat;
  Eigen::MatrixXd sigma_x;
};

/// Posterior of x ~ N(0, v0 I), y = A x + N(0, noise_variance I).
LmmseSolution lmmse(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double prior_variance,
                    double noise_variance);

/// Max-norm residuals of the stationary-point identities. The `_mean` and
/// `_precision` fields compare the Gaussian belief against gamma, rho and
/// lambda; `_moment_match` and `_variance` compare it against the tilted
/// moments at (kappa, tilt). Each covers both the x and z sides.
struct FixedPointReport {
  double residual_f1_mean = 0.0;
  double residual_f1_moment_match = 0.0;
  double residual_f2_precision = 0.0;
  double residual_f2_variance = 0.0;
  double residual_m = 0.0;

  double max() const;
};

/// Recomputes Sigma_x = (Lx + A^T Lz A)^{-1} densely, Sigma_z = A Sigma_x A^T
/// and the belief means Sigma_x (gamma_x + A^T gamma_z), A x_belief. Uses the
/// state's x_hat / z_hat for the left-hand sides so perturbations show.
/// Throws BeliefImproperError if the precision matrix is not positive definite.
FixedPointReport check_fixed_point(const EpState& state, const Eigen::MatrixXd& a,
                                   const ChannelModel& prior, const ChannelModel& likelihood,
                                   const Eigen::VectorXd& y);

/// max_n | Lz_n - Lz_n^2 [A (Lx + A^T Lz A)^{-1} A^T]_nn - [(Lz^{-1} + A Lx^{-1} A^T)^{-1}]_nn |
double check_woodbury(const Eigen::MatrixXd& a, const Eigen::VectorXd& lambda_x,
                      const Eigen::VectorXd& lambda_z);

/// Compares the dense definition
///   Lz_n - Lz_n^2 [A (Lx + A^T Lz A)^{-1} A^T]_nn
/// against the channel-side form tilt_z (1 - tilt_z sigma_z(kappa_z; tilt_z)).
/// The two agree at a stationary point. Returns max_n |dense_n - channel_n|.
double check_tilde_tau_m(const EpState& state, const Eigen::MatrixXd& a,
                         const ChannelModel& likelihood, const Eigen::VectorXd& y);

/// "key=value" lines, one per field plus "max".
std::string to_key_value(const FixedPointReport& report);

}  // namespace samp
