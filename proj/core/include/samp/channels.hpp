#pragma once

// Scalar priors p(x_k) and likelihoods p(y_n | z_n), and the mean/variance of
// their Gaussian-tilted densities
//
//   q(s) ∝ f(s) exp(-tilt/2 (s - kappa)^2),
//
// which drive every first-order step of the solvers.

#include <span>
#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Dense>

#include "samp/rng.hpp"

namespace samp {

struct GaussianPrior {
  double mean = 0.0;
  double variance = 1.0;
};

/// (1 - sparsity) * delta_0 + sparsity * Normal(mean, variance); sparsity is
/// the active fraction.
struct BernoulliGaussianPrior {
  double sparsity = 0.1;
  double mean = 0.0;
  double variance = 1.0;
};

/// (rate / 2) exp(-rate |x|)
struct LaplacePrior {
  double rate = 1.0;
};

/// y = z + Normal(0, noise_variance). A zero noise variance is accepted for
/// sampling (noiseless observations) but not for tilted moments.
struct AwgnLikelihood {
  double noise_variance = 1.0;
};

/// P(y = ±1 | z) = Phi(y z / scale)
struct ProbitLikelihood {
  double scale = 1.0;
};

using ChannelModel = std::variant<GaussianPrior, BernoulliGaussianPrior, LaplacePrior,
                                  AwgnLikelihood, ProbitLikelihood>;

struct TiltedMoments {
  double mean;
  double variance;
};

struct VectorMoments {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

/// Catalog name: "gaussian", "bernoulli-gaussian", "laplace", "awgn", "probit".
std::string_view channel_name(const ChannelModel& model);

bool is_prior(const ChannelModel& model);

/// Throws DomainError when parameters violate the model's invariants.
void validate(const ChannelModel& model);

TiltedMoments prior_tilted_moments(const ChannelModel& model, double kappa, double tilt);

TiltedMoments likelihood_tilted_moments(const ChannelModel& model, double y, double kappa,
                                        double tilt);

/// Elementwise tilted moments. `models` holds either one model (broadcast) or
/// one per index; all must be priors or all likelihoods. `y` is required for
/// likelihoods and ignored for priors.
VectorMoments vector_moments(std::span<const ChannelModel> models, const Eigen::VectorXd& kappa,
                             const Eigen::VectorXd& tilt, const Eigen::VectorXd& y = {});

/// Untilted prior moments (used for initialisation and the prior-mean baseline).
TiltedMoments prior_moments(const ChannelModel& model);

double sample_prior(const ChannelModel& model, Rng& rng);
double sample_likelihood(const ChannelModel& model, double z, Rng& rng);

}  // namespace samp
