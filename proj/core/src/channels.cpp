#include "samp/channels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "samp/error.hpp"
#include "samp/normal.hpp"

namespace samp {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_tilt(double kappa, double tilt) {
  if (!(tilt > 0.0) || !std::isfinite(tilt))
    throw DomainError("tilt precision must be finite and > 0, got " + std::to_string(tilt));
  if (!std::isfinite(kappa)) throw DomainError("kappa must be finite");
}

// Gaussian factor with the given mean/variance multiplied by the tilt.
TiltedMoments conjugate(double mean, double variance, double kappa, double tilt) {
  const double precision = 1.0 / variance + tilt;
  return {(mean / variance + tilt * kappa) / precision, 1.0 / precision};
}

TiltedMoments bernoulli_gaussian(const BernoulliGaussianPrior& p, double kappa, double tilt) {
  const TiltedMoments active = conjugate(p.mean, p.variance, kappa, tilt);
  double pi_active = 1.0;
  if (p.sparsity < 1.0) {
    const double v = 1.0 / tilt;
    // log[(1-rho) N(0; kappa, v)] and log[rho N(kappa; mean, variance + v)],
    // common 2*pi factor dropped.
    const double log_spike = std::log1p(-p.sparsity) - 0.5 * std::log(v) - 0.5 * kappa * kappa / v;
    const double d = kappa - p.mean;
    const double log_slab = std::log(p.sparsity) - 0.5 * std::log(p.variance + v) -
                            0.5 * d * d / (p.variance + v);
    pi_active = 1.0 / (1.0 + std::exp(log_spike - log_slab));
  }
  const double mean = pi_active * active.mean;
  const double var =
      pi_active * active.variance + pi_active * (1.0 - pi_active) * active.mean * active.mean;
  return {mean, var};
}

// Two-sided mixture of truncated Gaussians.
TiltedMoments laplace(const LaplacePrior& p, double kappa, double tilt) {
  if (kappa < 0.0) {
    const TiltedMoments mirrored = laplace(p, -kappa, tilt);
    return {-mirrored.mean, mirrored.variance};
  }
  const double v = 1.0 / tilt;
  const double s = std::sqrt(v);
  const double lam = p.rate;
  // x > 0 : exp(-lam x) N(x; kappa, v) ∝ N(x; kappa - lam v, v)
  // x < 0 : exp(+lam x) N(x; kappa, v) ∝ N(x; kappa + lam v, v)
  const double a_pos = (kappa - lam * v) / s;
  const double a_neg = -(kappa + lam * v) / s;
  const double log_pos = -lam * kappa + log_normal_cdf(a_pos);
  const double log_neg = lam * kappa + log_normal_cdf(a_neg);
  const double pi_pos = 1.0 / (1.0 + std::exp(log_neg - log_pos));
  const double pi_neg = 1.0 - pi_pos;

  const MillsTerms tp = mills_terms(a_pos);
  const MillsTerms tn = mills_terms(a_neg);
  const double m_pos = s * tp.shifted;
  const double m_neg = -s * tn.shifted;
  const double v_pos = v * tp.var_factor;
  const double v_neg = v * tn.var_factor;
  const double mean = pi_pos * m_pos + pi_neg * m_neg;
  const double dm = m_pos - m_neg;
  const double var = pi_pos * v_pos + pi_neg * v_neg + pi_pos * pi_neg * dm * dm;
  return {mean, var};
}

TiltedMoments probit(const ProbitLikelihood& p, double y, double kappa, double tilt) {
  const double v = 1.0 / tilt;
  const double s2 = p.scale * p.scale;
  const double denom = std::sqrt(s2 + v);
  const double eta = y * kappa / denom;
  const MillsTerms t = mills_terms(eta);
  const double mean = kappa + y * v * t.ratio / denom;
  const double c = v / (s2 + v);
  // v * (1 - c * ratio * (eta + ratio)) without cancellation.
  const double var = v * (s2 / (s2 + v) + c * t.var_factor);
  return {mean, var};
}

}  // namespace

std::string_view channel_name(const ChannelModel& model) {
  return std::visit(Overloaded{
                        [](const GaussianPrior&) { return std::string_view("gaussian"); },
                        [](const BernoulliGaussianPrior&) {
                          return std::string_view("bernoulli-gaussian");
                        },
                        [](const LaplacePrior&) { return std::string_view("laplace"); },
                        [](const AwgnLikelihood&) { return std::string_view("awgn"); },
                        [](const ProbitLikelihood&) { return std::string_view("probit"); },
                    },
                    model);
}

bool is_prior(const ChannelModel& model) {
  return std::holds_alternative<GaussianPrior>(model) ||
         std::holds_alternative<BernoulliGaussianPrior>(model) ||
         std::holds_alternative<LaplacePrior>(model);
}

void validate(const ChannelModel& model) {
  std::visit(Overloaded{
                 [](const GaussianPrior& p) {
                   if (!(p.variance > 0.0) || !std::isfinite(p.variance) || !std::isfinite(p.mean))
                     throw DomainError("gaussian prior: variance must be > 0");
                 },
                 [](const BernoulliGaussianPrior& p) {
                   if (!(p.sparsity > 0.0 && p.sparsity <= 1.0))
                     throw DomainError("bernoulli-gaussian prior: sparsity must be in (0, 1]");
                   if (!(p.variance > 0.0) || !std::isfinite(p.variance) || !std::isfinite(p.mean))
                     throw DomainError("bernoulli-gaussian prior: variance must be > 0");
                 },
                 [](const LaplacePrior& p) {
                   if (!(p.rate > 0.0) || !std::isfinite(p.rate))
                     throw DomainError("laplace prior: rate must be > 0");
                 },
                 [](const AwgnLikelihood& p) {
                   if (!(p.noise_variance >= 0.0) || !std::isfinite(p.noise_variance))
                     throw DomainError("awgn likelihood: noise variance must be >= 0");
                 },
                 [](const ProbitLikelihood& p) {
                   if (!(p.scale > 0.0) || !std::isfinite(p.scale))
                     throw DomainError("probit likelihood: scale must be > 0");
                 },
             },
             model);
}

TiltedMoments prior_tilted_moments(const ChannelModel& model, double kappa, double tilt) {
  check_tilt(kappa, tilt);
  validate(model);
  return std::visit(
      Overloaded{
          [&](const GaussianPrior& p) { return conjugate(p.mean, p.variance, kappa, tilt); },
          [&](const BernoulliGaussianPrior& p) { return bernoulli_gaussian(p, kappa, tilt); },
          [&](const LaplacePrior& p) { return laplace(p, kappa, tilt); },
          [](const auto&) -> TiltedMoments {
            throw DomainError("prior_tilted_moments: model is a likelihood");
          },
      },
      model);
}

TiltedMoments likelihood_tilted_moments(const ChannelModel& model, double y, double kappa,
                                        double tilt) {
  check_tilt(kappa, tilt);
  validate(model);
  return std::visit(
      Overloaded{
          [&](const AwgnLikelihood& p) {
            if (!(p.noise_variance > 0.0))
              throw DomainError("awgn likelihood: tilted moments need noise variance > 0");
            return conjugate(y, p.noise_variance, kappa, tilt);
          },
          [&](const ProbitLikelihood& p) {
            if (y != 1.0 && y != -1.0)
              throw DomainError("probit likelihood: observation must be +1 or -1, got " +
                                std::to_string(y));
            return probit(p, y, kappa, tilt);
          },
          [](const auto&) -> TiltedMoments {
            throw DomainError("likelihood_tilted_moments: model is a prior");
          },
      },
      model);
}

VectorMoments vector_moments(std::span<const ChannelModel> models, const Eigen::VectorXd& kappa,
                             const Eigen::VectorXd& tilt, const Eigen::VectorXd& y) {
  const Eigen::Index n = kappa.size();
  if (models.empty()) throw DimensionError("vector_moments: no channel models");
  if (tilt.size() != n)
    throw DimensionError("vector_moments: kappa has " + std::to_string(n) + " entries, tilt has " +
                         std::to_string(tilt.size()));
  if (models.size() != 1 && static_cast<Eigen::Index>(models.size()) != n)
    throw DimensionError("vector_moments: expected 1 or " + std::to_string(n) +
                         " channel models, got " + std::to_string(models.size()));
  const bool priors = is_prior(models.front());
  for (const auto& m : models)
    if (is_prior(m) != priors)
      throw std::invalid_argument("vector_moments: priors and likelihoods mixed in one call");
  if (!priors && y.size() != n)
    throw DimensionError("vector_moments: observation vector has " + std::to_string(y.size()) +
                         " entries, expected " + std::to_string(n));

  VectorMoments out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const ChannelModel& m = models.size() == 1 ? models.front() : models[i];
    const TiltedMoments t = priors ? prior_tilted_moments(m, kappa[i], tilt[i])
                                   : likelihood_tilted_moments(m, y[i], kappa[i], tilt[i]);
    out.mean[i] = t.mean;
    out.variance[i] = t.variance;
  }
  return out;
}

TiltedMoments prior_moments(const ChannelModel& model) {
  return std::visit(
      Overloaded{
          [](const GaussianPrior& p) { return TiltedMoments{p.mean, p.variance}; },
          [](const BernoulliGaussianPrior& p) {
            const double mean = p.sparsity * p.mean;
            const double second = p.sparsity * (p.variance + p.mean * p.mean);
            return TiltedMoments{mean, second - mean * mean};
          },
          [](const LaplacePrior& p) { return TiltedMoments{0.0, 2.0 / (p.rate * p.rate)}; },
          [](const auto&) -> TiltedMoments {
            throw DomainError("prior_moments: model is a likelihood");
          },
      },
      model);
}

double sample_prior(const ChannelModel& model, Rng& rng) {
  return std::visit(
      Overloaded{
          [&](const GaussianPrior& p) { return rng.normal(p.mean, std::sqrt(p.variance)); },
          [&](const BernoulliGaussianPrior& p) {
            // Both draws are always taken so the stream layout does not depend
            // on the outcome.
            const bool active = rng.bernoulli(p.sparsity);
            const double value = rng.normal(p.mean, std::sqrt(p.variance));
            return active ? value : 0.0;
          },
          [&](const LaplacePrior& p) {
            const double magnitude = -std::log(rng.uniform_open()) / p.rate;
            return rng.bernoulli(0.5) ? magnitude : -magnitude;
          },
          [](const auto&) -> double { throw DomainError("sample_prior: model is a likelihood"); },
      },
      model);
}

double sample_likelihood(const ChannelModel& model, double z, Rng& rng) {
  return std::visit(
      Overloaded{
          [&](const AwgnLikelihood& p) {
            const double e = rng.normal();
            return z + std::sqrt(p.noise_variance) * e;
          },
          [&](const ProbitLikelihood& p) {
            const double e = rng.normal();
            return z + p.scale * e > 0.0 ? 1.0 : -1.0;
          },
          [](const auto&) -> double {
            throw DomainError("sample_likelihood: model is a prior");
          },
      },
      model);
}

}  // namespace samp
