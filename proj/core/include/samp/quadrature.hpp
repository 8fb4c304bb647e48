#pragma once

#include <functional>
#include <vector>

#include "samp/channels.hpp"

namespace samp {

/// Gauss-Hermite rule for the weight exp(-t^2) on the real line.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Hermite rule (Newton iteration on the orthonormal
/// recurrence). Nodes ascending.
QuadratureRule gauss_hermite(int n);

/// Mean and variance of q(s) ∝ exp(log_factor(s)) * exp(-tilt/2 (s - kappa)^2)
/// using the rule centred at kappa and scaled by 1/sqrt(tilt). The factor is
/// combined with the weights in log space, so arbitrarily small factor values
/// do not underflow the normalisation.
TiltedMoments gauss_hermite_tilted_moments(
    const std::function<double(double)>& log_factor, double kappa, double tilt,
    const QuadratureRule& rule);

}  // namespace samp
