#pragma once

namespace samp {

double normal_pdf(double x);
double normal_cdf(double x);

/// log Phi(x), accurate far into the lower tail.
double log_normal_cdf(double x);

/// Quantities of a standard normal truncated to (-inf, x] mirrored to
/// [-x, inf), i.e. the moments needed by one-sided truncated Gaussians.
///
///   ratio        = phi(x) / Phi(x)            (inverse Mills ratio)
///   shifted      = x + ratio
///   var_factor   = 1 - ratio * (x + ratio)
///
/// All three are evaluated without cancellation for very negative x.
struct MillsTerms {
  double ratio;
  double shifted;
  double var_factor;
};

MillsTerms mills_terms(double x);

}  // namespace samp
