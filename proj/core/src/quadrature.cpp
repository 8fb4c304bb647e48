#include "samp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "samp/error.hpp"

namespace samp {

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw DomainError("gauss_hermite: need at least one node");
  const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
  std::vector<double> x(n), w(n);
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    // Initial guesses for the largest roots first.
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * x[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * x[1];
    else
      z = 2.0 * z - x[i - 2];

    double pp = 0.0;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) {
        converged = true;
        break;
      }
    }
    if (!converged) throw NumericError("gauss_hermite: root iteration did not converge", z);
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
  std::reverse(x.begin(), x.end());
  std::reverse(w.begin(), w.end());
  return {std::move(x), std::move(w)};
}

TiltedMoments gauss_hermite_tilted_moments(
    const std::function<double(double)>& log_factor, double kappa, double tilt,
    const QuadratureRule& rule) {
  if (!(tilt > 0.0) || !std::isfinite(tilt))
    throw DomainError("gauss_hermite_tilted_moments: tilt precision must be positive");
  const double scale = std::sqrt(2.0 / tilt);
  const std::size_t n = rule.nodes.size();
  std::vector<double> log_w(n), s(n);
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = kappa + scale * rule.nodes[i];
    log_w[i] = std::log(rule.weights[i]) + log_factor(s[i]);
    max_log = std::max(max_log, log_w[i]);
  }
  if (!std::isfinite(max_log))
    throw NumericError("gauss_hermite_tilted_moments: factor vanishes on every node (kappa=" +
                           std::to_string(kappa) + ", tilt=" + std::to_string(tilt) + ")",
                       max_log);
  double z = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = std::exp(log_w[i] - max_log);
    z += wi;
    m1 += wi * s[i];
  }
  const double mean = m1 / z;
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = s[i] - mean;
    var += std::exp(log_w[i] - max_log) * d * d;
  }
  var /= z;
  if (!(var > 0.0))
    throw NumericError("gauss_hermite_tilted_moments: non-positive variance", var);
  return {mean, var};
}

}  // namespace samp
