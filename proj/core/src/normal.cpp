#include "samp/normal.hpp"

#include <cmath>
#include <numbers>

namespace samp {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684758586311649;
constexpr double kTailSwitch = -5.0;
constexpr int kFractionDepth = 400;

// Tail of Phi(-t)/phi(t) = 1/(t + 1/(t + 2/(t + 3/(t + ...)))) for t >= 5.
// Returns (f1, f2, f3) with f_k = t + k/f_{k+1}.
struct TailFraction {
  double f1, f2, f3;
};

TailFraction tail_fraction(double t) {
  double f = t;
  double f3 = t, f2 = t;
  for (int k = kFractionDepth; k >= 1; --k) {
    f = t + k / f;
    if (k == 3) f3 = f;
    if (k == 2) f2 = f;
  }
  return {f, f2, f3};
}

}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_normal_cdf(double x) {
  if (x >= kTailSwitch) {
    if (x > 5.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
    return std::log(normal_cdf(x));
  }
  const double t = -x;
  const TailFraction cf = tail_fraction(t);
  return -0.5 * t * t + std::log(kInvSqrt2Pi) - std::log(cf.f1);
}

MillsTerms mills_terms(double x) {
  if (x >= kTailSwitch) {
    const double ratio = normal_pdf(x) / normal_cdf(x);
    const double shifted = x + ratio;
    return {ratio, shifted, 1.0 - ratio * shifted};
  }
  const double t = -x;
  const TailFraction cf = tail_fraction(t);
  // ratio = f1 = t + 1/f2, shifted = 1/f2,
  // 1 - ratio*shifted = (2 f2/f3 - 1)/f2^2.
  return {cf.f1, 1.0 / cf.f2, (2.0 * cf.f2 / cf.f3 - 1.0) / (cf.f2 * cf.f2)};
}

}  // namespace samp
