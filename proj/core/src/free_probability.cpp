#include "samp/free_probability.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "samp/error.hpp"

namespace samp {
namespace {

constexpr double kInversionTolerance = 1e-12;

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// G(s) and G'(s) for real s outside the support.
struct RealG {
  double value;
  double derivative;
};

RealG real_g(const EmpiricalSpectrum& sp, double s) {
  double g = 0.0, dg = 0.0;
  const auto& a = sp.atoms();
  const auto& w = sp.weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double inv = 1.0 / (a[i] - s);
    g += w[i] * inv;
    dg += w[i] * inv * inv;
  }
  return {g, dg};
}

}  // namespace

EmpiricalSpectrum::EmpiricalSpectrum(std::vector<double> atoms, std::vector<double> weights) {
  if (atoms.empty()) throw DomainError("EmpiricalSpectrum: no atoms");
  if (atoms.size() != weights.size())
    throw DimensionError("EmpiricalSpectrum: " + std::to_string(atoms.size()) + " atoms but " +
                         std::to_string(weights.size()) + " weights");
  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return atoms[i] < atoms[j]; });
  double total = 0.0;
  for (std::size_t idx : order) {
    if (!std::isfinite(atoms[idx])) throw DomainError("EmpiricalSpectrum: non-finite atom");
    if (!(weights[idx] > 0.0) || !std::isfinite(weights[idx]))
      throw DomainError("EmpiricalSpectrum: weights must be positive");
    if (!atoms_.empty() && atoms_.back() == atoms[idx]) {
      weights_.back() += weights[idx];
    } else {
      atoms_.push_back(atoms[idx]);
      weights_.push_back(weights[idx]);
    }
    total += weights[idx];
  }
  for (double& w : weights_) w /= total;
}

EmpiricalSpectrum::EmpiricalSpectrum(const Eigen::VectorXd& eigenvalues)
    : EmpiricalSpectrum(std::vector<double>(eigenvalues.data(),
                                            eigenvalues.data() + eigenvalues.size()),
                        std::vector<double>(static_cast<std::size_t>(eigenvalues.size()),
                                            1.0 / static_cast<double>(eigenvalues.size()))) {}

double EmpiricalSpectrum::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) m += weights_[i] * atoms_[i];
  return m;
}

EmpiricalSpectrum EmpiricalSpectrum::scaled(double c) const {
  std::vector<double> a(atoms_);
  for (double& x : a) x *= c;
  return EmpiricalSpectrum(std::move(a), weights_);
}

std::complex<double> stieltjes(const EmpiricalSpectrum& spectrum, std::complex<double> s) {
  std::complex<double> g = 0.0;
  const auto& a = spectrum.atoms();
  const auto& w = spectrum.weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::complex<double> d = a[i] - s;
    if (d == 0.0) throw DomainError("stieltjes: s = " + fmt(s.real()) + " is an atom");
    g += w[i] / d;
  }
  return g;
}

double stieltjes(const EmpiricalSpectrum& spectrum, double s) {
  return stieltjes(spectrum, std::complex<double>(s, 0.0)).real();
}

RealRTransformQuery r_transform_query(const EmpiricalSpectrum& spectrum, double omega) {
  if (!std::isfinite(omega)) throw DomainError("r_transform_real: omega must be finite");
  if (omega == 0.0) return {0.0, spectrum.mean(), true, -std::numeric_limits<double>::infinity(), 0.0};

  const double a_min = spectrum.support_min();
  const double a_max = spectrum.support_max();
  const double t = -omega;  // target value of G
  // G is strictly increasing on both real half-lines outside the support and
  // is bracketed by the extreme atoms:
  //   s < a_min : 1/(a_max - s) <= G(s) <= 1/(a_min - s)
  //   s > a_max : same inequalities with G < 0.
  double lo, hi;
  if (omega < 0.0) {
    lo = a_min - 1.0 / t;
    hi = std::min(a_max - 1.0 / t, a_min);
  } else {
    lo = std::max(a_min + 1.0 / omega, a_max);
    hi = a_max + 1.0 / omega;
  }
  // The open end at the support edge is a pole; stay strictly inside.
  auto g_minus_t = [&](double s) {
    if (s >= a_min && s <= a_max) return omega < 0.0 ? std::numeric_limits<double>::infinity()
                                                     : -std::numeric_limits<double>::infinity();
    return real_g(spectrum, s).value - t;
  };
  for (int it = 0; it < 2000 && hi > lo; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g_minus_t(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  // Newton polish from the side where G is finite.
  double s = omega < 0.0 ? lo : hi;
  if (s >= a_min && s <= a_max) s = omega < 0.0 ? std::nextafter(a_min, -INFINITY)
                                                : std::nextafter(a_max, INFINITY);
  for (int it = 0; it < 3; ++it) {
    const RealG g = real_g(spectrum, s);
    const double step = (g.value - t) / g.derivative;
    const double next = s - step;
    const bool outside = omega < 0.0 ? next < a_min : next > a_max;
    if (!std::isfinite(next) || !outside) break;
    const double r_next = std::abs(real_g(spectrum, next).value - t);
    if (r_next > std::abs(g.value - t)) break;
    s = next;
  }
  const RealG g = real_g(spectrum, s);
  const double residual = std::abs(g.value - t);
  // Close to an atom, G changes by G'(s) * ulp(s) between adjacent doubles;
  // no root finder can do better than that.
  const double attainable = 4.0 * std::numeric_limits<double>::epsilon() *
                            std::max(std::abs(s), std::abs(s - (omega < 0.0 ? a_min : a_max))) *
                            g.derivative;
  const bool converged =
      residual <= std::max(kInversionTolerance * std::max(1.0, std::abs(omega)), attainable);
  // R(omega) = s + 1/G(s) with G(s) = -omega.
  return {omega, s - 1.0 / omega, converged, s, residual};
}

double r_transform_real(const EmpiricalSpectrum& spectrum, double omega) {
  const RealRTransformQuery q = r_transform_query(spectrum, omega);
  if (!q.converged)
    throw NumericError("r_transform_real: inversion of G at omega=" + fmt(omega) +
                           " left residual " + fmt(q.residual),
                       q.residual);
  return q.value;
}

double remark1_q(const EmpiricalSpectrum& spectrum) {
  if (!(spectrum.support_min() > 0.0))
    throw DomainError("remark1_q: spectrum must lie in (0, inf), smallest atom is " +
                      fmt(spectrum.support_min()));
  double q = 0.0;
  for (std::size_t i = 0; i < spectrum.atoms().size(); ++i)
    q += spectrum.weights()[i] / spectrum.atoms()[i];
  const double r = r_transform_real(spectrum, -q);
  if (std::abs(1.0 / q - r) > 1e-9 * (1.0 / q))
    throw NumericError("remark1_q: 1/q = " + fmt(1.0 / q) + " but R(-q) = " + fmt(r),
                       std::abs(1.0 / q - r));
  return q;
}

AdfSolution solve_adf_fixed_point(const Eigen::VectorXd& lambda_x,
                                  const std::function<double(double)>& r_jz, double q0) {
  if (lambda_x.size() == 0) throw DimensionError("solve_adf_fixed_point: empty Lx");
  if (!(q0 > 0.0)) throw DomainError("solve_adf_fixed_point: q0 must be > 0");
  constexpr int kMaxIterations = 10000;
  constexpr double kDamping = 0.5;
  constexpr double kTolerance = 1e-10;

  auto map = [&](double q) {
    const double r = r_jz(-q);
    double sum = 0.0;
    for (Eigen::Index k = 0; k < lambda_x.size(); ++k) {
      const double d = lambda_x[k] + r;
      if (!(d > 0.0))
        throw DomainError("solve_adf_fixed_point: denominator Lx_k + R(-q) = " + fmt(d) +
                          " at q = " + fmt(q));
      sum += 1.0 / d;
    }
    return sum / static_cast<double>(lambda_x.size());
  };

  double q = q0;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= kMaxIterations; ++it) {
    const double mapped = map(q);
    residual = std::abs(q - mapped);
    if (residual <= kTolerance) return {q, residual, it - 1};
    // First step undamped: a decoupled problem (R constant) is solved by it.
    const double next = it == 1 ? mapped : kDamping * mapped + (1.0 - kDamping) * q;
    if (!(next > 0.0)) throw DomainError("solve_adf_fixed_point: iterate left (0, inf)");
    q = next;
  }
  throw NumericError("solve_adf_fixed_point: no convergence after 10000 iterations, residual " +
                         fmt(residual),
                     residual);
}

double r_mp_jz(const Eigen::VectorXd& lambda_z, double alpha, double omega) {
  if (lambda_z.size() == 0) throw DimensionError("r_mp_jz: empty Lz");
  if (!(alpha > 0.0)) throw DomainError("r_mp_jz: alpha must be > 0");
  double sum = 0.0;
  for (Eigen::Index n = 0; n < lambda_z.size(); ++n) {
    const double d = 1.0 / lambda_z[n] - omega / alpha;
    if (!(d > 0.0))
      throw DomainError("r_mp_jz: denominator 1/Lz_n - omega/alpha = " + fmt(d) + " at n = " +
                        std::to_string(n));
    sum += 1.0 / d;
  }
  return sum / static_cast<double>(lambda_z.size());
}

double r_mp_jx(const Eigen::VectorXd& lambda_x, double alpha, double omega) {
  if (lambda_x.size() == 0) throw DimensionError("r_mp_jx: empty Lx");
  if (!(alpha > 0.0)) throw DomainError("r_mp_jx: alpha must be > 0");
  double sum = 0.0;
  for (Eigen::Index k = 0; k < lambda_x.size(); ++k) {
    const double d = lambda_x[k] - omega;
    if (!(d > 0.0))
      throw DomainError("r_mp_jx: denominator Lx_k - omega = " + fmt(d) + " at k = " +
                        std::to_string(k));
    sum += 1.0 / d;
  }
  return sum / (alpha * static_cast<double>(lambda_x.size()));
}

EmpiricalSpectrum spectrum_of_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DimensionError("spectrum_of_symmetric: matrix must be square and non-empty");
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10)
    throw DomainError("spectrum_of_symmetric: max |M - M^T| = " + fmt(asym) + " > 1e-10");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericError("spectrum_of_symmetric: eigensolver failed", asym);
  return EmpiricalSpectrum(es.eigenvalues());
}

void write_spectrum_csv(std::ostream& out, const EmpiricalSpectrum& spectrum) {
  out << "atom,weight\n" << std::setprecision(17);
  for (std::size_t i = 0; i < spectrum.atoms().size(); ++i)
    out << spectrum.atoms()[i] << ',' << spectrum.weights()[i] << '\n';
}

}  // namespace samp
