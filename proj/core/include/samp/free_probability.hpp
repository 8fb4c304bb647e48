#pragma once

// Empirical spectra and their Stieltjes / R-transforms on the real axis,
// the additive-free-convolution fixed point for q, and the Marchenko-Pastur
// closed forms of the R-transforms of J_z = A^T Lz A and J_x = A Lx^{-1} A^T.

#include <complex>
#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace samp {

/// Discrete spectral measure sum_i w_i delta(x - a_i). Atoms are kept sorted;
/// exactly equal atoms are merged (their weights summed). Weights are
/// normalised to one.
class EmpiricalSpectrum {
 public:
  EmpiricalSpectrum(std::vector<double> atoms, std::vector<double> weights);
  /// Uniform weights 1/T.
  explicit EmpiricalSpectrum(const Eigen::VectorXd& eigenvalues);

  static EmpiricalSpectrum dirac(double atom) { return EmpiricalSpectrum({atom}, {1.0}); }

  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  double support_min() const { return atoms_.front(); }
  double support_max() const { return atoms_.back(); }
  double mean() const;

  /// Spectrum of c * X.
  EmpiricalSpectrum scaled(double c) const;

 private:
  std::vector<double> atoms_;
  std::vector<double> weights_;
};

/// G(s) = sum_i w_i / (a_i - s). Throws DomainError at a pole.
std::complex<double> stieltjes(const EmpiricalSpectrum& spectrum, std::complex<double> s);
double stieltjes(const EmpiricalSpectrum& spectrum, double s);

/// Valid omega for r_transform_real: every omega < 0 (inversion left of the
/// support), omega = 0 (the first moment), and every omega > 0 (inversion
/// right of the support). The real-axis inverse exists on both sides for any
/// discrete spectrum, but it only coincides with the analytic R-transform of
/// the limiting law near zero; callers decide how far to trust it.
struct RealRTransformQuery {
  double omega;
  double value;
  bool converged;
  double stieltjes_point;  // s with G(s) = -omega
  double residual;         // |G(s) + omega|
};

RealRTransformQuery r_transform_query(const EmpiricalSpectrum& spectrum, double omega);

/// R(omega) = G^{-1}(-omega) - 1/omega, with G inverted on the real axis by
/// bisection followed by Newton polishing. Throws NumericError when the
/// inversion misses |G(s) + omega| <= 1e-12 max(1, |omega|), unless the miss is
/// below the floating-point resolution of G at s (4 eps |s| G'(s)).
double r_transform_real(const EmpiricalSpectrum& spectrum, double omega);

/// q = sum_i w_i / a_i for a spectrum with strictly positive support, checked
/// against the identity 1/q = R(-q) to 1e-9 relative.
double remark1_q(const EmpiricalSpectrum& spectrum);

struct AdfSolution {
  double q;
  double residual;
  int iterations;
};

/// Solves q = (1/K) sum_k 1 / (Lx_k + R(-q)) by damped fixed-point iteration
/// (damping 0.5, at most 10000 steps, |residual| <= 1e-10).
AdfSolution solve_adf_fixed_point(const Eigen::VectorXd& lambda_x,
                                  const std::function<double(double)>& r_jz, double q0);

/// (1/N) sum_n 1 / (1/Lz_n - omega/alpha)
double r_mp_jz(const Eigen::VectorXd& lambda_z, double alpha, double omega);
/// (1/(alpha K)) sum_k 1 / (Lx_k - omega)
double r_mp_jx(const Eigen::VectorXd& lambda_x, double alpha, double omega);

/// All eigenvalues of a symmetric matrix, uniform weights. Throws DomainError
/// when max |M - M^T| > 1e-10.
EmpiricalSpectrum spectrum_of_symmetric(const Eigen::MatrixXd& m);

/// Two-column CSV "atom,weight" with a header row.
void write_spectrum_csv(std::ostream& out, const EmpiricalSpectrum& spectrum);

}  // namespace samp
