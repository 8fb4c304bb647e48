#include "samp/solvers.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "samp/channels.hpp"
#include "samp/error.hpp"

namespace samp {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t clip_below(Eigen::VectorXd& v, double floor) {
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] < floor) {
      v[i] = floor;
      ++n;
    }
  return n;
}

std::size_t clip_below(double& v, double floor) {
  if (v < floor) {
    v = floor;
    return 1;
  }
  return 0;
}

void require_finite(const Eigen::VectorXd& v, const char* name, std::size_t iteration) {
  if (!v.allFinite())
    throw DivergedError(std::string("non-finite ") + name + " at iteration " +
                            std::to_string(iteration),
                        iteration);
}

double mean_of(const Eigen::VectorXd& v) { return v.sum() / static_cast<double>(v.size()); }

}  // namespace

std::string_view strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::GampFull: return "gamp-full";
    case StrategyKind::GampIid: return "gamp-iid";
    case StrategyKind::ExactEp: return "exact-ep";
    case StrategyKind::SampRTransform: return "samp-rtransform";
  }
  return "unknown";
}

std::optional<StrategyKind> parse_strategy_kind(std::string_view name) {
  for (auto k : {StrategyKind::GampFull, StrategyKind::GampIid, StrategyKind::ExactEp,
                 StrategyKind::SampRTransform})
    if (strategy_name(k) == name) return k;
  return std::nullopt;
}

std::string_view r_source_name(RSourceKind kind) {
  switch (kind) {
    case RSourceKind::ClosedFormMp: return "closed-form-mp";
    case RSourceKind::ScaledSpectrum: return "scaled-spectrum";
    case RSourceKind::Respectralize: return "respectralize";
    case RSourceKind::Constant: return "constant";
    case RSourceKind::FreeCompression: return "free-compression";
  }
  return "unknown";
}

std::optional<RSourceKind> parse_r_source_kind(std::string_view name) {
  for (auto k : {RSourceKind::ClosedFormMp, RSourceKind::ScaledSpectrum,
                 RSourceKind::Respectralize, RSourceKind::Constant,
                 RSourceKind::FreeCompression})
    if (r_source_name(k) == name) return k;
  return std::nullopt;
}

std::string_view run_status_name(RunStatus status) {
  switch (status) {
    case RunStatus::Converged: return "converged";
    case RunStatus::MaxIterations: return "max-iterations";
    case RunStatus::Failed: return "failed";
  }
  return "unknown";
}

void validate(const SecondOrderStrategy& strategy) {
  if (!(strategy.precision_floor > 0.0))
    throw DomainError("strategy: precision floor must be > 0");
  if (!(strategy.inner_tolerance > 0.0))
    throw DomainError("strategy: inner tolerance must be > 0");
  if (strategy.inner_max_iterations < 1)
    throw DomainError("strategy: inner iteration budget must be >= 1");
}

void validate(const SolverConfig& config) {
  validate(config.strategy);
  if (!(config.damping > 0.0 && config.damping <= 1.0))
    throw DomainError("solver: damping must be in (0, 1], got " + std::to_string(config.damping));
  if (!(config.tolerance >= 0.0)) throw DomainError("solver: tolerance must be >= 0");
}

// ---------------------------------------------------------------------------
// Standalone second-order operations.

GampFullUpdate second_order_gamp_full(const GampState& state, const Eigen::MatrixXd& a,
                                      double floor) {
  const Eigen::MatrixXd a2 = a.cwiseAbs2();
  GampFullUpdate out;
  const Eigen::VectorXd spread = a2 * state.tau_x;
  for (Eigen::Index n = 0; n < spread.size(); ++n)
    if (!(spread[n] > 0.0))
      throw DomainError("second_order_gamp_full: (A∘A) tau_x vanishes at row " +
                        std::to_string(n));
  out.tilt_z = spread.cwiseInverse();
  out.clipped += clip_below(out.tilt_z, floor);
  out.tau_m = out.tilt_z.cwiseProduct(
      (Eigen::VectorXd::Ones(out.tilt_z.size()) - out.tilt_z.cwiseProduct(state.tau_z)));
  out.tilt_x = a2.transpose() * out.tau_m;
  out.clipped += clip_below(out.tilt_x, floor);
  return out;
}

GampIidUpdate second_order_iid(const GampState& state, double alpha, double floor) {
  const double mean_tau_x = mean_of(state.tau_x);
  if (!(mean_tau_x > 0.0)) throw DomainError("second_order_iid: <tau_x> must be > 0");
  GampIidUpdate out{};
  out.tilt_z = alpha / mean_tau_x;
  out.clipped += clip_below(out.tilt_z, floor);
  out.tau_m = out.tilt_z * (1.0 - out.tilt_z * state.tau_z.array()).matrix();
  out.tilt_x = mean_of(out.tau_m);
  out.clipped += clip_below(out.tilt_x, floor);
  return out;
}

namespace {

// A^T Lz A (lower triangle valid).
Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& a, const Eigen::VectorXd& lambda_z) {
  const Eigen::MatrixXd scaled = lambda_z.cwiseSqrt().asDiagonal() * a;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(a.cols(), a.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
  return g;
}

// Sigma_x = (Lx ± J)^{-1}; fills diag(Sigma_x) and, when requested,
// diag(A Sigma_x A^T).
void linear_factor_covariance(EpState& s, const Eigen::MatrixXd& a, const Eigen::MatrixXd& gram,
                              CovarianceSign sign, bool with_z) {
  const Eigen::Index k = a.cols();
  Eigen::MatrixXd precision = sign == CovarianceSign::Plus ? gram : Eigen::MatrixXd(-gram);
  precision.diagonal() += s.lambda_x;
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(precision);
  if (llt.info() != Eigen::Success)
    throw BeliefImproperError(
        "exact-ep: Lx + A^T Lz A is not positive definite (increase damping)");
  const Eigen::MatrixXd sigma = llt.solve(Eigen::MatrixXd::Identity(k, k));
  s.sigma_x_diag = sigma.diagonal();
  if (with_z) s.sigma_z_diag = (a * sigma).cwiseProduct(a).rowwise().sum();
}

std::size_t ep_z_side(EpState& s, const Eigen::MatrixXd& a, const EpOptions& options,
                      Eigen::MatrixXd& gram) {
  std::size_t clipped = 0;
  s.lambda_z = s.tau_z.cwiseInverse() - s.tilt_z;
  clipped += clip_below(s.lambda_z, options.floor);
  gram = weighted_gram(a, s.lambda_z);
  linear_factor_covariance(s, a, gram, options.sign, true);
  s.tilt_z = s.sigma_z_diag.cwiseInverse() - s.lambda_z;
  clipped += clip_below(s.tilt_z, options.floor);
  return clipped;
}

std::size_t ep_x_side(EpState& s, const Eigen::MatrixXd& a, const EpOptions& options,
                      const Eigen::MatrixXd& gram) {
  std::size_t clipped = 0;
  s.lambda_x = s.tau_x.cwiseInverse() - s.tilt_x;
  clipped += clip_below(s.lambda_x, options.floor);
  linear_factor_covariance(s, a, gram, options.sign, false);
  s.tilt_x = s.sigma_x_diag.cwiseInverse() - s.lambda_x;
  clipped += clip_below(s.tilt_x, options.floor);
  return clipped;
}

}  // namespace

std::size_t ep_update_z_side(EpState& s, const Eigen::MatrixXd& a, const EpOptions& options) {
  Eigen::MatrixXd gram;
  return ep_z_side(s, a, options, gram);
}

std::size_t ep_update_x_side(EpState& s, const Eigen::MatrixXd& a, const EpOptions& options) {
  if (s.lambda_z.size() != a.rows())
    throw DimensionError("ep_update_x_side: lambda_z must be set (run the z side first)");
  return ep_x_side(s, a, options, weighted_gram(a, s.lambda_z));
}

std::size_t second_order_exact_ep(EpState& state, const Eigen::MatrixXd& a,
                                  const EpOptions& options) {
  Eigen::MatrixXd gram;
  std::size_t clipped = ep_z_side(state, a, options, gram);
  clipped += ep_x_side(state, a, options, gram);
  return clipped;
}

ScalarFixedPoint solve_scalar_fixed_point(const std::function<double(double)>& f, double x0,
                                          double tolerance, int max_iterations) {
  if (!(x0 > 0.0)) throw DomainError("solve_scalar_fixed_point: start must be > 0");
  double x = x0;
  double fx = f(x);
  double r = std::abs(fx - x);
  if (r <= tolerance) return {x, r, 0};
  double step = 1.0;
  for (int it = 1; it <= max_iterations; ++it) {
    double candidate = x + step * (fx - x);
    while (!(candidate > 0.0)) {
      step *= 0.5;
      candidate = x + step * (fx - x);
    }
    const double fc = f(candidate);
    const double rc = std::abs(fc - candidate);
    if (rc <= tolerance) return {candidate, rc, it};
    if (rc >= r) step = std::max(step * 0.5, 1.0 / 1024.0);
    x = candidate;
    fx = fc;
    r = rc;
  }
  throw NumericError("inner fixed point: no convergence after " + std::to_string(max_iterations) +
                         " steps, residual " + std::to_string(r),
                     r);
}

ScalarFixedPoint samp_solve_tilt_x(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& at_m,
                                   const ChannelModel& prior, const RProvider& r_jz,
                                   double initial, double tolerance, int max_iterations,
                                   double floor) {
  const Eigen::Index k = x_hat.size();
  const std::span<const ChannelModel> models(&prior, 1);
  auto f = [&](double tilt) {
    const Eigen::VectorXd kappa = x_hat + at_m / tilt;
    const Eigen::VectorXd tilt_v = Eigen::VectorXd::Constant(k, tilt);
    const double q = mean_of(vector_moments(models, kappa, tilt_v).variance);
    return std::max(r_jz(-q), floor);
  };
  return solve_scalar_fixed_point(f, std::max(initial, floor), tolerance, max_iterations);
}

ScalarFixedPoint samp_solve_tilt_z(const Eigen::VectorXd& a_x_hat, const Eigen::VectorXd& m_prev,
                                   const Eigen::VectorXd& y, const ChannelModel& likelihood,
                                   const RProvider& r_jx, double initial, double tolerance,
                                   int max_iterations, double floor) {
  const Eigen::Index n = a_x_hat.size();
  const std::span<const ChannelModel> models(&likelihood, 1);
  auto f = [&](double tilt) {
    const Eigen::VectorXd kappa = a_x_hat - m_prev / tilt;
    const Eigen::VectorXd tilt_v = Eigen::VectorXd::Constant(n, tilt);
    const Eigen::VectorXd sigma_z = vector_moments(models, kappa, tilt_v, y).variance;
    double mean_tau_m = tilt * (1.0 - tilt * mean_of(sigma_z));
    mean_tau_m = std::max(mean_tau_m, floor);
    const double r = r_jx(-mean_tau_m);
    if (!(r > 0.0))
      throw DomainError("samp: R_Jx(-<tau_m>) = " + std::to_string(r) + " is not positive");
    return std::max(1.0 / r, floor);
  };
  return solve_scalar_fixed_point(f, std::max(initial, floor), tolerance, max_iterations);
}

SampUpdate second_order_samp(const GampState& state, const ProblemInstance& problem,
                             const RProvider& r_jz, const RProvider& r_jx, double tolerance,
                             int max_iterations, double floor) {
  const Eigen::MatrixXd& a = problem.matrix;
  const double init_z =
      state.tilt_z.size() > 0 ? mean_of(state.tilt_z) : problem.ensemble.alpha() / mean_of(state.tau_x);
  const double init_x = state.tilt_x.size() > 0 ? mean_of(state.tilt_x) : 1.0;
  SampUpdate out{};
  out.tilt_z = samp_solve_tilt_z(a * state.x_hat, state.m, problem.y, problem.likelihood, r_jx,
                                 init_z, tolerance, max_iterations, floor);
  out.tilt_x = samp_solve_tilt_x(state.x_hat, a.transpose() * state.m, problem.prior, r_jz,
                                 init_x, tolerance, max_iterations, floor);
  return out;
}

// ---------------------------------------------------------------------------
// Strategy runtime.

class SecondOrderUpdater {
 public:
  virtual ~SecondOrderUpdater() = default;
  /// Fills whatever the first z-side update reads besides x_hat/tau_x/m.
  virtual void bootstrap(EpState&) const {}
  /// Sets tilt_z before G1. `a_x_hat` = A x_hat.
  virtual void update_z(EpState& s, const Eigen::VectorXd& a_x_hat) = 0;
  /// Sets tau_m and tilt_x before G5. `at_m` = A^T m.
  virtual void update_x(EpState& s, const Eigen::VectorXd& at_m) = 0;
  /// Called after G7.
  virtual void after_x_moments(EpState&) {}
  virtual bool has_covariance() const { return false; }

  std::size_t clip_events = 0;
  double inner_residual = kNaN;
};

namespace {

struct Context {
  const ProblemInstance& problem;
  double floor;
};

class GampFullUpdater final : public SecondOrderUpdater {
 public:
  GampFullUpdater(const ProblemInstance& p, double floor)
      : a2_(p.matrix.cwiseAbs2()), floor_(floor) {}

  void update_z(EpState& s, const Eigen::VectorXd&) override {
    const Eigen::VectorXd spread = a2_ * s.tau_x;
    if (!(spread.minCoeff() > 0.0))
      throw DomainError("gamp-full: (A∘A) tau_x has a zero entry");
    s.tilt_z = spread.cwiseInverse();
    clip_events += clip_below(s.tilt_z, floor_);
  }

  void update_x(EpState& s, const Eigen::VectorXd&) override {
    s.tau_m = s.tilt_z.cwiseProduct(
        (1.0 - s.tilt_z.array() * s.tau_z.array()).matrix());
    s.tilt_x = a2_.transpose() * s.tau_m;
    clip_events += clip_below(s.tilt_x, floor_);
  }

 private:
  Eigen::MatrixXd a2_;
  double floor_;
};

class GampIidUpdater final : public SecondOrderUpdater {
 public:
  GampIidUpdater(const ProblemInstance& p, double floor) : alpha_(p.ensemble.alpha()), floor_(floor) {}

  void update_z(EpState& s, const Eigen::VectorXd&) override {
    const double mean_tau_x = mean_of(s.tau_x);
    if (!(mean_tau_x > 0.0)) throw DomainError("gamp-iid: <tau_x> must be > 0");
    double tilt = alpha_ / mean_tau_x;
    clip_events += clip_below(tilt, floor_);
    s.tilt_z = Eigen::VectorXd::Constant(s.tau_z.size(), tilt);
  }

  void update_x(EpState& s, const Eigen::VectorXd&) override {
    s.tau_m = s.tilt_z.cwiseProduct((1.0 - s.tilt_z.array() * s.tau_z.array()).matrix());
    double tilt = mean_of(s.tau_m);
    clip_events += clip_below(tilt, floor_);
    s.tilt_x = Eigen::VectorXd::Constant(s.tau_x.size(), tilt);
  }

 private:
  double alpha_;
  double floor_;
};

class ExactEpUpdater final : public SecondOrderUpdater {
 public:
  ExactEpUpdater(const ProblemInstance& p, const SecondOrderStrategy& strategy)
      : problem_(p), options_{strategy.precision_floor, strategy.covariance_sign} {}

  void bootstrap(EpState& s) const override {
    // Linear-factor messages start from the Gaussian fit of the prior, the
    // likelihood messages from one tilted-moment evaluation at the
    // prior-predictive tilt.
    const Eigen::MatrixXd& a = problem_.matrix;
    s.lambda_x = s.tau_x.cwiseInverse();
    s.tilt_x = Eigen::VectorXd::Constant(s.tau_x.size(), options_.floor);
    const Eigen::VectorXd spread = a.cwiseAbs2() * s.tau_x;
    s.tilt_z = spread.cwiseInverse();
    clip_below(s.tilt_z, options_.floor);
    const std::span<const ChannelModel> lik(&problem_.likelihood, 1);
    s.tau_z = vector_moments(lik, a * s.x_hat, s.tilt_z, problem_.y).variance;
  }

  void update_z(EpState& s, const Eigen::VectorXd&) override {
    clip_events += ep_z_side(s, problem_.matrix, options_, gram_);
  }

  void update_x(EpState& s, const Eigen::VectorXd&) override {
    s.tau_m = s.tilt_z.cwiseProduct((1.0 - s.tilt_z.array() * s.tau_z.array()).matrix());
    clip_events += ep_x_side(s, problem_.matrix, options_, gram_);
  }

  bool has_covariance() const override { return true; }

 private:
  const ProblemInstance& problem_;
  EpOptions options_;
  Eigen::MatrixXd gram_;
};

class SampUpdater final : public SecondOrderUpdater {
 public:
  SampUpdater(const ProblemInstance& p, const SecondOrderStrategy& strategy)
      : problem_(p), strategy_(strategy), alpha_(p.ensemble.alpha()) {
    // Eigenvalues of A^T A and A A^T for the scaled-spectrum sources. The
    // retained singular values are reused when the ensemble provides them.
    const bool need_gram = strategy.r_jz.kind == RSourceKind::ScaledSpectrum;
    const bool need_cogram = strategy.r_jx.kind == RSourceKind::ScaledSpectrum;
    if (need_gram || need_cogram) {
      SampledMatrix sm{p.matrix, p.singular_values, {}, {}};
      if (need_gram) gram_ = std::make_shared<EmpiricalSpectrum>(gram_eigenvalues(sm));
      if (need_cogram) cogram_ = std::make_shared<EmpiricalSpectrum>(cogram_eigenvalues(sm));
    }
    if (strategy.r_jz.kind == RSourceKind::FreeCompression ||
        strategy.r_jx.kind == RSourceKind::FreeCompression)
      common_sv2_ = common_squared_singular_value(p);
    if (strategy.r_jx.kind == RSourceKind::FreeCompression && p.rows() > p.cols())
      throw DomainError("samp: free-compression R_Jx needs N <= K");
    if (strategy.r_jz.kind == RSourceKind::FreeCompression && p.rows() < p.cols())
      throw DomainError("samp: free-compression R_Jz needs N >= K");
  }

  void bootstrap(EpState& s) const override { s.lambda_x = s.tau_x.cwiseInverse(); }

  void update_z(EpState& s, const Eigen::VectorXd& a_x_hat) override {
    const RProvider r_jx = jx_provider(s.lambda_x);
    const double initial =
        s.tilt_z.size() > 0 ? mean_of(s.tilt_z) : alpha_ / mean_of(s.tau_x);
    const ScalarFixedPoint fp =
        samp_solve_tilt_z(a_x_hat, s.m, problem_.y, problem_.likelihood, r_jx, initial,
                          strategy_.inner_tolerance, strategy_.inner_max_iterations,
                          strategy_.precision_floor);
    s.tilt_z = Eigen::VectorXd::Constant(a_x_hat.size(), fp.value);
    z_residual_ = fp.residual;
  }

  void update_x(EpState& s, const Eigen::VectorXd& at_m) override {
    s.tau_m = s.tilt_z.cwiseProduct((1.0 - s.tilt_z.array() * s.tau_z.array()).matrix());
    s.lambda_z = s.tau_z.cwiseInverse() - s.tilt_z;
    clip_events += clip_below(s.lambda_z, strategy_.precision_floor);
    const RProvider r_jz = jz_provider(s.lambda_z);
    double initial = s.tilt_x.size() > 0 ? mean_of(s.tilt_x) : mean_of(s.tau_m);
    initial = std::max(initial, strategy_.precision_floor);
    const ScalarFixedPoint fp = samp_solve_tilt_x(
        s.x_hat, at_m, problem_.prior, r_jz, initial, strategy_.inner_tolerance,
        strategy_.inner_max_iterations, strategy_.precision_floor);
    s.tilt_x = Eigen::VectorXd::Constant(at_m.size(), fp.value);
    inner_residual = std::max(z_residual_, fp.residual);
  }

  void after_x_moments(EpState& s) override {
    s.lambda_x = s.tau_x.cwiseInverse() - s.tilt_x;
    clip_events += clip_below(s.lambda_x, strategy_.precision_floor);
  }

 private:
  RProvider jz_provider(const Eigen::VectorXd& lambda_z) const {
    const RSource& src = strategy_.r_jz;
    switch (src.kind) {
      case RSourceKind::ClosedFormMp:
        return [lz = lambda_z, alpha = alpha_](double w) { return r_mp_jz(lz, alpha, w); };
      case RSourceKind::ScaledSpectrum: {
        const double c = mean_of(lambda_z);
        return [sp = gram_, c](double w) { return c * r_transform_real(*sp, c * w); };
      }
      case RSourceKind::Respectralize: {
        const Eigen::MatrixXd scaled = lambda_z.cwiseSqrt().asDiagonal() * problem_.matrix;
        auto sp = std::make_shared<EmpiricalSpectrum>(
            spectrum_of_symmetric(scaled.transpose() * scaled));
        return [sp](double w) { return r_transform_real(*sp, w); };
      }
      case RSourceKind::Constant:
        return [v = src.value](double) { return v; };
      case RSourceKind::FreeCompression: {
        auto sp = std::make_shared<EmpiricalSpectrum>(lambda_z);
        return [sp, d2 = common_sv2_, alpha = alpha_](double w) {
          return d2 * r_transform_real(*sp, d2 * w / alpha);
        };
      }
    }
    throw DomainError("samp: unknown R source");
  }

  RProvider jx_provider(const Eigen::VectorXd& lambda_x) const {
    const RSource& src = strategy_.r_jx;
    switch (src.kind) {
      case RSourceKind::ClosedFormMp:
        return [lx = lambda_x, alpha = alpha_](double w) { return r_mp_jx(lx, alpha, w); };
      case RSourceKind::ScaledSpectrum: {
        const double c = mean_of(lambda_x.cwiseInverse());
        return [sp = cogram_, c](double w) { return c * r_transform_real(*sp, c * w); };
      }
      case RSourceKind::Respectralize: {
        const Eigen::MatrixXd scaled = problem_.matrix * lambda_x.cwiseSqrt().cwiseInverse().asDiagonal();
        auto sp = std::make_shared<EmpiricalSpectrum>(
            spectrum_of_symmetric(scaled * scaled.transpose()));
        return [sp](double w) { return r_transform_real(*sp, w); };
      }
      case RSourceKind::Constant:
        return [v = src.value](double) { return v; };
      case RSourceKind::FreeCompression: {
        auto sp = std::make_shared<EmpiricalSpectrum>(Eigen::VectorXd(lambda_x.cwiseInverse()));
        return [sp, d2 = common_sv2_, alpha = alpha_](double w) {
          return d2 * r_transform_real(*sp, alpha * d2 * w);
        };
      }
    }
    throw DomainError("samp: unknown R source");
  }

  static double common_squared_singular_value(const ProblemInstance& p) {
    Eigen::VectorXd sv = p.singular_values;
    if (sv.size() == 0) {
      const Eigen::MatrixXd small = p.rows() <= p.cols() ? Eigen::MatrixXd(p.matrix * p.matrix.transpose())
                                                         : Eigen::MatrixXd(p.matrix.transpose() * p.matrix);
      sv = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(small, Eigen::EigenvaluesOnly)
               .eigenvalues()
               .cwiseMax(0.0)
               .cwiseSqrt();
    }
    const double lo = sv.minCoeff(), hi = sv.maxCoeff();
    if (!(hi > 0.0) || hi - lo > 1e-8 * hi)
      throw DomainError("samp: free-compression needs equal nonzero singular values, got range [" +
                        std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return hi * hi;
  }

  const ProblemInstance& problem_;
  SecondOrderStrategy strategy_;
  double alpha_;
  std::shared_ptr<EmpiricalSpectrum> gram_;
  std::shared_ptr<EmpiricalSpectrum> cogram_;
  double common_sv2_ = 1.0;
  double z_residual_ = 0.0;
};

std::unique_ptr<SecondOrderUpdater> make_updater(const ProblemInstance& p,
                                                 const SecondOrderStrategy& strategy) {
  switch (strategy.kind) {
    case StrategyKind::GampFull:
      return std::make_unique<GampFullUpdater>(p, strategy.precision_floor);
    case StrategyKind::GampIid:
      return std::make_unique<GampIidUpdater>(p, strategy.precision_floor);
    case StrategyKind::ExactEp:
      return std::make_unique<ExactEpUpdater>(p, strategy);
    case StrategyKind::SampRTransform:
      return std::make_unique<SampUpdater>(p, strategy);
  }
  throw DomainError("unknown strategy");
}

}  // namespace

// ---------------------------------------------------------------------------
// Solver.

Solver::Solver(const ProblemInstance& problem, SolverConfig config)
    : problem_(&problem), config_(std::move(config)) {
  validate(config_);
  validate(problem.prior);
  validate(problem.likelihood);
  if (!is_prior(problem.prior)) throw DomainError("solver: prior slot holds a likelihood");
  if (is_prior(problem.likelihood)) throw DomainError("solver: likelihood slot holds a prior");
  if (problem.matrix.rows() != problem.y.size())
    throw DimensionError("solver: A has " + std::to_string(problem.matrix.rows()) +
                         " rows but y has " + std::to_string(problem.y.size()) + " entries");
  if (problem.x_true.size() != 0 && problem.x_true.size() != problem.matrix.cols())
    throw DimensionError("solver: x_true does not match the columns of A");
  updater_ = make_updater(problem, config_.strategy);
}

Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;
Solver& Solver::operator=(Solver&&) noexcept = default;

EpState Solver::initial_state() const {
  const Eigen::Index n = problem_->matrix.rows(), k = problem_->matrix.cols();
  const TiltedMoments pm = prior_moments(problem_->prior);
  EpState s;
  s.x_hat = Eigen::VectorXd::Constant(k, pm.mean);
  s.tau_x = Eigen::VectorXd::Constant(k, pm.variance);
  s.m = Eigen::VectorXd::Zero(n);
  s.tau_m = Eigen::VectorXd::Zero(n);
  s.kappa_x = s.x_hat;
  s.kappa_z = problem_->matrix * s.x_hat;
  s.z_hat = s.kappa_z;
  s.tau_z = Eigen::VectorXd::Zero(n);
  updater_->bootstrap(s);
  return s;
}

void Solver::sweep(EpState& s) {
  const ProblemInstance& p = *problem_;
  const double beta = config_.damping;
  const std::span<const ChannelModel> prior(&p.prior, 1);
  const std::span<const ChannelModel> lik(&p.likelihood, 1);

  const Eigen::VectorXd a_x_hat = p.matrix * s.x_hat;
  updater_->update_z(s, a_x_hat);
  require_finite(s.tilt_z, "tilt_z", s.iteration);

  s.kappa_z = a_x_hat - s.m.cwiseQuotient(s.tilt_z);                       // G1
  VectorMoments zm = vector_moments(lik, s.kappa_z, s.tilt_z, p.y);         // G2, G3
  s.z_hat = std::move(zm.mean);
  s.tau_z = std::move(zm.variance);
  const Eigen::VectorXd m_new = s.tilt_z.cwiseProduct(s.z_hat - s.kappa_z);  // G4
  s.m = beta == 1.0 ? m_new : Eigen::VectorXd(beta * m_new + (1.0 - beta) * s.m);
  require_finite(s.m, "m", s.iteration);

  const Eigen::VectorXd at_m = p.matrix.transpose() * s.m;
  updater_->update_x(s, at_m);
  require_finite(s.tilt_x, "tilt_x", s.iteration);

  s.kappa_x = at_m.cwiseQuotient(s.tilt_x) + s.x_hat;              // G5
  VectorMoments xm = vector_moments(prior, s.kappa_x, s.tilt_x);   // G6, G7
  s.x_hat = beta == 1.0 ? xm.mean : Eigen::VectorXd(beta * xm.mean + (1.0 - beta) * s.x_hat);
  s.tau_x = std::move(xm.variance);
  require_finite(s.x_hat, "x_hat", s.iteration);
  require_finite(s.tau_x, "tau_x", s.iteration);
  updater_->after_x_moments(s);
  ++s.iteration;
}

void Solver::finalize(EpState& s) const {
  const double floor = config_.strategy.precision_floor;
  if (s.tilt_z.size() == 0 || s.tilt_x.size() == 0) return;  // no sweep yet
  if (!updater_->has_covariance()) {
    s.lambda_x = s.tau_x.cwiseInverse() - s.tilt_x;
    clip_below(s.lambda_x, floor);
    s.lambda_z = s.tau_z.cwiseInverse() - s.tilt_z;
    clip_below(s.lambda_z, floor);
  }
  s.rho_x = s.tilt_x.cwiseProduct(s.kappa_x);
  s.rho_z = s.tilt_z.cwiseProduct(s.kappa_z);
  s.gamma_x = (s.lambda_x + s.tilt_x).cwiseProduct(s.x_hat) - s.rho_x;
  s.gamma_z = (s.lambda_z + s.tilt_z).cwiseProduct(s.z_hat) - s.rho_z;
}

std::size_t Solver::clip_events() const { return updater_->clip_events; }
double Solver::last_inner_residual() const { return updater_->inner_residual; }

void gamp_first_order_sweep(EpState& state, Solver& solver) { solver.sweep(state); }

double mse(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
  if (truth.size() == 0) return kNaN;
  return (estimate - truth).squaredNorm() / static_cast<double>(truth.size());
}

double nmse_db(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
  if (truth.size() == 0) return kNaN;
  return 10.0 * std::log10((estimate - truth).squaredNorm() / truth.squaredNorm());
}

RunResult run(const ProblemInstance& problem, const SolverConfig& config,
              const StateObserver& observer) {
  Solver solver(problem, config);
  RunResult result;
  result.state = solver.initial_state();
  const bool has_cov = config.strategy.kind == StrategyKind::ExactEp;
  const bool has_inner = config.strategy.kind == StrategyKind::SampRTransform;

  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    const Eigen::VectorXd previous = result.state.x_hat;
    try {
      solver.sweep(result.state);
    } catch (const std::exception& e) {
      result.status = RunStatus::Failed;
      result.message = e.what();
      break;
    }
    const EpState& s = result.state;
    const double prev_norm = previous.norm();
    const double diff = (s.x_hat - previous).norm();
    const double change = prev_norm > 0.0 ? diff / prev_norm
                                          : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());

    IterationRecord rec{};
    rec.iteration = s.iteration;
    rec.mse = mse(s.x_hat, problem.x_true);
    rec.nmse_db = nmse_db(s.x_hat, problem.x_true);
    rec.residual_f1 = (s.z_hat - problem.matrix * s.x_hat).cwiseAbs().maxCoeff();
    rec.residual_f2 = has_cov ? std::max((s.sigma_x_diag - s.tau_x).cwiseAbs().maxCoeff(),
                                         (s.sigma_z_diag - s.tau_z).cwiseAbs().maxCoeff())
                              : kNaN;
    rec.clip_count = solver.clip_events();
    rec.inner_residual = has_inner ? solver.last_inner_residual() : kNaN;
    rec.change = change;
    result.trajectory.records.push_back(rec);
    if (has_inner) result.max_inner_residual = std::max(result.max_inner_residual, rec.inner_residual);
    if (observer) observer(s);
    if (change <= config.tolerance) {
      result.status = RunStatus::Converged;
      break;
    }
  }
  result.iterations = result.state.iteration;
  result.clip_events = solver.clip_events();
  solver.finalize(result.state);
  return result;
}

}  // namespace samp
