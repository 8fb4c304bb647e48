#pragma once

// GAMP first-order recursion with pluggable second-order ("variance") rules:
//
//   gamp-full        per-entry updates through A∘A
//   gamp-iid         scalar updates for iid N(0, 1/N) matrices
//   exact-ep         moment matching with an explicit (Lx + A^T Lz A)^{-1}
//   samp-rtransform  scalar updates from R-transforms of J_z and J_x
//
// Naming: `tilt_*` are the diagonal precisions of the Gaussian tilts applied
// to the scalar channels, `lambda_*` the diagonal precisions the channels
// send to the linear factor. Both are stored as vectors.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "samp/ensembles.hpp"
#include "samp/free_probability.hpp"

namespace samp {

struct GampState {
  Eigen::VectorXd x_hat;    // K
  Eigen::VectorXd tau_x;    // K
  Eigen::VectorXd m;        // N
  Eigen::VectorXd tau_m;    // N
  Eigen::VectorXd kappa_x;  // K
  Eigen::VectorXd kappa_z;  // N
  Eigen::VectorXd z_hat;    // N
  Eigen::VectorXd tau_z;    // N
  Eigen::VectorXd tilt_x;   // K
  Eigen::VectorXd tilt_z;   // N
  std::size_t iteration = 0;
};

/// GAMP state extended with the moment-matching quantities of the stationary
/// point: lambda (precision of the messages into the linear factor), gamma
/// (their precision-weighted means), rho = tilt * kappa, and the diagonals of
/// the Gaussian belief covariances Sigma_x and Sigma_z = A Sigma_x A^T.
struct EpState : GampState {
  Eigen::VectorXd lambda_x;      // K
  Eigen::VectorXd lambda_z;      // N
  Eigen::VectorXd gamma_x;       // K
  Eigen::VectorXd gamma_z;       // N
  Eigen::VectorXd rho_x;         // K
  Eigen::VectorXd rho_z;         // N
  Eigen::VectorXd sigma_x_diag;  // K
  Eigen::VectorXd sigma_z_diag;  // N
};

enum class StrategyKind { GampFull, GampIid, ExactEp, SampRTransform };

std::string_view strategy_name(StrategyKind kind);
std::optional<StrategyKind> parse_strategy_kind(std::string_view name);

/// Where the R-transform of J_z = A^T Lz A (or J_x = A Lx^{-1} A^T) comes from.
enum class RSourceKind {
  ClosedFormMp,    // Marchenko-Pastur closed form, iid N(0, 1/N) matrices
  ScaledSpectrum,  // eigenvalues of A^T A (A A^T) scaled by the mean precision;
                   // exact when Lz (Lx) is proportional to the identity
  Respectralize,   // dense eigendecomposition every iteration, O(K^3); validation only
  Constant,        // R == value
  // A with all nonzero singular values equal to d (row-orthogonal: d = 1) and
  // Haar singular vectors on the large side: J_x (N <= K) is a compression of
  // d^2 Lx^{-1}, so R_Jx(w) = d^2 R_{Lx^{-1}}(alpha d^2 w); J_z (N >= K)
  // likewise with R_Jz(w) = d^2 R_{Lz}(d^2 w / alpha). O(K) per evaluation.
  FreeCompression,
};

std::string_view r_source_name(RSourceKind kind);
std::optional<RSourceKind> parse_r_source_kind(std::string_view name);

struct RSource {
  RSourceKind kind = RSourceKind::ClosedFormMp;
  double value = 0.0;  // Constant only
};

/// Sign used when forming the linear-factor covariance. Plus is
/// (Lx + A^T Lz A)^{-1}, the marginal of the linear-factor belief; Minus is
/// (Lx - A^T Lz A)^{-1}, kept only for study.
enum class CovarianceSign { Plus, Minus };

struct SecondOrderStrategy {
  StrategyKind kind = StrategyKind::GampFull;
  RSource r_jz;
  RSource r_jx;
  double precision_floor = 1e-8;
  CovarianceSign covariance_sign = CovarianceSign::Plus;
  double inner_tolerance = 1e-10;
  int inner_max_iterations = 500;
};

void validate(const SecondOrderStrategy& strategy);

struct SolverConfig {
  std::size_t max_iterations = 500;
  double tolerance = 1e-8;  // on ||x_new - x_old|| / ||x_old||
  double damping = 0.7;     // applied to x_hat and m
  SecondOrderStrategy strategy;
};

void validate(const SolverConfig& config);

struct IterationRecord {
  std::size_t iteration;
  double mse;
  double nmse_db;
  double residual_f1;  // max |z_hat - A x_hat|
  double residual_f2;  // exact-ep: max |diag(Sigma) - tau|; NaN otherwise
  std::size_t clip_count;
  double inner_residual;  // samp-rtransform only; NaN otherwise
  double change;          // relative change of x_hat
};

struct Trajectory {
  std::vector<IterationRecord> records;
};

enum class RunStatus { Converged, MaxIterations, Failed };
std::string_view run_status_name(RunStatus status);

struct RunResult {
  Trajectory trajectory;
  EpState state;
  RunStatus status = RunStatus::MaxIterations;
  std::string message;  // failure description
  std::size_t iterations = 0;
  std::size_t clip_events = 0;
  double max_inner_residual = 0.0;
};

// ---------------------------------------------------------------------------
// Second-order rules as standalone operations.

struct GampFullUpdate {
  Eigen::VectorXd tilt_z;
  Eigen::VectorXd tau_m;
  Eigen::VectorXd tilt_x;
  std::size_t clipped = 0;
};

/// tilt_z = 1 / ((A∘A) tau_x), tau_m = tilt_z (1 - tilt_z tau_z),
/// tilt_x = (A∘A)^T tau_m, with tilts floored at `floor`.
GampFullUpdate second_order_gamp_full(const GampState& state, const Eigen::MatrixXd& a,
                                      double floor = 1e-8);

struct GampIidUpdate {
  double tilt_z;
  Eigen::VectorXd tau_m;
  double tilt_x;
  std::size_t clipped = 0;
};

/// tilt_z = alpha / <tau_x>, tilt_x = <tau_m>.
GampIidUpdate second_order_iid(const GampState& state, double alpha, double floor = 1e-8);

struct EpOptions {
  double floor = 1e-8;
  CovarianceSign sign = CovarianceSign::Plus;
};

/// z-side moment matching: lambda_z = 1/tau_z - tilt_z, Sigma_x from the
/// current lambda_x and the new lambda_z, tilt_z = 1/diag(A Sigma_x A^T) - lambda_z.
/// Fills sigma_x_diag and sigma_z_diag. Returns the number of clipped entries.
std::size_t ep_update_z_side(EpState& state, const Eigen::MatrixXd& a, const EpOptions& options);
/// x-side: lambda_x = 1/tau_x - tilt_x, Sigma_x rebuilt from the new lambda_x,
/// tilt_x = 1/diag(Sigma_x) - lambda_x.
std::size_t ep_update_x_side(EpState& state, const Eigen::MatrixXd& a, const EpOptions& options);

/// Both sides in sequence.
std::size_t second_order_exact_ep(EpState& state, const Eigen::MatrixXd& a,
                                  const EpOptions& options = {});

using RProvider = std::function<double(double)>;

struct ScalarFixedPoint {
  double value;
  double residual;
  int iterations;
};

/// Solves x = f(x) for x > 0: undamped steps, halving the step whenever the
/// residual |f(x) - x| fails to decrease. Throws NumericError after
/// `max_iterations` updates.
ScalarFixedPoint solve_scalar_fixed_point(const std::function<double(double)>& f, double x0,
                                          double tolerance, int max_iterations);

/// tilt_x = R_{J_z}(-<sigma_x(x_hat + A^T m / tilt_x; tilt_x)>), solved for
/// scalar tilt_x given x_hat, A^T m and the provider.
ScalarFixedPoint samp_solve_tilt_x(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& at_m,
                                   const ChannelModel& prior, const RProvider& r_jz,
                                   double initial, double tolerance, int max_iterations,
                                   double floor = 1e-8);

/// tilt_z = 1 / R_{J_x}(-<tau_m>), tau_m = tilt_z (1 - tilt_z sigma_z(A x_hat -
/// m_prev / tilt_z; tilt_z)), solved for scalar tilt_z.
ScalarFixedPoint samp_solve_tilt_z(const Eigen::VectorXd& a_x_hat, const Eigen::VectorXd& m_prev,
                                   const Eigen::VectorXd& y, const ChannelModel& likelihood,
                                   const RProvider& r_jx, double initial, double tolerance,
                                   int max_iterations, double floor = 1e-8);

struct SampUpdate {
  ScalarFixedPoint tilt_x;
  ScalarFixedPoint tilt_z;
};

/// Both scalar identities evaluated at the current state (x_hat, m, kappa
/// inputs held fixed).
SampUpdate second_order_samp(const GampState& state, const ProblemInstance& problem,
                             const RProvider& r_jz, const RProvider& r_jx,
                             double tolerance = 1e-10, int max_iterations = 500,
                             double floor = 1e-8);

// ---------------------------------------------------------------------------
// Iteration.

class SecondOrderUpdater;

/// Per-run solver: owns the precomputed matrix products and the strategy.
class Solver {
 public:
  Solver(const ProblemInstance& problem, SolverConfig config);
  ~Solver();
  Solver(Solver&&) noexcept;
  Solver& operator=(Solver&&) noexcept;

  /// Tabula-rasa start: x_hat = prior mean, tau_x = prior variance, m = 0;
  /// then the strategy's bootstrap of the tilts.
  EpState initial_state() const;

  /// One pass of (z-side second order, G1-G4, x-side second order, G5-G7).
  /// Throws DivergedError on non-finite values.
  void sweep(EpState& state);

  /// Fills lambda/gamma/rho (and the EP covariance diagonals when available)
  /// from the GAMP quantities of the state.
  void finalize(EpState& state) const;

  std::size_t clip_events() const;
  double last_inner_residual() const;

  const ProblemInstance& problem() const { return *problem_; }
  const SolverConfig& config() const { return config_; }

 private:
  const ProblemInstance* problem_;
  SolverConfig config_;
  std::unique_ptr<SecondOrderUpdater> updater_;
};

/// One first-order sweep (G1-G7) with the strategy's updates interleaved.
void gamp_first_order_sweep(EpState& state, Solver& solver);

using StateObserver = std::function<void(const EpState&)>;

RunResult run(const ProblemInstance& problem, const SolverConfig& config,
              const StateObserver& observer = {});

double mse(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);
/// 10 log10(||estimate - truth||^2 / ||truth||^2)
double nmse_db(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);

}  // namespace samp
