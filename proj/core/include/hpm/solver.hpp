#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <optional>
#include <vector>

#include "hpm/sparse.hpp"

namespace hpm {

class ColumnCatalog;

/// Per-column L1 weights; 0 leaves a column unpenalized. The intercept is
/// never penalized and is not part of the vector. Weights are taken as given:
/// nothing here rescales them by column spread.
struct PenaltySpec {
  std::vector<double> weights;

  std::size_t size() const noexcept { return weights.size(); }
  bool penalized(std::size_t j) const { return weights[j] > 0.0; }
  std::size_t penalized_count() const;

  static PenaltySpec uniform(std::size_t n_cols, double weight = 1.0);
  /// Player blocks weight 1, team-season and special-teams blocks weight 0.
  static PenaltySpec for_catalog(const ColumnCatalog& catalog);

  void validate(std::size_t n_cols) const;
};

struct FitConfig {
  std::size_t n_lambda = 100;
  double lambda_min_ratio = 0.01;
  /// Relative change of the penalized objective between sweeps.
  double tol = 1e-9;
  /// Largest optimality-condition residual accepted at convergence, per
  /// observation (the absolute bound is kkt_tol * n).
  double kkt_tol = 1e-7;
  std::size_t max_sweeps = 10000;
  /// Gradient bound (max-abs) for the unpenalized sub-model fit.
  double base_grad_tol = 1e-10;
  std::size_t base_max_sweeps = 200000;

  void validate() const;
};

struct SingleFit {
  double alpha = 0.0;
  std::vector<double> beta;
  double lambda = 0.0;
  double nll = 0.0;
  double objective = 0.0;
  /// Nonzero penalized coefficients + every unpenalized coefficient + 1.
  std::size_t n_nonzero = 0;
  std::size_t n_nonzero_penalized = 0;
  /// Count of coefficients (intercept included) that are exactly nonzero.
  std::size_t n_nonzero_any = 0;
  std::size_t sweeps = 0;
  bool converged = false;
  /// Penalized objective before the first sweep and after every sweep.
  std::vector<double> objective_trace;

  double deviance() const noexcept { return 2.0 * nll; }
};

struct PathFit {
  std::vector<double> lambdas;
  std::vector<SingleFit> fits;

  std::size_t size() const noexcept { return fits.size(); }
  double deviance(std::size_t i) const { return fits[i].deviance(); }
  std::size_t k(std::size_t i) const { return fits[i].n_nonzero; }
  bool all_converged() const;
};

/// Raised when the unpenalized sub-model does not converge, which usually
/// means a team-season or scenario column separates the responses.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// sum_i log(1 + exp(-y_i eta_i)), evaluated without overflow.
double neg_log_lik(std::span<const double> eta, std::span<const double> y);

/// Derivative of the per-row loss with respect to eta_i.
double loss_derivative(double eta, double y);

struct Gradient {
  double intercept = 0.0;
  std::vector<double> columns;
};

/// Gradient of neg_log_lik at (alpha, beta).
Gradient nll_gradient(const SparseColumnMatrix& x, std::span<const double> y, double alpha,
                      std::span<const double> beta);

/// eta = alpha + X beta.
std::vector<double> linear_predictor(const SparseColumnMatrix& x, double alpha,
                                     std::span<const double> beta);

double penalized_objective(const SparseColumnMatrix& x, std::span<const double> y,
                           const PenaltySpec& penalty, double lambda, double alpha,
                           std::span<const double> beta);

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

/// An unpenalized column along which every nonzero x_ij * y_i has the same
/// sign, so the unpenalized fit has no finite minimizer. Returns
/// npos when y itself holds one class.
std::optional<std::size_t> one_signed_column(const SparseColumnMatrix& x,
                                             std::span<const double> y,
                                             const PenaltySpec& penalty);

/// Fits intercept and unpenalized columns with every penalized coefficient
/// held at zero. Throws ConvergenceError when the gradient bound is not met.
SingleFit fit_unpenalized(const SparseColumnMatrix& x, std::span<const double> y,
                          const PenaltySpec& penalty, const FitConfig& config = {});

struct LambdaMax {
  double value = 0.0;
  SingleFit base;  // unpenalized sub-model the value was computed at
};

/// Smallest lambda whose minimizer has every penalized coefficient at zero.
/// Throws std::invalid_argument when no column is penalized.
LambdaMax lambda_max(const SparseColumnMatrix& x, std::span<const double> y,
                     const PenaltySpec& penalty, const FitConfig& config = {});

/// Cyclic coordinate descent on the penalized objective at one lambda.
/// A fit that hits max_sweeps comes back with converged == false.
SingleFit fit_at_lambda(const SparseColumnMatrix& x, std::span<const double> y,
                        const PenaltySpec& penalty, double lambda,
                        const SingleFit* warm_start = nullptr, const FitConfig& config = {});

/// Geometric grid from lambda_max down to lambda_min_ratio * lambda_max.
std::vector<double> lambda_grid(double lambda_max, const FitConfig& config);

PathFit fit_path(const SparseColumnMatrix& x, std::span<const double> y,
                 const PenaltySpec& penalty, const FitConfig& config = {});

/// Path over a caller-supplied decreasing grid, warm-started from the
/// unpenalized sub-model.
PathFit fit_path_on_grid(const SparseColumnMatrix& x, std::span<const double> y,
                         const PenaltySpec& penalty, std::span<const double> lambdas,
                         const FitConfig& config = {});

struct KktViolation {
  /// Coefficient index; npos for the intercept.
  std::size_t index;
  double gradient;
  double coefficient;
  double excess;  // amount by which the condition is missed

  static constexpr std::size_t intercept = static_cast<std::size_t>(-1);
};

struct KktReport {
  std::vector<KktViolation> violations;
  double max_residual = 0.0;

  bool ok() const noexcept { return violations.empty(); }
};

/// Subgradient optimality check of `fit` with absolute tolerance `tol`.
KktReport kkt_check(const SingleFit& fit, const SparseColumnMatrix& x, std::span<const double> y,
                    const PenaltySpec& penalty, double tol);

}  // namespace hpm
