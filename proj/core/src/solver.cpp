#include "hpm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "hpm/design.hpp"

namespace hpm {

namespace {

constexpr double kLambdaMaxMargin = 1e-9;
constexpr std::size_t kMaxModelSweeps = 100000;

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": length " + std::to_string(a) + " vs " +
                                std::to_string(b));
  }
}

// log(1 + exp(-m)) for margin m = y * eta.
double logistic_loss(double margin) {
  return margin > 0.0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Residual of one coordinate's optimality condition, given its gradient.
double kkt_residual(double gradient, double coef, double threshold, bool penalized) {
  if (!penalized) return std::abs(gradient);
  if (coef == 0.0) return std::max(0.0, std::abs(gradient) - threshold);
  return std::abs(gradient + threshold * sign(coef));
}

// Majorized cyclic coordinate descent state. Each coordinate step minimizes
// the quadratic upper bound with curvature sum_i x_ij^2 / 4, so the penalized
// objective never increases.
class CoordinateDescent {
 public:
  CoordinateDescent(const SparseColumnMatrix& x, std::span<const double> y,
                    const PenaltySpec& penalty)
      : x_(x), y_(y), penalty_(penalty), n_(static_cast<double>(x.n_rows())) {
    require_same_length(y.size(), x.n_rows(), "response vs design rows");
    penalty.validate(x.n_cols());
    curvature_.resize(x.n_cols());
    for (std::size_t j = 0; j < x.n_cols(); ++j) {
      double s = 0.0;
      for (double v : x.col_values(j)) s += v * v;
      curvature_[j] = 0.25 * s;
    }
    for (std::size_t j = 0; j < x.n_cols(); ++j) {
      if (!penalty.penalized(j)) unpenalized_.push_back(j);
    }
    beta_.assign(x.n_cols(), 0.0);
    reset(0.0, beta_);
  }

  void reset(double alpha, std::span<const double> beta) {
    require_same_length(beta.size(), x_.n_cols(), "warm start coefficients");
    alpha_ = alpha;
    beta_.assign(beta.begin(), beta.end());
    eta_ = linear_predictor(x_, alpha_, beta_);
    resid_.resize(eta_.size());
    for (std::size_t i = 0; i < eta_.size(); ++i) resid_[i] = loss_derivative(eta_[i], y_[i]);
  }

  double nll() const { return neg_log_lik(eta_, y_); }

  double objective(double lambda) const {
    double pen = 0.0;
    for (std::size_t j = 0; j < beta_.size(); ++j) pen += penalty_.weights[j] * std::abs(beta_[j]);
    return nll() + n_ * lambda * pen;
  }

  // One majorized step on the intercept; returns the pre-step residual.
  double step_intercept() {
    double g = 0.0;
    for (double r : resid_) g += r;
    const double h = 0.25 * n_;
    const double delta = -g / h;
    if (delta != 0.0) {
      alpha_ += delta;
      for (std::size_t i = 0; i < eta_.size(); ++i) {
        eta_[i] += delta;
        resid_[i] = loss_derivative(eta_[i], y_[i]);
      }
    }
    return std::abs(g);
  }

  double step(std::size_t j, double lambda) {
    const double h = curvature_[j];
    if (h == 0.0) return 0.0;
    const double g = x_.column_dot(j, resid_);
    const double w = penalty_.weights[j];
    const double threshold = n_ * lambda * w;
    const double b = beta_[j];
    const double residual = kkt_residual(g, b, threshold, w > 0.0);
    const double nb = w > 0.0 ? soft_threshold(h * b - g, threshold) / h : b - g / h;
    if (nb != b) {
      const double delta = nb - b;
      beta_[j] = nb;
      const auto rows = x_.col_rows(j);
      const auto vals = x_.col_values(j);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t i = rows[k];
        eta_[i] += vals[k] * delta;
        resid_[i] = loss_derivative(eta_[i], y_[i]);
      }
    }
    return residual;
  }

  double sweep(std::span<const std::size_t> coords, double lambda) {
    double worst = step_intercept();
    for (std::size_t j : coords) worst = std::max(worst, step(j, lambda));
    return worst;
  }

  double sweep_all(double lambda) {
    double worst = step_intercept();
    for (std::size_t j = 0; j < beta_.size(); ++j) worst = std::max(worst, step(j, lambda));
    return worst;
  }

  std::vector<std::size_t> active_set() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < beta_.size(); ++j) {
      if (!penalty_.penalized(j) || beta_[j] != 0.0) out.push_back(j);
    }
    return out;
  }

  const std::vector<std::size_t>& unpenalized() const { return unpenalized_; }
  double alpha() const { return alpha_; }
  const std::vector<double>& beta() const { return beta_; }
  const std::vector<double>& resid() const { return resid_; }
  double n() const { return n_; }

  // Fixed-curvature Hessian bound [1, X_A]'[1, X_A] / 4 over the intercept
  // (index 0) and the columns in `coords`, accumulated row by row.
  std::vector<double> model_hessian(std::span<const std::size_t> coords) const {
    const std::size_t m = coords.size() + 1;
    std::vector<std::size_t> start(x_.n_rows() + 1, 0);
    for (std::size_t j : coords) {
      for (std::size_t i : x_.col_rows(j)) ++start[i + 1];
    }
    for (std::size_t i = 0; i < x_.n_rows(); ++i) start[i + 1] += start[i];
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    std::vector<std::size_t> slot(start.back());
    std::vector<double> value(start.back());
    for (std::size_t k = 0; k < coords.size(); ++k) {
      const auto rows = x_.col_rows(coords[k]);
      const auto vals = x_.col_values(coords[k]);
      for (std::size_t e = 0; e < rows.size(); ++e) {
        const std::size_t at = fill[rows[e]]++;
        slot[at] = k + 1;
        value[at] = vals[e];
      }
    }
    std::vector<double> g(m * m, 0.0);
    g[0] = n_;
    for (std::size_t i = 0; i < x_.n_rows(); ++i) {
      for (std::size_t a = start[i]; a < start[i + 1]; ++a) {
        g[slot[a]] += value[a];
        for (std::size_t b = start[i]; b < start[i + 1]; ++b) {
          g[slot[a] * m + slot[b]] += value[a] * value[b];
        }
      }
    }
    for (std::size_t c = 1; c < m; ++c) g[c * m] = g[c];
    for (double& v : g) v *= 0.25;
    return g;
  }

  // Exact gradient over the intercept and `coords`, and its worst KKT residual.
  double model_gradient(std::span<const std::size_t> coords, double lambda,
                        std::vector<double>& grad) const {
    grad.assign(coords.size() + 1, 0.0);
    for (double r : resid_) grad[0] += r;
    double worst = std::abs(grad[0]);
    for (std::size_t k = 0; k < coords.size(); ++k) {
      const std::size_t j = coords[k];
      grad[k + 1] = x_.column_dot(j, resid_);
      const double w = penalty_.weights[j];
      worst = std::max(worst, kkt_residual(grad[k + 1], beta_[j], n_ * lambda * w, w > 0.0));
    }
    return worst;
  }

  // Minimizes the fixed-curvature quadratic bound around the current point over
  // `coords` by cyclic coordinate descent, then moves there if the penalized
  // objective does not increase. Returns the new objective, or nothing if the
  // point was kept.
  std::optional<double> model_step(std::span<const std::size_t> coords,
                                   const std::vector<double>& hessian,
                                   std::vector<double> grad, double lambda, double inner_tol,
                                   double current) {
    const std::size_t m = coords.size() + 1;
    std::vector<double> z(m);
    z[0] = alpha_;
    for (std::size_t k = 0; k < coords.size(); ++k) z[k + 1] = beta_[coords[k]];
    for (std::size_t pass = 0; pass < kMaxModelSweeps; ++pass) {
      double worst = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        const double h = hessian[c * m + c];
        if (h == 0.0) continue;
        const double w = c == 0 ? 0.0 : penalty_.weights[coords[c - 1]];
        const double threshold = n_ * lambda * w;
        const double b = z[c];
        worst = std::max(worst, kkt_residual(grad[c], b, threshold, w > 0.0));
        const double nb = w > 0.0 ? soft_threshold(h * b - grad[c], threshold) / h
                                  : b - grad[c] / h;
        if (nb == b) continue;
        const double delta = nb - b;
        z[c] = nb;
        for (std::size_t r = 0; r < m; ++r) grad[r] += delta * hessian[r * m + c];
      }
      if (worst <= inner_tol) break;
    }

    const double old_alpha = alpha_;
    std::vector<double> old_beta(coords.size());
    std::vector<double> old_eta = eta_;
    const double shift = z[0] - alpha_;
    alpha_ = z[0];
    if (shift != 0.0) {
      for (double& e : eta_) e += shift;
    }
    for (std::size_t k = 0; k < coords.size(); ++k) {
      const std::size_t j = coords[k];
      old_beta[k] = beta_[j];
      const double delta = z[k + 1] - beta_[j];
      if (delta == 0.0) continue;
      beta_[j] = z[k + 1];
      const auto rows = x_.col_rows(j);
      const auto vals = x_.col_values(j);
      for (std::size_t e = 0; e < rows.size(); ++e) eta_[rows[e]] += vals[e] * delta;
    }
    const double candidate = objective(lambda);
    if (!(candidate <= current)) {
      alpha_ = old_alpha;
      for (std::size_t k = 0; k < coords.size(); ++k) beta_[coords[k]] = old_beta[k];
      eta_ = std::move(old_eta);
      return std::nullopt;
    }
    for (std::size_t i = 0; i < eta_.size(); ++i) resid_[i] = loss_derivative(eta_[i], y_[i]);
    return candidate;
  }

  SingleFit snapshot(double lambda) const {
    SingleFit f;
    f.alpha = alpha_;
    f.beta = beta_;
    f.lambda = lambda;
    f.nll = nll();
    f.objective = objective(lambda);
    f.n_nonzero = 1 + unpenalized_.size();
    for (std::size_t j = 0; j < beta_.size(); ++j) {
      if (beta_[j] == 0.0) continue;
      ++f.n_nonzero_any;
      if (penalty_.penalized(j)) ++f.n_nonzero_penalized;
    }
    f.n_nonzero += f.n_nonzero_penalized;
    if (alpha_ != 0.0) ++f.n_nonzero_any;
    return f;
  }

  // Full sweep, then majorize-minimize steps over the active set until its
  // KKT residuals are within bound and the objective settles; repeat until a
  // full sweep changes the objective by less than `tol` and leaves every
  // coordinate within the KKT bound.
  SingleFit solve(double lambda, const FitConfig& config) {
    std::vector<double> trace;
    double previous = objective(lambda);
    trace.push_back(previous);
    const double kkt_bound = config.kkt_tol * n_;
    std::size_t sweeps = 0;
    bool converged = false;

    const auto relative_change = [](double before, double after) {
      return (before - after) / std::max(std::abs(after), std::numeric_limits<double>::min());
    };

    std::vector<std::size_t> cached_active;
    std::vector<double> hessian;
    std::vector<double> grad;
    while (sweeps < config.max_sweeps) {
      const double worst = sweep_all(lambda);
      ++sweeps;
      const double current = objective(lambda);
      trace.push_back(current);
      double rel = relative_change(previous, current);
      previous = current;
      if (rel < config.tol && worst <= kkt_bound) {
        converged = true;
        break;
      }
      const auto active = active_set();
      if (active != cached_active || hessian.empty()) {
        cached_active = active;
        hessian = model_hessian(active);
      }
      rel = std::numeric_limits<double>::infinity();
      while (sweeps < config.max_sweeps) {
        const double active_worst = model_gradient(active, lambda, grad);
        if (rel < config.tol && active_worst <= kkt_bound) break;
        const double inner_tol = 0.1 * std::max(kkt_bound, active_worst);
        const auto next = model_step(active, hessian, grad, lambda, inner_tol, previous);
        ++sweeps;
        if (!next) break;
        trace.push_back(*next);
        rel = relative_change(previous, *next);
        previous = *next;
      }
    }

    SingleFit f = snapshot(lambda);
    f.sweeps = sweeps;
    f.converged = converged;
    f.objective_trace = std::move(trace);
    return f;
  }

  SingleFit solve_unpenalized(const FitConfig& config) {
    if (const auto j = one_signed_column(x_, y_, penalty_)) {
      throw ConvergenceError(*j == static_cast<std::size_t>(-1)
                                 ? std::string("responses hold a single class")
                                 : "responses are one-signed along unpenalized column " +
                                       std::to_string(*j) + "; no finite fit exists");
    }
    constexpr double kDivergence = 100.0;
    std::size_t sweeps = 0;
    while (true) {
      const double worst = sweep(unpenalized_, 0.0);
      ++sweeps;
      if (worst <= config.base_grad_tol) break;
      bool diverging = std::abs(alpha_) > kDivergence;
      for (std::size_t j : unpenalized_) diverging = diverging || std::abs(beta_[j]) > kDivergence;
      if (diverging || sweeps >= config.base_max_sweeps) {
        throw ConvergenceError(
            "unpenalized sub-model did not converge after " + std::to_string(sweeps) +
            " sweeps (responses may be separable by team-season or scenario columns)");
      }
    }
    SingleFit f = snapshot(0.0);
    f.sweeps = sweeps;
    f.converged = true;
    return f;
  }

 private:
  const SparseColumnMatrix& x_;
  std::span<const double> y_;
  const PenaltySpec& penalty_;
  double n_;
  std::vector<double> curvature_;
  std::vector<std::size_t> unpenalized_;
  double alpha_ = 0.0;
  std::vector<double> beta_;
  std::vector<double> eta_;
  std::vector<double> resid_;
};

void validate_grid(std::span<const double> lambdas) {
  if (lambdas.empty()) throw std::invalid_argument("empty lambda grid");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] >= 0.0) || !std::isfinite(lambdas[i])) {
      throw std::invalid_argument("lambda values must be finite and nonnegative");
    }
    if (i > 0 && !(lambdas[i] < lambdas[i - 1])) {
      throw std::invalid_argument("lambda grid must be strictly decreasing");
    }
  }
}

}  // namespace

std::size_t PenaltySpec::penalized_count() const {
  return static_cast<std::size_t>(
      std::count_if(weights.begin(), weights.end(), [](double w) { return w > 0.0; }));
}

PenaltySpec PenaltySpec::uniform(std::size_t n_cols, double weight) {
  return PenaltySpec{std::vector<double>(n_cols, weight)};
}

PenaltySpec PenaltySpec::for_catalog(const ColumnCatalog& catalog) {
  PenaltySpec p;
  p.weights.reserve(catalog.total_cols());
  for (std::size_t c = 0; c < catalog.total_cols(); ++c) {
    const Block b = catalog.block_of(c);
    p.weights.push_back(b == Block::TeamSeason || b == Block::Special ? 0.0 : 1.0);
  }
  return p;
}

void PenaltySpec::validate(std::size_t n_cols) const {
  if (weights.size() != n_cols) {
    throw std::invalid_argument("penalty has " + std::to_string(weights.size()) +
                                " weights for " + std::to_string(n_cols) + " columns");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("penalty weights must be finite and nonnegative");
    }
  }
}

void FitConfig::validate() const {
  if (n_lambda < 1) throw std::invalid_argument("n_lambda must be at least 1");
  if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0)) {
    throw std::invalid_argument("lambda_min_ratio must lie in (0, 1)");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (!(kkt_tol > 0.0)) throw std::invalid_argument("kkt_tol must be positive");
  if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be at least 1");
}

bool PathFit::all_converged() const {
  return std::all_of(fits.begin(), fits.end(), [](const SingleFit& f) { return f.converged; });
}

double loss_derivative(double eta, double y) {
  const double m = y * eta;
  if (m > 0.0) {
    const double e = std::exp(-m);
    return -y * e / (1.0 + e);
  }
  return -y / (1.0 + std::exp(m));
}

double neg_log_lik(std::span<const double> eta, std::span<const double> y) {
  require_same_length(eta.size(), y.size(), "neg_log_lik");
  double sum = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) sum += logistic_loss(y[i] * eta[i]);
  return sum;
}

std::vector<double> linear_predictor(const SparseColumnMatrix& x, double alpha,
                                     std::span<const double> beta) {
  auto eta = x.apply(beta);
  for (auto& v : eta) v += alpha;
  return eta;
}

Gradient nll_gradient(const SparseColumnMatrix& x, std::span<const double> y, double alpha,
                      std::span<const double> beta) {
  require_same_length(y.size(), x.n_rows(), "response vs design rows");
  const auto eta = linear_predictor(x, alpha, beta);
  std::vector<double> resid(eta.size());
  Gradient g;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    resid[i] = loss_derivative(eta[i], y[i]);
    g.intercept += resid[i];
  }
  g.columns.resize(x.n_cols());
  for (std::size_t j = 0; j < x.n_cols(); ++j) g.columns[j] = x.column_dot(j, resid);
  return g;
}

double penalized_objective(const SparseColumnMatrix& x, std::span<const double> y,
                           const PenaltySpec& penalty, double lambda, double alpha,
                           std::span<const double> beta) {
  const auto eta = linear_predictor(x, alpha, beta);
  double pen = 0.0;
  for (std::size_t j = 0; j < beta.size(); ++j) pen += penalty.weights[j] * std::abs(beta[j]);
  return neg_log_lik(eta, y) + static_cast<double>(x.n_rows()) * lambda * pen;
}

std::optional<std::size_t> one_signed_column(const SparseColumnMatrix& x,
                                             std::span<const double> y,
                                             const PenaltySpec& penalty) {
  require_same_length(y.size(), x.n_rows(), "response vs design rows");
  penalty.validate(x.n_cols());
  if (!y.empty() && std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) {
    return static_cast<std::size_t>(-1);
  }
  for (std::size_t j = 0; j < x.n_cols(); ++j) {
    if (penalty.penalized(j) || x.col_nnz(j) == 0) continue;
    const auto rows = x.col_rows(j);
    const auto vals = x.col_values(j);
    bool pos = false, neg = false;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      (vals[k] * y[rows[k]] > 0.0 ? pos : neg) = true;
    }
    if (!(pos && neg)) return j;
  }
  return std::nullopt;
}

SingleFit fit_unpenalized(const SparseColumnMatrix& x, std::span<const double> y,
                          const PenaltySpec& penalty, const FitConfig& config) {
  if (x.n_rows() == 0) throw std::invalid_argument("design has no rows");
  CoordinateDescent cd(x, y, penalty);
  return cd.solve_unpenalized(config);
}

LambdaMax lambda_max(const SparseColumnMatrix& x, std::span<const double> y,
                     const PenaltySpec& penalty, const FitConfig& config) {
  if (x.n_rows() == 0) throw std::invalid_argument("design has no rows");
  penalty.validate(x.n_cols());
  if (penalty.penalized_count() == 0) {
    throw std::invalid_argument("lambda_max needs at least one penalized column");
  }
  CoordinateDescent cd(x, y, penalty);
  LambdaMax out;
  out.base = cd.solve_unpenalized(config);
  const double n = static_cast<double>(x.n_rows());
  double best = 0.0;
  for (std::size_t j = 0; j < x.n_cols(); ++j) {
    if (!penalty.penalized(j)) continue;
    const double g = x.column_dot(j, cd.resid());
    best = std::max(best, std::abs(g) / (n * penalty.weights[j]));
  }
  // The sub-model is only solved to base_grad_tol; re-sweeping it at this
  // lambda moves the penalized gradients by about that much, which must not
  // let the steepest column leave zero.
  out.value = best * (1.0 + kLambdaMaxMargin);
  return out;
}

SingleFit fit_at_lambda(const SparseColumnMatrix& x, std::span<const double> y,
                        const PenaltySpec& penalty, double lambda, const SingleFit* warm_start,
                        const FitConfig& config) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  config.validate();
  CoordinateDescent cd(x, y, penalty);
  if (warm_start) cd.reset(warm_start->alpha, warm_start->beta);
  return cd.solve(lambda, config);
}

std::vector<double> lambda_grid(double lambda_max, const FitConfig& config) {
  config.validate();
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
    throw std::invalid_argument("lambda_max must be positive and finite; got " +
                                std::to_string(lambda_max));
  }
  std::vector<double> grid(config.n_lambda);
  grid[0] = lambda_max;
  if (config.n_lambda == 1) return grid;
  const double log_ratio = std::log(config.lambda_min_ratio);
  const double steps = static_cast<double>(config.n_lambda - 1);
  for (std::size_t k = 1; k + 1 < config.n_lambda; ++k) {
    grid[k] = lambda_max * std::exp(log_ratio * static_cast<double>(k) / steps);
  }
  grid.back() = lambda_max * config.lambda_min_ratio;
  return grid;
}

PathFit fit_path_on_grid(const SparseColumnMatrix& x, std::span<const double> y,
                         const PenaltySpec& penalty, std::span<const double> lambdas,
                         const FitConfig& config) {
  config.validate();
  validate_grid(lambdas);
  if (x.n_rows() == 0) throw std::invalid_argument("design has no rows");
  CoordinateDescent cd(x, y, penalty);
  cd.solve_unpenalized(config);
  PathFit path;
  path.lambdas.assign(lambdas.begin(), lambdas.end());
  path.fits.reserve(lambdas.size());
  for (double lambda : lambdas) path.fits.push_back(cd.solve(lambda, config));
  return path;
}

PathFit fit_path(const SparseColumnMatrix& x, std::span<const double> y,
                 const PenaltySpec& penalty, const FitConfig& config) {
  config.validate();
  const auto top = lambda_max(x, y, penalty, config);
  const auto grid = lambda_grid(top.value, config);
  return fit_path_on_grid(x, y, penalty, grid, config);
}

KktReport kkt_check(const SingleFit& fit, const SparseColumnMatrix& x, std::span<const double> y,
                    const PenaltySpec& penalty, double tol) {
  penalty.validate(x.n_cols());
  require_same_length(fit.beta.size(), x.n_cols(), "fit coefficients vs design columns");
  const auto g = nll_gradient(x, y, fit.alpha, fit.beta);
  const double n = static_cast<double>(x.n_rows());
  KktReport report;

  const auto check = [&](std::size_t index, double grad, double coef, double threshold,
                         bool penalized) {
    const double r = kkt_residual(grad, coef, threshold, penalized);
    report.max_residual = std::max(report.max_residual, r);
    if (r > tol) report.violations.push_back({index, grad, coef, r - tol});
  };

  check(KktViolation::intercept, g.intercept, fit.alpha, 0.0, false);
  for (std::size_t j = 0; j < x.n_cols(); ++j) {
    check(j, g.columns[j], fit.beta[j], n * fit.lambda * penalty.weights[j], penalty.penalized(j));
  }
  return report;
}

}  // namespace hpm
