#include "hpm/selection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <thread>

#include "hpm/rng.hpp"

namespace hpm {

std::string_view to_string(SelectionMethod method) {
  return method == SelectionMethod::Aicc ? "aicc" : "cv";
}

std::string_view to_string(KRule rule) {
  return rule == KRule::WithUnpenalized ? "with_unpenalized" : "nonzero_only";
}

double aicc(double nll, std::size_t n, std::size_t k) {
  if (k + 1 >= n) return std::numeric_limits<double>::infinity();
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  return 2.0 * nll + 2.0 * kd * nd / (nd - kd - 1.0);
}

std::size_t argmin_first(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmin of empty range");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) best = i;
  }
  return best;
}

SelectionResult select_aicc(const PathFit& path, std::size_t n, KRule rule) {
  if (path.size() == 0) throw std::invalid_argument("select_aicc: empty path");
  SelectionResult r;
  r.method = SelectionMethod::Aicc;
  r.criterion.reserve(path.size());
  for (const auto& f : path.fits) {
    const std::size_t k = rule == KRule::WithUnpenalized ? f.n_nonzero : f.n_nonzero_any;
    r.criterion.push_back(aicc(f.nll, n, k));
  }
  r.chosen_index = argmin_first(r.criterion);
  return r;
}

std::vector<FoldSplit> make_folds(std::size_t n_rows, std::size_t n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw std::invalid_argument("need at least 2 folds");
  if (n_folds > n_rows) throw std::invalid_argument("more folds than rows");
  std::vector<std::size_t> order(n_rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n_rows; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  std::vector<std::size_t> fold_of(n_rows);
  for (std::size_t k = 0; k < n_rows; ++k) fold_of[order[k]] = k % n_folds;

  std::vector<FoldSplit> splits(n_folds);
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t f = 0; f < n_folds; ++f) {
      (fold_of[i] == f ? splits[f].test : splits[f].train).push_back(i);
    }
  }
  return splits;
}

namespace {

struct FoldOutcome {
  std::optional<std::vector<double>> deviance;  // per held-out row, per lambda
  std::string warning;
  std::exception_ptr error;
};

FoldOutcome run_fold(const SparseColumnMatrix& x, std::span<const double> y,
                     const PenaltySpec& penalty, const FitConfig& config,
                     std::span<const double> lambdas, const FoldSplit& split, std::size_t index) {
  FoldOutcome out;
  const auto name = "fold " + std::to_string(index);
  if (split.train.empty() || split.test.empty()) {
    out.warning = name + ": empty train or test set, skipped";
    return out;
  }
  std::vector<double> y_train, y_test;
  for (std::size_t i : split.train) y_train.push_back(y[i]);
  for (std::size_t i : split.test) y_test.push_back(y[i]);
  const bool one_class =
      std::all_of(y_train.begin(), y_train.end(), [&](double v) { return v == y_train[0]; });
  if (one_class) {
    out.warning = name + ": training rows contain a single response class, skipped";
    return out;
  }
  const auto x_train = x.select_rows(split.train);
  const auto x_test = x.select_rows(split.test);
  try {
    const auto path = fit_path_on_grid(x_train, y_train, penalty, lambdas, config);
    std::vector<double> dev;
    dev.reserve(path.size());
    for (const auto& f : path.fits) {
      const auto eta = linear_predictor(x_test, f.alpha, f.beta);
      dev.push_back(2.0 * neg_log_lik(eta, y_test) / static_cast<double>(y_test.size()));
    }
    out.deviance = std::move(dev);
  } catch (const ConvergenceError& e) {
    out.warning = name + ": " + e.what() + ", skipped";
  } catch (...) {
    out.error = std::current_exception();
  }
  return out;
}

}  // namespace

SelectionResult cross_validate(const SparseColumnMatrix& x, std::span<const double> y,
                               const PenaltySpec& penalty, const FitConfig& config,
                               std::span<const double> lambdas,
                               std::span<const FoldSplit> splits, const CvOptions& options) {
  if (splits.empty()) throw std::invalid_argument("cross_validate: no folds");
  std::vector<FoldOutcome> outcomes(splits.size());

  const unsigned workers =
      std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(splits.size())));
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t f = next++; f < splits.size(); f = next++) {
      outcomes[f] = run_fold(x, y, penalty, config, lambdas, splits[f], f);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }

  SelectionResult r;
  r.method = SelectionMethod::Cv;
  for (std::size_t f = 0; f < outcomes.size(); ++f) {
    if (outcomes[f].error) std::rethrow_exception(outcomes[f].error);
    if (outcomes[f].deviance) {
      r.fold_deviance.push_back(std::move(*outcomes[f].deviance));
    } else {
      r.skipped_folds.push_back(f);
      r.warnings.push_back(outcomes[f].warning);
    }
  }
  if (r.fold_deviance.empty()) throw std::runtime_error("cross-validation: every fold skipped");

  const std::size_t m = lambdas.size();
  const double folds = static_cast<double>(r.fold_deviance.size());
  r.criterion.assign(m, 0.0);
  r.cv_se.assign(m, 0.0);
  for (std::size_t l = 0; l < m; ++l) {
    double sum = 0.0;
    for (const auto& d : r.fold_deviance) sum += d[l];
    const double mean = sum / folds;
    double ss = 0.0;
    for (const auto& d : r.fold_deviance) ss += (d[l] - mean) * (d[l] - mean);
    r.criterion[l] = mean;
    r.cv_se[l] = folds > 1.0 ? std::sqrt(ss / (folds - 1.0)) / std::sqrt(folds) : 0.0;
  }

  const std::size_t best = argmin_first(r.criterion);
  r.chosen_index = best;
  if (options.one_se) {
    const double bound = r.criterion[best] + r.cv_se[best];
    for (std::size_t l = 0; l <= best; ++l) {
      if (r.criterion[l] <= bound) {
        r.chosen_index = l;
        break;
      }
    }
  }
  return r;
}

SelectionResult cv_select(const SparseColumnMatrix& x, std::span<const double> y,
                          const PenaltySpec& penalty, const FitConfig& config,
                          std::size_t n_folds, std::uint64_t seed, const CvOptions& options) {
  const auto top = lambda_max(x, y, penalty, config);
  const auto grid = lambda_grid(top.value, config);
  const auto splits = make_folds(x.n_rows(), n_folds, seed);
  return cross_validate(x, y, penalty, config, grid, splits, options);
}

}  // namespace hpm
