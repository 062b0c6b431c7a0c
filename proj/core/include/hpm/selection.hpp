#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hpm/solver.hpp"

namespace hpm {

enum class SelectionMethod { Aicc, Cv };

/// How k is counted for AICc. `WithUnpenalized` counts nonzero penalized
/// coefficients, every unpenalized coefficient, and the intercept;
/// `NonzeroOnly` counts exactly-nonzero coefficients of any kind.
enum class KRule { WithUnpenalized, NonzeroOnly };

std::string_view to_string(SelectionMethod method);
std::string_view to_string(KRule rule);

struct SelectionResult {
  SelectionMethod method = SelectionMethod::Aicc;
  std::size_t chosen_index = 0;
  std::vector<double> criterion;  // AICc, or mean held-out deviance per row

  // Cross-validation only.
  std::vector<std::vector<double>> fold_deviance;  // [fold][lambda], per held-out row
  std::vector<double> cv_se;
  std::vector<std::size_t> skipped_folds;
  std::vector<std::string> warnings;
};

/// 2*nll + 2kn/(n-k-1); +inf when n-k-1 <= 0.
double aicc(double nll, std::size_t n, std::size_t k);

/// Index of the first minimum (largest lambda on ties).
std::size_t argmin_first(std::span<const double> values);

SelectionResult select_aicc(const PathFit& path, std::size_t n,
                            KRule rule = KRule::WithUnpenalized);

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct CvOptions {
  bool one_se = false;
  unsigned threads = 1;
};

/// Row folds from a seeded Fisher-Yates shuffle; fold sizes differ by at most one.
std::vector<FoldSplit> make_folds(std::size_t n_rows, std::size_t n_folds, std::uint64_t seed);

/// Fits each split's training rows on the shared grid and scores the held-out
/// rows. Splits whose training rows hold a single response class are skipped
/// with a warning. Results do not depend on `options.threads`.
SelectionResult cross_validate(const SparseColumnMatrix& x, std::span<const double> y,
                               const PenaltySpec& penalty, const FitConfig& config,
                               std::span<const double> lambdas,
                               std::span<const FoldSplit> splits, const CvOptions& options = {});

/// lambda grid comes from the full-data lambda_max.
SelectionResult cv_select(const SparseColumnMatrix& x, std::span<const double> y,
                          const PenaltySpec& penalty, const FitConfig& config,
                          std::size_t n_folds, std::uint64_t seed,
                          const CvOptions& options = {});

}  // namespace hpm
