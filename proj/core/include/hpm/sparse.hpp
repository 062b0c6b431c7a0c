#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace hpm {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Immutable compressed-sparse-column matrix. Row indices are strictly
/// increasing within each column and every stored value is nonzero.
class SparseColumnMatrix {
 public:
  SparseColumnMatrix() = default;

  /// Zero-valued triplets are skipped. Throws std::invalid_argument on an
  /// out-of-range index or a duplicated (row, col) pair.
  static SparseColumnMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                          std::span<const Triplet> triplets);

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_cols() const noexcept { return n_cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }
  std::size_t col_nnz(std::size_t j) const { return col_ptr_[j + 1] - col_ptr_[j]; }

  std::span<const std::size_t> col_rows(std::size_t j) const {
    return {row_idx_.data() + col_ptr_[j], col_nnz(j)};
  }
  std::span<const double> col_values(std::size_t j) const {
    return {values_.data() + col_ptr_[j], col_nnz(j)};
  }

  /// X * coef, exact sparse product.
  std::vector<double> apply(std::span<const double> coef) const;

  /// sum_i r_i X_ij; sequential over the stored entries of column j.
  double column_dot(std::size_t j, std::span<const double> r) const;

  /// (sum_i w_i r_i X_ij, sum_i w_i X_ij^2) over the stored entries of column j.
  std::pair<double, double> column_weighted_inner(std::size_t j, std::span<const double> r,
                                                  std::span<const double> w) const;

  /// Keeps the listed rows (in that order) as a new matrix.
  SparseColumnMatrix select_rows(std::span<const std::size_t> rows) const;

  /// Multiplies every column by -1.
  SparseColumnMatrix negated() const;

  /// Row-major dense copy, for tests and audits.
  std::vector<double> to_dense() const;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<std::size_t> row_idx_;
  std::vector<double> values_;
};

}  // namespace hpm
