#include "hpm/sparse.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hpm {

namespace {
void require_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": length " + std::to_string(got) +
                                ", expected " + std::to_string(want));
  }
}
}  // namespace

SparseColumnMatrix SparseColumnMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                                     std::span<const Triplet> triplets) {
  SparseColumnMatrix m;
  m.n_rows_ = n_rows;
  m.n_cols_ = n_cols;
  m.col_ptr_.assign(n_cols + 1, 0);

  for (const auto& t : triplets) {
    if (t.row >= n_rows || t.col >= n_cols) {
      throw std::invalid_argument("triplet (" + std::to_string(t.row) + "," +
                                  std::to_string(t.col) + ") outside " + std::to_string(n_rows) +
                                  "x" + std::to_string(n_cols));
    }
    ++m.col_ptr_[t.col + 1];
  }
  for (std::size_t j = 0; j < n_cols; ++j) m.col_ptr_[j + 1] += m.col_ptr_[j];

  std::vector<std::size_t> fill(m.col_ptr_.begin(), m.col_ptr_.end() - 1);
  std::vector<std::pair<std::size_t, double>> entries(triplets.size());
  for (const auto& t : triplets) entries[fill[t.col]++] = {t.row, t.value};

  m.row_idx_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  std::vector<std::size_t> new_ptr(n_cols + 1, 0);
  for (std::size_t j = 0; j < n_cols; ++j) {
    auto first = entries.begin() + static_cast<std::ptrdiff_t>(m.col_ptr_[j]);
    auto last = entries.begin() + static_cast<std::ptrdiff_t>(m.col_ptr_[j + 1]);
    std::sort(first, last, [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto it = first; it != last; ++it) {
      if (it != first && it->first == (it - 1)->first) {
        throw std::invalid_argument("duplicate entry at (" + std::to_string(it->first) + "," +
                                    std::to_string(j) + ")");
      }
      if (it->second == 0.0) continue;
      m.row_idx_.push_back(it->first);
      m.values_.push_back(it->second);
    }
    new_ptr[j + 1] = m.row_idx_.size();
  }
  m.col_ptr_ = std::move(new_ptr);
  return m;
}

std::vector<double> SparseColumnMatrix::apply(std::span<const double> coef) const {
  require_length(coef.size(), n_cols_, "apply coefficient vector");
  std::vector<double> out(n_rows_, 0.0);
  for (std::size_t j = 0; j < n_cols_; ++j) {
    const double c = coef[j];
    if (c == 0.0) continue;
    for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) out[row_idx_[k]] += values_[k] * c;
  }
  return out;
}

double SparseColumnMatrix::column_dot(std::size_t j, std::span<const double> r) const {
  double s = 0.0;
  for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) s += r[row_idx_[k]] * values_[k];
  return s;
}

std::pair<double, double> SparseColumnMatrix::column_weighted_inner(
    std::size_t j, std::span<const double> r, std::span<const double> w) const {
  require_length(r.size(), n_rows_, "column_weighted_inner residual");
  require_length(w.size(), n_rows_, "column_weighted_inner weights");
  if (j >= n_cols_) throw std::invalid_argument("column index out of range");
  double cross = 0.0, square = 0.0;
  for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) {
    const std::size_t i = row_idx_[k];
    const double x = values_[k];
    cross += w[i] * r[i] * x;
    square += w[i] * x * x;
  }
  return {cross, square};
}

SparseColumnMatrix SparseColumnMatrix::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::size_t> new_index(n_rows_, n_rows_);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= n_rows_) throw std::invalid_argument("select_rows: row out of range");
    if (new_index[rows[k]] != n_rows_) throw std::invalid_argument("select_rows: repeated row");
    new_index[rows[k]] = k;
  }
  std::vector<Triplet> trips;
  for (std::size_t j = 0; j < n_cols_; ++j) {
    for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) {
      const std::size_t r = new_index[row_idx_[k]];
      if (r != n_rows_) trips.push_back({r, j, values_[k]});
    }
  }
  return from_triplets(rows.size(), n_cols_, trips);
}

SparseColumnMatrix SparseColumnMatrix::negated() const {
  SparseColumnMatrix m = *this;
  for (auto& v : m.values_) v = -v;
  return m;
}

std::vector<double> SparseColumnMatrix::to_dense() const {
  std::vector<double> d(n_rows_ * n_cols_, 0.0);
  for (std::size_t j = 0; j < n_cols_; ++j) {
    for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) {
      d[row_idx_[k] * n_cols_ + j] = values_[k];
    }
  }
  return d;
}

}  // namespace hpm
