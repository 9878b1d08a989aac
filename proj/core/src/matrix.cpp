#include "fedras/matrix.hpp"

#include <algorithm>
#include <stdexcept>

namespace fedras {

void Matrix::append_row(std::span<const double> values) {
  if (values.size() != cols_) throw std::invalid_argument("Matrix::append_row: width mismatch");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool SparseGradient::push_back(std::uint32_t item, std::span<const double> values) {
  if (values.size() != dim()) throw std::invalid_argument("SparseGradient: width mismatch");
  if (!indices_.empty() && item <= indices_.back())
    throw std::invalid_argument("SparseGradient: indices must be strictly ascending");
  if (is_zero(values)) return false;
  indices_.push_back(item);
  values_.append_row(values);
  return true;
}

std::span<const double> SparseGradient::find(std::uint32_t item) const {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), item);
  if (it == indices_.end() || *it != item) return {};
  return values_.row(static_cast<std::size_t>(it - indices_.begin()));
}

Matrix SparseGradient::to_dense(std::size_t num_items) const {
  Matrix dense(num_items, dim());
  for (std::size_t k = 0; k < size(); ++k) {
    if (indices_[k] >= num_items) throw std::out_of_range("SparseGradient::to_dense: row out of range");
    std::ranges::copy(row(k), dense.row(indices_[k]).begin());
  }
  return dense;
}

SparseGradient SparseGradient::from_dense(const Matrix& dense) {
  SparseGradient g(dense.cols());
  for (std::size_t r = 0; r < dense.rows(); ++r) g.push_back(static_cast<std::uint32_t>(r), dense.row(r));
  return g;
}

}  // namespace fedras
