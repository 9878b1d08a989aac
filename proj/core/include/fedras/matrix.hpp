#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fedras {

/// Dense row-major matrix of doubles. Used for the item table Q, the per-user
/// embedding table and for packed gradient rows.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// Appends one row; `values.size()` must equal cols().
  void append_row(std::span<const double> values);
  void reserve_rows(std::size_t n) { data_.reserve(n * cols_); }

  bool all_finite() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using EmbeddingMatrix = Matrix;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

/// Cosine similarity; a zero-norm operand yields 0.
inline double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(squared_norm(a));
  const double nb = std::sqrt(squared_norm(b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

inline bool is_zero(std::span<const double> a) {
  for (double v : a)
    if (v != 0.0) return false;
  return true;
}

/// Sorted set of item rows with one d-dimensional vector each. All-zero rows
/// are never stored.
class SparseGradient {
 public:
  SparseGradient() = default;
  explicit SparseGradient(std::size_t dim) : values_(0, dim) {}

  std::size_t dim() const { return values_.cols(); }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }

  std::span<const std::uint32_t> indices() const { return indices_; }
  std::uint32_t index(std::size_t k) const { return indices_[k]; }
  std::span<const double> row(std::size_t k) const { return values_.row(k); }
  /// Packed rows, aligned with indices().
  const Matrix& values() const { return values_; }

  /// Appends a row. Indices must arrive strictly ascending. Returns false (and
  /// stores nothing) when `values` is all zeros.
  bool push_back(std::uint32_t item, std::span<const double> values);

  /// Row for `item`, or an empty span when absent.
  std::span<const double> find(std::uint32_t item) const;

  Matrix to_dense(std::size_t num_items) const;
  static SparseGradient from_dense(const Matrix& dense);

  bool all_finite() const { return values_.all_finite(); }
  bool operator==(const SparseGradient&) const = default;

 private:
  std::vector<std::uint32_t> indices_;
  Matrix values_;
};

/// Round half away from zero for non-negative quantities (group counts,
/// client counts, budgets).
inline std::size_t round_half_up(double x) {
  return x <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(x + 0.5));
}

}  // namespace fedras
