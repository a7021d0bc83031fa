#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace embfuse::numerics {

// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept {
    return values_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {values_.data() + r * cols_, cols_};
  }

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  DenseMatrix transposed() const;
  std::vector<double> column(std::size_t c) const;

  bool all_finite() const noexcept;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// C = A * B
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
// C = A^T * B
DenseMatrix multiply_transpose_left(const DenseMatrix& a, const DenseMatrix& b);
// C = A * B^T
DenseMatrix multiply_transpose_right(const DenseMatrix& a, const DenseMatrix& b);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double norm2(std::span<const double> a) noexcept;
double frobenius_norm(const DenseMatrix& a) noexcept;
// Cosine similarity; 0 when either vector is zero.
double cosine(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace embfuse::numerics
