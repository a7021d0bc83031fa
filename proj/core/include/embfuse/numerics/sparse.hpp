#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "embfuse/numerics/dense_matrix.hpp"

namespace embfuse::numerics {

struct Triplet {
  std::uint32_t row;
  std::uint32_t col;
  double value;
};

// Compressed sparse row matrix. Duplicate coordinates are summed on
// construction; explicit zeros are dropped.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  // Value at (r, c), 0 when absent. O(log row-length).
  double at(std::size_t r, std::size_t c) const noexcept;

  std::span<const std::uint32_t> row_indices(std::size_t r) const noexcept {
    return {col_index_.data() + row_start_[r], row_start_[r + 1] - row_start_[r]};
  }
  std::span<const double> row_values(std::size_t r) const noexcept {
    return {values_.data() + row_start_[r], row_start_[r + 1] - row_start_[r]};
  }

  DenseMatrix to_dense() const;

  // Y = A * X and Y = A^T * X for dense X.
  DenseMatrix multiply(const DenseMatrix& x) const;
  DenseMatrix multiply_transpose(const DenseMatrix& x) const;

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_start_{0};
  std::vector<std::uint32_t> col_index_;
  std::vector<double> values_;
};

}  // namespace embfuse::numerics
