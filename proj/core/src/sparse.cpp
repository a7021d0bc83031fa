#include "embfuse/numerics/sparse.hpp"

#include <algorithm>

#include "embfuse/error.hpp"

namespace embfuse::numerics {

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets)
    : rows_(rows), cols_(cols) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_start_.assign(rows_ + 1, 0);
  for (std::size_t t = 0; t < triplets.size();) {
    const auto& first = triplets[t];
    if (first.row >= rows_ || first.col >= cols_) {
      throw Error("shape", "sparse triplet out of range");
    }
    double sum = 0.0;
    std::size_t u = t;
    for (; u < triplets.size() && triplets[u].row == first.row && triplets[u].col == first.col; ++u) {
      sum += triplets[u].value;
    }
    if (sum != 0.0) {
      col_index_.push_back(first.col);
      values_.push_back(sum);
      ++row_start_[first.row + 1];
    }
    t = u;
  }
  for (std::size_t r = 0; r < rows_; ++r) row_start_[r + 1] += row_start_[r];
}

double CsrMatrix::at(std::size_t r, std::size_t c) const noexcept {
  auto cols = row_indices(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<std::uint32_t>(c));
  if (it == cols.end() || *it != c) return 0.0;
  return row_values(r)[static_cast<std::size_t>(it - cols.begin())];
}

DenseMatrix CsrMatrix::to_dense() const {
  DenseMatrix d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    auto cols = row_indices(r);
    auto vals = row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) d(r, cols[k]) = vals[k];
  }
  return d;
}

DenseMatrix CsrMatrix::multiply(const DenseMatrix& x) const {
  if (x.rows() != cols_) throw Error("shape", "sparse multiply: inner dimensions differ");
  DenseMatrix y(rows_, x.cols());
  for (std::size_t r = 0; r < rows_; ++r) {
    auto out = y.row(r);
    auto cols = row_indices(r);
    auto vals = row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      auto xrow = x.row(cols[k]);
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += vals[k] * xrow[j];
    }
  }
  return y;
}

DenseMatrix CsrMatrix::multiply_transpose(const DenseMatrix& x) const {
  if (x.rows() != rows_) throw Error("shape", "sparse multiply_transpose: inner dimensions differ");
  DenseMatrix y(cols_, x.cols());
  for (std::size_t r = 0; r < rows_; ++r) {
    auto xrow = x.row(r);
    auto cols = row_indices(r);
    auto vals = row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      auto out = y.row(cols[k]);
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += vals[k] * xrow[j];
    }
  }
  return y;
}

}  // namespace embfuse::numerics
