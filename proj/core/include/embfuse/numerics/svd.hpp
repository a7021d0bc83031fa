#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "embfuse/numerics/dense_matrix.hpp"
#include "embfuse/numerics/sparse.hpp"

namespace embfuse::numerics {

// Anything the randomized SVD can multiply against.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  virtual DenseMatrix apply(const DenseMatrix& x) const = 0;            // A X
  virtual DenseMatrix apply_transpose(const DenseMatrix& x) const = 0;  // A^T X
};

class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(const DenseMatrix& a) : a_(a) {}
  std::size_t rows() const override { return a_.rows(); }
  std::size_t cols() const override { return a_.cols(); }
  DenseMatrix apply(const DenseMatrix& x) const override { return multiply(a_, x); }
  DenseMatrix apply_transpose(const DenseMatrix& x) const override {
    return multiply_transpose_left(a_, x);
  }

 private:
  const DenseMatrix& a_;
};

class SparseOperator final : public LinearOperator {
 public:
  explicit SparseOperator(const CsrMatrix& a) : a_(a) {}
  std::size_t rows() const override { return a_.rows(); }
  std::size_t cols() const override { return a_.cols(); }
  DenseMatrix apply(const DenseMatrix& x) const override { return a_.multiply(x); }
  DenseMatrix apply_transpose(const DenseMatrix& x) const override {
    return a_.multiply_transpose(x);
  }

 private:
  const CsrMatrix& a_;
};

struct SvdOptions {
  std::size_t oversampling = 10;
  std::size_t power_iterations = 4;
  // Converged once every kept triplet satisfies ||A v - s u|| <= tol * s_max.
  double tol = 1e-8;
  // Cap on extra subspace iterations after the initial power iterations.
  std::size_t max_iter = 500;
  std::uint64_t seed = 20240917;
};

// Top-k singular triplets. Singular values are non-increasing; each column
// of u is sign-canonicalized so that its largest-magnitude entry is positive
// (first such entry on ties), with the matching column of v flipped along.
struct SvdResult {
  DenseMatrix u;                        // rows x k
  std::vector<double> singular_values;  // k
  DenseMatrix v;                        // cols x k
  std::size_t iterations = 0;           // subspace iterations performed

  std::size_t rank() const noexcept { return singular_values.size(); }
  DenseMatrix reconstruct() const;  // U diag(s) V^T
};

// Randomized subspace iteration (Halko-Martinsson-Tropp) with a
// Rayleigh-Ritz step. Iterates past the initial power iterations until the
// residual test in SvdOptions passes; throws Error("svd-no-convergence")
// otherwise.
SvdResult truncated_svd(const LinearOperator& a, std::size_t k, const SvdOptions& options = {});
SvdResult truncated_svd(const DenseMatrix& a, std::size_t k, const SvdOptions& options = {});
SvdResult truncated_svd(const CsrMatrix& a, std::size_t k, const SvdOptions& options = {});

// Full thin SVD of a small dense matrix by one-sided Jacobi rotations.
// Returns min(rows, cols) triplets, sign-canonicalized as above.
SvdResult jacobi_svd(const DenseMatrix& a);

// Thin orthonormal basis of the column space via Householder QR; returns an
// m x n matrix with orthonormal columns (m >= n).
DenseMatrix orthonormal_basis(const DenseMatrix& a);

void canonicalize_signs(SvdResult& svd);

}  // namespace embfuse::numerics
