#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "embfuse/numerics/dense_matrix.hpp"

namespace embfuse::eval {

using numerics::DenseMatrix;

enum class GammaPolicy { scale, fixed };
GammaPolicy parse_gamma_policy(std::string_view name);

struct SvmConfig {
  double c = 1.0;
  GammaPolicy gamma_policy = GammaPolicy::scale;
  double gamma = 1.0;  // used when gamma_policy == fixed
  double tol = 1e-3;   // maximal violating pair gap at termination
  std::size_t max_iter = 10'000'000;
  // Kernel rows are precomputed when n*n doubles fit, otherwise an LRU
  // column cache of this size is used per machine.
  std::size_t cache_mb = 512;
  std::size_t threads = 1;
};

struct BinaryMachine {
  std::vector<std::uint32_t> support;  // indices into SvmModel::support_vectors
  std::vector<double> coef;            // y_i * alpha_i, nonzero
  double rho = 0.0;                    // decision = sum coef * K - rho
  std::size_t iterations = 0;
  bool converged = true;
  bool trained = true;  // false when the class had no training examples
};

struct SvmModel {
  double gamma = 1.0;
  double c = 1.0;
  std::size_t n_classes = 0;
  std::size_t feature_dim = 0;
  DenseMatrix support_vectors;               // union over machines
  std::vector<std::uint32_t> support_rows;   // training row of each support vector
  std::vector<BinaryMachine> machines;       // one per class, one-vs-rest

  bool converged() const;
};

// 1 / (d * var(X)) over every entry of X; 1.0 when X is constant.
double scale_gamma(const DenseMatrix& x);

// One-vs-rest RBF machines trained by SMO with second-order working-set
// selection. Labels must lie in [0, n_classes). Throws Error("svm-input") for
// fewer than two distinct labels, non-finite features or C <= 0.
SvmModel svm_train(const DenseMatrix& x, std::span<const std::uint32_t> y, std::size_t n_classes,
                   const SvmConfig& config = {});

// Row r holds the decision value of every machine for x row r. Untrained
// machines score -1. Throws Error("shape") on a width mismatch.
DenseMatrix decision_values(const SvmModel& model, const DenseMatrix& x, std::size_t threads = 1);

// Argmax of the decision values; ties go to the lowest label id.
std::vector<std::uint32_t> svm_predict(const SvmModel& model, const DenseMatrix& x,
                                       std::size_t threads = 1);

// Largest KKT violation of machine `m` on its training data, recomputed
// from the stored support vectors:
//   alpha = 0      : y f >= 1
//   0 < alpha < C  : y f == 1
//   alpha = C      : y f <= 1
double kkt_max_violation(const SvmModel& model, std::size_t m, const DenseMatrix& x,
                         std::span<const std::uint32_t> y);

}  // namespace embfuse::eval
