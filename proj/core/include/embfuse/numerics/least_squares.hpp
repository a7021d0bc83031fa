#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "embfuse/numerics/dense_matrix.hpp"

namespace embfuse::numerics {

enum class LearningRateDecay { none, inv_sqrt };

struct SgdOptions {
  // Step size in whitened coordinates (see below), so the same value works
  // regardless of how the inputs are scaled or conditioned.
  double lr = 0.5;
  LearningRateDecay decay = LearningRateDecay::inv_sqrt;
  std::size_t epochs = 200;
  std::size_t batch = 64;
  std::uint64_t seed = 20240917;
  // Stop early once the epoch MSE falls to this value.
  double target_mse = 0.0;
};

// Linear map W (target_dim x source_dim) fitted so that W x_i ~ z_i.
struct ProjectionModel {
  DenseMatrix w;
  std::size_t source_dim = 0;
  std::size_t target_dim = 0;
  double fit_mse = 0.0;  // mean over rows and output coordinates
  std::size_t train_size = 0;
  std::size_t epochs_run = 0;
  std::vector<double> mse_history;  // one entry per epoch

  std::vector<double> apply(std::span<const double> x) const;
};

// Mean squared residual of W applied to the rows of X against the rows of Z,
// averaged over n * d_out entries.
double mean_squared_residual(const DenseMatrix& w, const DenseMatrix& x, const DenseMatrix& z);

// Minibatch SGD on sum_i ||W x_i - z_i||^2, preconditioned by whitening the
// inputs with (X^T X / n)^-1/2 (directions with eigenvalue below 1e-12 of the
// largest are dropped, so W is zero on them). In whitened coordinates the
// step is lr_t / (1 + (r - 1)(n - b) / (b (n - 1))) for rank r and batch b,
// with lr_t = lr or lr / sqrt(epoch). Rows
// are reshuffled every epoch from a seed derived from options.seed, and the
// iterates of the second half of the epochs are averaged; the better of the
// average and the last iterate is returned. Throws Error("sgd-diverged")
// when the epoch MSE rises by more than 1% for 5 consecutive epochs (rises
// within 1e4 eps^2 of the mean squared target are ignored) or becomes
// non-finite.
ProjectionModel solve_least_squares_sgd(const DenseMatrix& x, const DenseMatrix& z,
                                        const SgdOptions& options = {});

}  // namespace embfuse::numerics
