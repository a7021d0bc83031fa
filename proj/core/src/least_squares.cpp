#include "embfuse/numerics/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "embfuse/error.hpp"
#include "embfuse/random.hpp"
#include "embfuse/numerics/svd.hpp"

namespace embfuse::numerics {

namespace {

// Whitening map for the rows of X: x~ = S^-1/2 U^T x over the eigenpairs of
// X^T X / n that are not numerically zero.
struct Whitening {
  DenseMatrix basis;             // d_in x r, columns U_r
  std::vector<double> inv_sqrt;  // r
  std::size_t rank() const { return inv_sqrt.size(); }
};

Whitening whitening(const DenseMatrix& x) {
  DenseMatrix cov = multiply_transpose_left(x, x);
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  for (double& v : cov.values()) v *= inv_n;
  const SvdResult eig = jacobi_svd(cov);
  Whitening w;
  const double s_max = eig.singular_values.empty() ? 0.0 : eig.singular_values[0];
  std::size_t r = 0;
  while (r < eig.rank() && eig.singular_values[r] > 1e-12 * s_max) ++r;
  w.basis = DenseMatrix(x.cols(), r);
  for (std::size_t i = 0; i < x.cols(); ++i)
    for (std::size_t c = 0; c < r; ++c) w.basis(i, c) = eig.u(i, c);
  for (std::size_t c = 0; c < r; ++c) w.inv_sqrt.push_back(1.0 / std::sqrt(eig.singular_values[c]));
  return w;
}

}  // namespace

std::vector<double> ProjectionModel::apply(std::span<const double> x) const {
  std::vector<double> out(w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r) out[r] = dot(w.row(r), x);
  return out;
}

double mean_squared_residual(const DenseMatrix& w, const DenseMatrix& x, const DenseMatrix& z) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xi = x.row(i);
    auto zi = z.row(i);
    for (std::size_t o = 0; o < w.rows(); ++o) {
      const double r = dot(w.row(o), xi) - zi[o];
      total += r * r;
    }
  }
  return total / static_cast<double>(x.rows() * std::max<std::size_t>(w.rows(), 1));
}

ProjectionModel solve_least_squares_sgd(const DenseMatrix& x, const DenseMatrix& z,
                                        const SgdOptions& options) {
  const std::size_t n = x.rows();
  const std::size_t d_in = x.cols();
  const std::size_t d_out = z.cols();
  if (n == 0) throw Error("sgd-input", "no training rows");
  if (z.rows() != n) throw Error("shape", "X and Z row counts differ");
  if (!x.all_finite() || !z.all_finite()) throw Error("sgd-input", "non-finite training data");
  if (options.batch == 0 || options.epochs == 0) throw Error("sgd-input", "batch and epochs must be >= 1");

  ProjectionModel model;
  model.source_dim = d_in;
  model.target_dim = d_out;
  model.train_size = n;
  model.w = DenseMatrix(d_out, d_in);

  Rng init(Rng::derive(options.seed, 0));
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(d_in, 1)));
  for (double& v : model.w.values()) v = init.uniform(-bound, bound);

  const Whitening white = whitening(x);
  const std::size_t r = white.rank();
  if (r == 0) {
    // All inputs are zero: nothing to learn, W x = 0 for every row.
    std::fill(model.w.values().begin(), model.w.values().end(), 0.0);
    model.fit_mse = mean_squared_residual(model.w, x, z);
    return model;
  }
  DenseMatrix xw = multiply(x, white.basis);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < r; ++c) xw(i, c) *= white.inv_sqrt[c];
  // W = V P with P = S^-1/2 U_r^T; V starts at the image of the initial W.
  DenseMatrix v = multiply(model.w, white.basis);
  for (std::size_t o = 0; o < d_out; ++o)
    for (std::size_t c = 0; c < r; ++c) v(o, c) /= white.inv_sqrt[c];
  auto to_original = [&](const DenseMatrix& vv) {
    DenseMatrix scaled = vv;
    for (std::size_t o = 0; o < d_out; ++o)
      for (std::size_t c = 0; c < r; ++c) scaled(o, c) *= white.inv_sqrt[c];
    return multiply_transpose_right(scaled, white.basis);
  };

  // Whitened curvature is the identity on r directions. A minibatch of b
  // rows drawn without replacement has expected curvature bound
  // 1 + (r - 1)(n - b) / (b (n - 1)): r for single rows, 1 for the full set.
  const std::size_t batch = std::min(options.batch, n);
  const double scale =
      n == 1 ? 1.0
             : 1.0 + static_cast<double>(r - 1) * static_cast<double>(n - batch) /
                         (static_cast<double>(batch) * static_cast<double>(n - 1));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  DenseMatrix grad(d_out, r);
  std::vector<double> residual(d_out);
  // Iterates of the second half of the run are averaged.
  const std::size_t average_from = options.epochs / 2 + 1;
  DenseMatrix average(d_out, r);
  std::size_t averaged = 0;
  // Loss changes below this level are round-off, not divergence.
  double energy = 0.0;
  for (double t : z.values()) energy += t * t;
  const double eps = std::numeric_limits<double>::epsilon();
  const double noise_floor = 1e4 * eps * eps * energy / static_cast<double>(std::max<std::size_t>(z.values().size(), 1));
  double previous = mean_squared_residual(v, xw, z);
  double best = previous;
  int rising = 0;

  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    Rng shuffler(Rng::derive(options.seed, epoch));
    shuffler.shuffle(std::span<std::size_t>(order));
    const double lr_t = options.decay == LearningRateDecay::inv_sqrt
                            ? options.lr / std::sqrt(static_cast<double>(epoch))
                            : options.lr;
    const double step = lr_t / scale;

    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(start + batch, n);
      std::fill(grad.values().begin(), grad.values().end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        auto xi = xw.row(order[b]);
        auto zi = z.row(order[b]);
        for (std::size_t o = 0; o < d_out; ++o) residual[o] = dot(v.row(o), xi) - zi[o];
        for (std::size_t o = 0; o < d_out; ++o) {
          auto g = grad.row(o);
          const double res = residual[o];
          for (std::size_t c = 0; c < r; ++c) g[c] += res * xi[c];
        }
      }
      const double factor = step / static_cast<double>(stop - start);
      auto& vv = v.values();
      const auto& gv = grad.values();
      for (std::size_t i = 0; i < vv.size(); ++i) vv[i] -= factor * gv[i];
    }

    const double mse = mean_squared_residual(v, xw, z);
    model.mse_history.push_back(mse);
    model.epochs_run = epoch;
    if (!std::isfinite(mse)) {
      throw Error("sgd-diverged", "non-finite loss at epoch " + std::to_string(epoch) +
                                      "; lower the learning rate");
    }
    // Minibatch noise makes the loss jitter; only count clear increases.
    rising = mse > previous * 1.01 && mse > best && mse > noise_floor ? rising + 1 : 0;
    if (rising >= 5) {
      throw Error("sgd-diverged", "loss increased for 5 consecutive epochs (epoch " +
                                      std::to_string(epoch) + "); lower the learning rate");
    }
    previous = mse;
    best = std::min(best, mse);
    if (epoch >= average_from) {
      ++averaged;
      const double keep = 1.0 - 1.0 / static_cast<double>(averaged);
      for (std::size_t i = 0; i < v.values().size(); ++i)
        average.values()[i] = keep * average.values()[i] + (1.0 - keep) * v.values()[i];
    }
    if (mse <= options.target_mse) break;
  }

  // Prefer the averaged iterate unless the run stopped before averaging
  // started or the last iterate fits better.
  model.w = to_original(v);
  model.fit_mse = mean_squared_residual(model.w, x, z);
  if (averaged > 0) {
    DenseMatrix w_avg = to_original(average);
    const double mse_avg = mean_squared_residual(w_avg, x, z);
    if (mse_avg < model.fit_mse) {
      model.w = std::move(w_avg);
      model.fit_mse = mse_avg;
    }
  }
  return model;
}

}  // namespace embfuse::numerics
