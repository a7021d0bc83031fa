#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "embfuse/numerics/dense_matrix.hpp"
#include "embfuse/numerics/least_squares.hpp"
#include "embfuse/numerics/sparse.hpp"
#include "embfuse/numerics/stats.hpp"
#include "embfuse/numerics/svd.hpp"
#include "embfuse/random.hpp"
#include "expect_error.hpp"
#include "oracles.hpp"

using namespace embfuse;
using namespace embfuse::numerics;

namespace {

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

double orthonormality_error(const DenseMatrix& q) {
  const auto g = multiply_transpose_left(q, q);
  return max_abs_diff(g, DenseMatrix::identity(q.cols()));
}

double reconstruction_error2(const DenseMatrix& a, const SvdResult& s) {
  const auto r = s.reconstruct();
  double e = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) e += std::pow(a.values()[i] - r.values()[i], 2);
  return e;
}

}  // namespace

TEST(DenseMatrix, Products) {
  const DenseMatrix a(2, 3, {1, 2, 3, 4, 5, 6});
  const DenseMatrix b(3, 2, {1, 0, 0, 1, 1, 1});
  EXPECT_EQ(multiply(a, b), DenseMatrix(2, 2, std::vector<double>{4, 5, 10, 11}));
  EXPECT_EQ(multiply_transpose_left(a, a), multiply(a.transposed(), a));
  EXPECT_EQ(multiply_transpose_right(a, a), multiply(a, a.transposed()));
  EXPECT_EQ(a.column(1), (std::vector<double>{2, 5}));
  EXPECT_EQ(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(frobenius_norm(a), std::sqrt(91.0));
}

TEST(Csr, SumsDuplicatesAndMultiplies) {
  const CsrMatrix m(2, 3, {{0, 1, 1.0}, {0, 1, 2.0}, {1, 2, 0.0}, {1, 0, 4.0}});
  EXPECT_EQ(m.nonzeros(), 2u);
  EXPECT_EQ(m.at(0, 1), 3.0);
  EXPECT_EQ(m.at(1, 2), 0.0);
  Rng rng(1);
  const auto x = oracle::gaussian(3, 2, rng);
  EXPECT_LT(max_abs_diff(m.multiply(x), multiply(m.to_dense(), x)), 1e-15);
  const auto y = oracle::gaussian(2, 2, rng);
  EXPECT_LT(max_abs_diff(m.multiply_transpose(y), multiply_transpose_left(m.to_dense(), y)), 1e-15);
}

TEST(Svd, IdentityAndDiagonal) {
  const auto eye = truncated_svd(DenseMatrix::identity(4), 4);
  for (double s : eye.singular_values) EXPECT_NEAR(s, 1.0, 1e-12);
  DenseMatrix d(3, 3);
  d(0, 0) = 3;
  d(1, 1) = 2;
  d(2, 2) = 1;
  const auto top = truncated_svd(d, 2);
  ASSERT_EQ(top.rank(), 2u);
  EXPECT_NEAR(top.singular_values[0], 3.0, 1e-12);
  EXPECT_NEAR(top.singular_values[1], 2.0, 1e-12);
}

TEST(Svd, MatchesDenseOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t m = 2 + rng.below(59);
    const std::size_t n = 1 + rng.below(40);
    const auto a = oracle::gaussian(m, n, rng);
    const std::size_t k = 1 + rng.below(std::min(m, n));
    SvdOptions o;
    o.seed = trial;
    const auto s = truncated_svd(a, k, o);
    const auto ref = oracle::singular_values(a);
    for (std::size_t i = 0; i < k; ++i) EXPECT_NEAR(s.singular_values[i], ref[i], 1e-6 * ref[i]);
    EXPECT_LT(orthonormality_error(s.u), 1e-8);
    EXPECT_LT(orthonormality_error(s.v), 1e-8);
    EXPECT_LE(reconstruction_error2(a, s), 1.05 * oracle::optimal_rank_k_error2(a, k) + 1e-20);
  }
}

TEST(Svd, ThirtyByTwentyTopFive) {
  Rng rng(30);
  const auto a = oracle::gaussian(30, 20, rng);
  const auto s = truncated_svd(a, 5);
  const auto ref = oracle::singular_values(a);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(s.singular_values[i], ref[i], 1e-6 * ref[i]);
}

TEST(Svd, ReconstructionErrorNonIncreasingInRank) {
  Rng rng(3);
  const auto a = oracle::gaussian(25, 15, rng);
  double previous = INFINITY;
  for (std::size_t k = 1; k <= 15; ++k) {
    const double e = reconstruction_error2(a, truncated_svd(a, k));
    EXPECT_LE(e, previous * (1 + 1e-12) + 1e-20);
    previous = e;
  }
}

TEST(Svd, SparseAndDenseAgree) {
  Rng rng(4);
  std::vector<Triplet> t;
  for (std::uint32_t i = 0; i < 40; ++i)
    for (std::uint32_t j = 0; j < 30; ++j)
      if (rng.uniform() < 0.2) t.push_back({i, j, rng.normal()});
  const CsrMatrix s(40, 30, t);
  const auto a = truncated_svd(s, 6);
  const auto b = truncated_svd(s.to_dense(), 6);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(a.singular_values[i], b.singular_values[i], 1e-9);
  EXPECT_LT(max_abs_diff(a.u, b.u), 1e-6);
}

TEST(Svd, SignCanonicalizationAndDeterminism) {
  Rng rng(5);
  const auto a = oracle::gaussian(20, 10, rng);
  const auto s = truncated_svd(a, 4);
  for (std::size_t c = 0; c < 4; ++c) {
    const auto col = s.u.column(c);
    const auto it = std::max_element(col.begin(), col.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
    EXPECT_GT(*it, 0.0);
  }
  const auto again = truncated_svd(a, 4);
  EXPECT_EQ(s.u, again.u);
  EXPECT_EQ(s.singular_values, again.singular_values);
}

TEST(Svd, RankErrors) {
  EXPECT_ERROR_CODE(truncated_svd(DenseMatrix::identity(3), 0), "svd-rank");
  EXPECT_ERROR_CODE(truncated_svd(DenseMatrix::identity(3), 4), "svd-rank");
}

TEST(Jacobi, FullSvdMatchesOracle) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = oracle::gaussian(1 + rng.below(30), 1 + rng.below(30), rng);
    const auto s = jacobi_svd(a);
    const auto ref = oracle::singular_values(a);
    ASSERT_EQ(s.rank(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(s.singular_values[i], ref[i], 1e-10 * ref[0]);
    EXPECT_LT(max_abs_diff(s.reconstruct(), a), 1e-10 * ref[0]);
  }
}

TEST(Qr, OrthonormalBasisSpansColumns) {
  Rng rng(7);
  const auto a = oracle::gaussian(12, 5, rng);
  const auto q = orthonormal_basis(a);
  EXPECT_LT(orthonormality_error(q), 1e-12);
  const auto proj = multiply(q, multiply_transpose_left(q, a));
  EXPECT_LT(max_abs_diff(proj, a), 1e-12);
}

TEST(LeastSquares, IdentityTarget) {
  Rng rng(8);
  const auto x = oracle::gaussian(200, 6, rng);
  const auto model = solve_least_squares_sgd(x, x);
  EXPECT_LT(max_abs_diff(model.w, DenseMatrix::identity(6)), 1e-3);
}

TEST(LeastSquares, RecoversPlantedMapAndMatchesOracleResidual) {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d_in = 1 + rng.below(20);
    const std::size_t d_out = 1 + rng.below(20);
    const std::size_t n = d_in + 20 + rng.below(200);
    const auto x = oracle::gaussian(n, d_in, rng);
    const auto w_star = oracle::gaussian(d_out, d_in, rng);
    const auto z = multiply_transpose_right(x, w_star);
    SgdOptions o;
    o.seed = trial;
    const auto model = solve_least_squares_sgd(x, z, o);
    EXPECT_LT(max_abs_diff(model.w, w_star), 1e-3);
    const auto w_ref = oracle::normal_equations(x, z);
    EXPECT_LT(max_abs_diff(w_ref, w_star), 1e-9);
  }
}

TEST(LeastSquares, NoisyResidualWithinFivePercentOfOracle) {
  Rng rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d_in = 1 + rng.below(30);
    const std::size_t d_out = 1 + rng.below(30);
    const std::size_t n = d_in + 10 + rng.below(300);
    const auto x = oracle::gaussian(n, d_in, rng);
    auto z = multiply_transpose_right(x, oracle::gaussian(d_out, d_in, rng));
    for (double& v : z.values()) v += 0.3 * rng.normal();
    const auto model = solve_least_squares_sgd(x, z);
    const double oracle_residual = mean_squared_residual(oracle::normal_equations(x, z), x, z);
    EXPECT_LE(model.fit_mse, 1.05 * oracle_residual);
    EXPECT_DOUBLE_EQ(model.fit_mse, mean_squared_residual(model.w, x, z));
  }
}

TEST(LeastSquares, SingleRowIsInterpolated) {
  const DenseMatrix x(1, 3, {1.0, -2.0, 0.5});
  const DenseMatrix z(1, 2, {3.0, 1.0});
  const auto model = solve_least_squares_sgd(x, z);
  EXPECT_LT(model.fit_mse, 1e-8);
}

TEST(LeastSquares, Deterministic) {
  Rng rng(11);
  const auto x = oracle::gaussian(50, 4, rng);
  const auto z = oracle::gaussian(50, 3, rng);
  EXPECT_EQ(solve_least_squares_sgd(x, z).w, solve_least_squares_sgd(x, z).w);
}

TEST(Stats, SpearmanExamples) {
  const std::vector<double> a{1, 2, 3};
  EXPECT_DOUBLE_EQ(spearman(a, a), 1.0);
  EXPECT_DOUBLE_EQ(spearman(a, std::vector<double>{3, 2, 1}), -1.0);
  EXPECT_NEAR(spearman(std::vector<double>{1, 2, 3, 4, 5}, std::vector<double>{2, 1, 4, 3, 5}), 0.8, 1e-12);
  EXPECT_ERROR_CODE(spearman(a, std::vector<double>{1, 1, 1}), "degenerate-ranks");
}

TEST(Stats, PearsonExamples) {
  EXPECT_DOUBLE_EQ(pearson(std::vector<double>{0, 1}, std::vector<double>{0, 2}), 1.0);
  EXPECT_ERROR_CODE(pearson(std::vector<double>{0, 1, 2}, std::vector<double>{5, 5, 5}), "degenerate-variance");
  EXPECT_ERROR_CODE(pearson(std::vector<double>{0, 1, 2}, std::vector<double>{5, 5}), "shape");
  const std::vector<double> a{1, 2, 3, 5}, b{1, 3, 2, 6};
  // Centred: a = (-1.75, -0.75, 0.25, 2.25), b = (-2, 0, -1, 3), so
  // r = 10 / sqrt(8.75 * 14) = 0.903508...
  EXPECT_NEAR(pearson(a, b), 10.0 / std::sqrt(8.75 * 14.0), 1e-12);
  EXPECT_NEAR(pearson(a, b), oracle::pearson(a, b), 1e-12);
}

TEST(Stats, AverageRanksShareTies) {
  EXPECT_EQ(average_ranks(std::vector<double>{10, 20, 10, 30}), (std::vector<double>{1.5, 3, 1.5, 4}));
}

TEST(Stats, SpearmanClosedFormOnPermutations) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.below(40);
    std::vector<double> a(n), b(n);
    std::iota(a.begin(), a.end(), 1.0);
    std::iota(b.begin(), b.end(), 1.0);
    rng.shuffle(std::span<double>(b));
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    const double nn = static_cast<double>(n);
    EXPECT_NEAR(spearman(a, b), 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0)), 1e-12);
  }
}

TEST(Stats, SpearmanMonotoneInvariance) {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng.below(30);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = std::round(rng.normal() * 4);  // ties on purpose
      b[i] = rng.normal();
    }
    if (std::all_of(a.begin(), a.end(), [&](double v) { return v == a[0]; })) continue;
    std::vector<double> ta(n), tb(n);
    for (std::size_t i = 0; i < n; ++i) {
      ta[i] = std::exp(a[i] / 3.0);
      tb[i] = b[i] * b[i] * b[i] - 7.0;
    }
    EXPECT_NEAR(spearman(ta, tb), spearman(a, b), 1e-12);
  }
}

TEST(Stats, PearsonOfAffineImage) {
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.below(30);
    std::vector<double> a(n), b(n);
    for (double& v : a) v = rng.normal();
    double alpha = rng.normal();
    if (alpha == 0.0) alpha = 1.0;
    const double beta = rng.normal() * 10;
    for (std::size_t i = 0; i < n; ++i) b[i] = alpha * a[i] + beta;
    EXPECT_NEAR(pearson(a, b), alpha > 0 ? 1.0 : -1.0, 1e-12);
  }
}
