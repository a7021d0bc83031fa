#include "oracles.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace embfuse::oracle {

namespace {

Eigen::MatrixXd to_eigen(const DenseMatrix& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) m(r, c) = a(r, c);
  return m;
}

}  // namespace

DenseMatrix dense_ppmi(const DenseMatrix& m, double cds) {
  const std::size_t n = m.rows();
  std::vector<double> row(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      row[i] += m(i, j);
      total += m(i, j);
    }
  double smoothed_total = 0.0;
  for (std::size_t j = 0; j < n; ++j) smoothed_total += std::pow(row[j], cds);
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (m(i, j) == 0.0) continue;
      const double pij = m(i, j) / total;
      const double pi = row[i] / total;
      const double pj = std::pow(row[j], cds) / smoothed_total;
      out(i, j) = std::max(0.0, std::log(pij / (pi * pj)));
    }
  return out;
}

std::map<std::pair<std::uint32_t, std::uint32_t>, double> brute_cooccurrence(
    std::span<const std::vector<std::uint32_t>> sentences, std::size_t window) {
  // counts[pair][d] = number of occurrences at distance d.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::int64_t>> counts;
  for (const auto& s : sentences) {
    for (std::size_t a = 0; a < s.size(); ++a) {
      if (s[a] == kOov) continue;
      for (std::size_t b = a + 1; b < s.size() && b - a <= window; ++b) {
        if (s[b] == kOov) continue;
        auto& c = counts[{std::min(s[a], s[b]), std::max(s[a], s[b])}];
        c.resize(window + 1, 0);
        ++c[b - a];
      }
    }
  }
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> out;
  for (const auto& [key, c] : counts) {
    __int128 num = 0, den = 1;
    for (std::size_t d = 1; d < c.size(); ++d) {
      if (c[d] == 0) continue;
      // num/den + c/d
      num = num * static_cast<__int128>(d) + static_cast<__int128>(c[d]) * den;
      den *= static_cast<__int128>(d);
      __int128 g = num, h = den;
      while (h != 0) {
        const __int128 t = g % h;
        g = h;
        h = t;
      }
      num /= g;
      den /= g;
    }
    out[key] = static_cast<double>(static_cast<std::int64_t>(num)) /
               static_cast<double>(static_cast<std::int64_t>(den));
  }
  return out;
}

std::vector<double> singular_values(const DenseMatrix& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a));
  const auto& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

double optimal_rank_k_error2(const DenseMatrix& a, std::size_t k) {
  const auto s = singular_values(a);
  double e = 0.0;
  for (std::size_t i = k; i < s.size(); ++i) e += s[i] * s[i];
  return e;
}

DenseMatrix normal_equations(const DenseMatrix& x, const DenseMatrix& z) {
  const Eigen::MatrixXd ex = to_eigen(x);
  const Eigen::MatrixXd ez = to_eigen(z);
  const Eigen::MatrixXd gram = ex.transpose() * ex;
  const Eigen::MatrixXd wt = gram.fullPivLu().solve(ex.transpose() * ez);  // d_in x d_out
  DenseMatrix w(wt.cols(), wt.rows());
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t c = 0; c < w.cols(); ++c) w(r, c) = wt(c, r);
  return w;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  long double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  long double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return static_cast<double>(sab / std::sqrt(saa * sbb));
}

DenseMatrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

}  // namespace embfuse::oracle
