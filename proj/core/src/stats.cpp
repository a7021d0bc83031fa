#include "embfuse/numerics/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "embfuse/error.hpp"

namespace embfuse::numerics {

namespace {

void check_sizes(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("shape", "correlation inputs differ in length");
  if (a.size() < 2) throw Error("shape", "correlation needs at least 2 observations");
}

// Returns the correlation, or NaN when either side has zero variance.
double correlation_or_nan(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) return std::nan("");
  const double r = cov / std::sqrt(var_a * var_b);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  check_sizes(a, b);
  const double r = correlation_or_nan(a, b);
  if (std::isnan(r)) throw Error("degenerate-variance", "an input has zero variance");
  return r;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  check_sizes(a, b);
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double r = correlation_or_nan(ra, rb);
  if (std::isnan(r)) throw Error("degenerate-ranks", "an input ranking is constant");
  return r;
}

}  // namespace embfuse::numerics
