#include "embfuse/numerics/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "embfuse/error.hpp"
#include "embfuse/random.hpp"

namespace embfuse::numerics {

namespace {

// One-sided Jacobi on a tall matrix (rows >= cols). On return g holds
// U * diag(s) and j holds V. Columns are rotated in transposed copies so
// each one is contiguous.
void hestenes_jacobi(DenseMatrix& g, DenseMatrix& j) {
  const std::size_t m = g.rows();
  const std::size_t n = g.cols();
  DenseMatrix gt = g.transposed();
  DenseMatrix jt = DenseMatrix::identity(n);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr int max_sweeps = 80;
  // Columns below eps * ||A||_F are numerical zeros; rotating them against
  // each other only shuffles round-off.
  double frob2 = 0.0;
  for (double x : gt.values()) frob2 += x * x;
  const double negligible = eps * eps * frob2;
  // Rotation threshold on the column correlation; a bare eps lets round-off
  // in the inner products flip a pair back and forth forever.
  const double threshold = eps * std::sqrt(static_cast<double>(m));

  auto rotate = [](std::span<double> x, std::span<double> y, double c, double s) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double xp = x[i], yq = y[i];
      x[i] = c * xp - s * yq;
      y[i] = s * xp + c * yq;
    }
  };
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto gp = gt.row(p);
        auto gq = gt.row(q);
        const double alpha = dot(gp, gp);
        const double beta = dot(gq, gq);
        const double gamma = dot(gp, gq);
        if (alpha <= negligible || beta <= negligible) continue;
        if (gamma == 0.0 || std::abs(gamma) <= threshold * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate(gp, gq, c, s);
        rotate(jt.row(p), jt.row(q), c, s);
      }
    }
    if (!rotated) {
      g = gt.transposed();
      j = jt.transposed();
      return;
    }
  }
  throw Error("svd-no-convergence", "Jacobi SVD did not converge in " +
                                        std::to_string(max_sweeps) + " sweeps");
}

// Fills zero columns of u (flagged in `missing`) with unit vectors orthogonal
// to every other column.
void complete_basis(DenseMatrix& u, const std::vector<bool>& missing) {
  const std::size_t m = u.rows();
  std::size_t probe = 0;
  for (std::size_t c = 0; c < u.cols(); ++c) {
    if (!missing[c]) continue;
    for (; probe < m; ++probe) {
      std::vector<double> cand(m, 0.0);
      cand[probe] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t o = 0; o < u.cols(); ++o) {
          if (o == c || (missing[o] && o > c)) continue;
          double d = 0.0;
          for (std::size_t i = 0; i < m; ++i) d += cand[i] * u(i, o);
          for (std::size_t i = 0; i < m; ++i) cand[i] -= d * u(i, o);
        }
      }
      const double nrm = norm2(cand);
      if (nrm > 1e-6) {
        for (std::size_t i = 0; i < m; ++i) u(i, c) = cand[i] / nrm;
        ++probe;
        break;
      }
    }
  }
}

SvdResult jacobi_square_or_wide(const DenseMatrix& a);

SvdResult jacobi_tall(const DenseMatrix& a) {
  if (a.rows() >= 2 * a.cols() && a.cols() > 0) {
    // A = QR, then Jacobi on the small R: same singular values, U = Q U_R.
    const DenseMatrix q = orthonormal_basis(a);
    SvdResult small = jacobi_square_or_wide(multiply_transpose_left(q, a));
    small.u = multiply(q, small.u);
    return small;
  }
  return jacobi_square_or_wide(a);
}

SvdResult jacobi_square_or_wide(const DenseMatrix& a) {
  DenseMatrix g = a;
  DenseMatrix j;
  hestenes_jacobi(g, j);
  const std::size_t m = g.rows();
  const std::size_t n = g.cols();

  std::vector<double> norms(n);
  for (std::size_t c = 0; c < n; ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += g(i, c) * g(i, c);
    norms[c] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  const double tiny = norms.empty() ? 0.0
                                    : std::numeric_limits<double>::epsilon() *
                                          static_cast<double>(std::max(m, n)) * norms[order[0]];
  SvdResult out;
  out.u = DenseMatrix(m, n);
  out.v = DenseMatrix(n, n);
  out.singular_values.resize(n);
  std::vector<bool> missing(n, false);
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t src = order[c];
    const double sigma = norms[src];
    if (sigma > tiny && sigma > 0.0) {
      out.singular_values[c] = sigma;
      for (std::size_t i = 0; i < m; ++i) out.u(i, c) = g(i, src) / sigma;
    } else {
      out.singular_values[c] = 0.0;
      missing[c] = true;
    }
    for (std::size_t i = 0; i < n; ++i) out.v(i, c) = j(i, src);
  }
  complete_basis(out.u, missing);
  return out;
}

DenseMatrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (double& x : m.values()) x = rng.normal();
  return m;
}

DenseMatrix leading_columns(const DenseMatrix& a, std::size_t k) {
  DenseMatrix out(a.rows(), k);
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < k; ++c) out(r, c) = a(r, c);
  return out;
}

}  // namespace

DenseMatrix SvdResult::reconstruct() const {
  DenseMatrix scaled = u;
  for (std::size_t r = 0; r < scaled.rows(); ++r)
    for (std::size_t c = 0; c < scaled.cols(); ++c) scaled(r, c) *= singular_values[c];
  return multiply_transpose_right(scaled, v);
}

void canonicalize_signs(SvdResult& svd) {
  for (std::size_t c = 0; c < svd.u.cols(); ++c) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t r = 0; r < svd.u.rows(); ++r) {
      const double x = std::abs(svd.u(r, c));
      if (x > best_abs) {
        best_abs = x;
        best = r;
      }
    }
    if (svd.u.rows() > 0 && svd.u(best, c) < 0.0) {
      for (std::size_t r = 0; r < svd.u.rows(); ++r) svd.u(r, c) = -svd.u(r, c);
      for (std::size_t r = 0; r < svd.v.rows(); ++r) svd.v(r, c) = -svd.v(r, c);
    }
  }
}

DenseMatrix orthonormal_basis(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) throw Error("shape", "orthonormal_basis needs rows >= cols");
  // Householder QR on the transpose: row c of rt is column c of A.
  DenseMatrix rt = a.transposed();
  std::vector<std::vector<double>> reflectors(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto col = rt.row(k);
    std::vector<double> v(col.begin() + static_cast<std::ptrdiff_t>(k), col.end());
    const double alpha = norm2(v);
    if (alpha == 0.0) continue;
    v[0] += std::copysign(alpha, v[0] == 0.0 ? 1.0 : v[0]);
    const double vnorm = norm2(v);
    for (double& x : v) x /= vnorm;
    for (std::size_t c = k; c < n; ++c) {
      auto target = rt.row(c).subspan(k);
      const double d = dot(v, target);
      for (std::size_t i = 0; i < v.size(); ++i) target[i] -= 2.0 * d * v[i];
    }
    reflectors[k] = std::move(v);
  }
  DenseMatrix qt(n, m);
  for (std::size_t c = 0; c < n; ++c) qt(c, c) = 1.0;
  for (std::size_t kk = n; kk-- > 0;) {
    const auto& v = reflectors[kk];
    if (v.empty()) continue;
    for (std::size_t c = 0; c < n; ++c) {
      auto target = qt.row(c).subspan(kk);
      const double d = dot(v, target);
      for (std::size_t i = 0; i < v.size(); ++i) target[i] -= 2.0 * d * v[i];
    }
  }
  return qt.transposed();
}

SvdResult jacobi_svd(const DenseMatrix& a) {
  SvdResult out;
  if (a.rows() >= a.cols()) {
    out = jacobi_tall(a);
  } else {
    SvdResult t = jacobi_tall(a.transposed());
    out.u = std::move(t.v);
    out.v = std::move(t.u);
    out.singular_values = std::move(t.singular_values);
  }
  canonicalize_signs(out);
  return out;
}

SvdResult truncated_svd(const LinearOperator& a, std::size_t k, const SvdOptions& options) {
  constexpr std::size_t kGrowEvery = 8;
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const std::size_t full = std::min(m, n);
  if (k < 1 || k > full) {
    throw Error("svd-rank", "k=" + std::to_string(k) + " outside [1, " + std::to_string(full) + "]");
  }
  const std::size_t width = std::min(k + options.oversampling, full);

  Rng rng(options.seed);
  DenseMatrix q = orthonormal_basis(a.apply(gaussian(n, width, rng)));
  for (std::size_t i = 0; i < options.power_iterations; ++i) {
    q = orthonormal_basis(a.apply(orthonormal_basis(a.apply_transpose(q))));
  }

  std::size_t extra = 0;
  for (;;) {
    // B^T = A^T Q (n x width); B^T = U' S V'^T gives A ~ (Q V') S U'^T.
    DenseMatrix bt = a.apply_transpose(q);
    SvdResult small = jacobi_svd(bt);
    SvdResult result;
    result.singular_values.assign(small.singular_values.begin(),
                                  small.singular_values.begin() + static_cast<std::ptrdiff_t>(k));
    result.u = multiply(q, leading_columns(small.v, k));
    result.v = leading_columns(small.u, k);
    result.iterations = options.power_iterations + extra;

    const double top = result.singular_values.empty() ? 0.0 : result.singular_values[0];
    bool converged = top == 0.0;
    if (!converged) {
      const DenseMatrix av = a.apply(result.v);
      double worst = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
          const double d = av(r, c) - result.singular_values[c] * result.u(r, c);
          s += d * d;
        }
        worst = std::max(worst, std::sqrt(s));
      }
      converged = worst <= options.tol * top;
    }
    if (converged) {
      canonicalize_signs(result);
      return result;
    }
    if (extra >= options.max_iter) {
      throw Error("svd-no-convergence",
                  "subspace iteration did not converge after " +
                      std::to_string(options.power_iterations + extra) + " iterations");
    }
    ++extra;
    if (extra % kGrowEvery == 0 && q.cols() < full) {
      // Flat spectra converge slowly at the initial width; widen the block
      // with fresh random directions.
      const std::size_t grow = std::min(full - q.cols(), std::max<std::size_t>(options.oversampling, k / 2));
      const DenseMatrix fresh = a.apply(gaussian(n, grow, rng));
      DenseMatrix wider(m, q.cols() + grow);
      const DenseMatrix aq = a.apply(small.u);
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < aq.cols(); ++c) wider(r, c) = aq(r, c);
        for (std::size_t c = 0; c < grow; ++c) wider(r, aq.cols() + c) = fresh(r, c);
      }
      q = orthonormal_basis(wider);
    } else {
      // small.u is an orthonormal basis for the range of A^T Q.
      q = orthonormal_basis(a.apply(small.u));
    }
  }
}

SvdResult truncated_svd(const DenseMatrix& a, std::size_t k, const SvdOptions& options) {
  return truncated_svd(DenseOperator(a), k, options);
}

SvdResult truncated_svd(const CsrMatrix& a, std::size_t k, const SvdOptions& options) {
  return truncated_svd(SparseOperator(a), k, options);
}

}  // namespace embfuse::numerics
