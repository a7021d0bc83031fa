#include "embfuse/eval/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <map>
#include <memory>
#include <string>

#include "embfuse/error.hpp"
#include "embfuse/parallel.hpp"

namespace embfuse::eval {

namespace {

constexpr double kTau = 1e-12;

double rbf(std::span<const double> a, std::span<const double> b, double gamma) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

// Columns of the training kernel matrix.
class KernelColumns {
 public:
  virtual ~KernelColumns() = default;
  virtual std::span<const double> column(std::size_t i) = 0;
};

class FullKernel final : public KernelColumns {
 public:
  FullKernel(const DenseMatrix& x, double gamma, std::size_t threads) : n_(x.rows()), k_(n_ * n_) {
    parallel_for(n_, threads, [&](std::size_t i, std::size_t) {
      for (std::size_t j = 0; j < n_; ++j) k_[i * n_ + j] = rbf(x.row(i), x.row(j), gamma);
    });
  }
  std::span<const double> column(std::size_t i) override { return {k_.data() + i * n_, n_}; }

 private:
  std::size_t n_;
  std::vector<double> k_;
};

class CachedKernel final : public KernelColumns {
 public:
  CachedKernel(const DenseMatrix& x, double gamma, std::size_t capacity)
      : x_(x), gamma_(gamma), capacity_(std::max<std::size_t>(2, capacity)) {}

  std::span<const double> column(std::size_t i) override {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    std::vector<double> col;
    if (lru_.size() >= capacity_) {
      col = std::move(lru_.back().second);
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    col.resize(x_.rows());
    for (std::size_t j = 0; j < x_.rows(); ++j) col[j] = rbf(x_.row(i), x_.row(j), gamma_);
    lru_.emplace_front(i, std::move(col));
    index_[i] = lru_.begin();
    return lru_.front().second;
  }

 private:
  using Entry = std::pair<std::size_t, std::vector<double>>;
  const DenseMatrix& x_;
  double gamma_;
  std::size_t capacity_;
  std::list<Entry> lru_;
  std::map<std::size_t, std::list<Entry>::iterator> index_;
};

struct BinarySolution {
  std::vector<double> alpha;
  double rho = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
};

// Dual: min 0.5 a'Qa - e'a, 0 <= a <= C, y'a = 0, Q_ij = y_i y_j K_ij.
BinarySolution solve_binary(KernelColumns& kernel, const std::vector<double>& y, double c, double tol,
                            std::size_t max_iter) {
  const std::size_t n = y.size();
  BinarySolution s;
  s.alpha.assign(n, 0.0);
  std::vector<double> g(n, -1.0);
  auto& a = s.alpha;
  auto upper = [&](std::size_t t) { return a[t] >= c; };
  auto lower = [&](std::size_t t) { return a[t] <= 0.0; };

  for (;;) {
    // i maximizes -y G over I_up.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0 ? !upper(t) : !lower(t)) {
        const double v = -y[t] * g[t];
        if (v >= gmax) {
          gmax = v;
          i = t;
        }
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t j = n;
    double best = std::numeric_limits<double>::infinity();
    std::span<const double> ki;
    if (i < n) ki = kernel.column(i);
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0 ? lower(t) : upper(t)) continue;
      const double v = y[t] * g[t];  // = -(-y G)
      if (v >= gmax2) gmax2 = v;
      if (i == n) continue;
      const double diff = gmax + v;
      if (diff > 0.0) {
        double quad = 2.0 - 2.0 * ki[t];  // K_ii = K_tt = 1 for RBF
        if (quad <= 0.0) quad = kTau;
        const double obj = -(diff * diff) / quad;
        if (obj <= best) {
          best = obj;
          j = t;
        }
      }
    }
    if (i == n || j == n || gmax + gmax2 < tol) break;
    if (s.iterations >= max_iter) {
      s.converged = false;
      break;
    }
    ++s.iterations;

    const auto kj = kernel.column(j);
    ki = kernel.column(i);
    const double old_i = a[i];
    const double old_j = a[j];
    // Q_ii = Q_jj = 1, Q_ij = y_i y_j K_ij.
    const double qij = y[i] * y[j] * ki[j];
    if (y[i] != y[j]) {
      double quad = 2.0 + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-g[i] - g[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0.0) {
        if (a[j] < 0.0) {
          a[j] = 0.0;
          a[i] = diff;
        }
      } else if (a[i] < 0.0) {
        a[i] = 0.0;
        a[j] = -diff;
      }
      if (diff > 0.0) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = c - diff;
        }
      } else if (a[j] > c) {
        a[j] = c;
        a[i] = c + diff;
      }
    } else {
      double quad = 2.0 - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (g[i] - g[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > c) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = sum - c;
        }
      } else if (a[j] < 0.0) {
        a[j] = 0.0;
        a[i] = sum;
      }
      if (sum > c) {
        if (a[j] > c) {
          a[j] = c;
          a[i] = sum - c;
        }
      } else if (a[i] < 0.0) {
        a[i] = 0.0;
        a[j] = sum;
      }
    }
    const double di = a[i] - old_i;
    const double dj = a[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) {
      g[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
    }
  }

  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * g[t];
    if (upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  s.rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (ub + lb) / 2.0;
  return s;
}

}  // namespace

GammaPolicy parse_gamma_policy(std::string_view name) {
  if (name == "scale") return GammaPolicy::scale;
  if (name == "fixed") return GammaPolicy::fixed;
  throw Error("config", "gamma policy must be scale|fixed, got '" + std::string(name) + "'");
}

bool SvmModel::converged() const {
  return std::all_of(machines.begin(), machines.end(), [](const auto& m) { return m.converged; });
}

double scale_gamma(const DenseMatrix& x) {
  const auto v = x.values();
  if (v.empty()) return 1.0;
  double mean = 0.0;
  for (double e : v) mean += e;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double e : v) var += (e - mean) * (e - mean);
  var /= static_cast<double>(v.size());
  if (!(var > 0.0)) return 1.0;
  return 1.0 / (static_cast<double>(x.cols()) * var);
}

SvmModel svm_train(const DenseMatrix& x, std::span<const std::uint32_t> y, std::size_t n_classes,
                   const SvmConfig& config) {
  if (x.rows() != y.size()) throw Error("shape", "feature rows and labels differ in count");
  if (!(config.c > 0.0)) throw Error("svm-input", "C must be positive");
  if (!x.all_finite()) throw Error("svm-input", "features contain non-finite values");
  std::vector<std::size_t> class_size(n_classes, 0);
  for (auto label : y) {
    if (label >= n_classes) throw Error("svm-input", "label " + std::to_string(label) + " out of range");
    ++class_size[label];
  }
  if (std::count_if(class_size.begin(), class_size.end(), [](auto s) { return s > 0; }) < 2) {
    throw Error("svm-input", "training data needs at least two classes");
  }

  SvmModel model;
  model.c = config.c;
  model.n_classes = n_classes;
  model.feature_dim = x.cols();
  model.gamma = config.gamma_policy == GammaPolicy::scale ? scale_gamma(x) : config.gamma;
  if (!(model.gamma > 0.0)) throw Error("svm-input", "gamma must be positive");

  const std::size_t n = x.rows();
  const double budget = static_cast<double>(config.cache_mb) * 1024.0 * 1024.0;
  const bool full = static_cast<double>(n) * static_cast<double>(n) * sizeof(double) <= budget;
  std::unique_ptr<FullKernel> shared;
  if (full) shared = std::make_unique<FullKernel>(x, model.gamma, config.threads);
  const std::size_t cache_columns =
      static_cast<std::size_t>(budget / (static_cast<double>(std::max<std::size_t>(n, 1)) * sizeof(double)));

  std::vector<BinarySolution> solutions(n_classes);
  const std::size_t machine_threads = full ? config.threads : 1;
  parallel_for(n_classes, machine_threads, [&](std::size_t m, std::size_t) {
    if (class_size[m] == 0) return;
    std::vector<double> ym(n);
    for (std::size_t t = 0; t < n; ++t) ym[t] = y[t] == m ? 1.0 : -1.0;
    if (full) {
      solutions[m] = solve_binary(*shared, ym, config.c, config.tol, config.max_iter);
    } else {
      CachedKernel cache(x, model.gamma, cache_columns);
      solutions[m] = solve_binary(cache, ym, config.c, config.tol, config.max_iter);
    }
  });

  std::vector<std::int64_t> slot(n, -1);
  for (std::size_t m = 0; m < n_classes; ++m) {
    BinaryMachine machine;
    if (class_size[m] == 0) {
      machine.trained = false;
      machine.rho = 1.0;
      model.machines.push_back(std::move(machine));
      continue;
    }
    const auto& sol = solutions[m];
    machine.rho = sol.rho;
    machine.iterations = sol.iterations;
    machine.converged = sol.converged;
    for (std::size_t t = 0; t < n; ++t) {
      if (sol.alpha[t] <= 0.0) continue;
      if (slot[t] < 0) {
        slot[t] = static_cast<std::int64_t>(model.support_rows.size());
        model.support_rows.push_back(static_cast<std::uint32_t>(t));
      }
      machine.support.push_back(static_cast<std::uint32_t>(slot[t]));
      machine.coef.push_back((y[t] == m ? 1.0 : -1.0) * sol.alpha[t]);
    }
    model.machines.push_back(std::move(machine));
  }
  model.support_vectors = DenseMatrix(model.support_rows.size(), x.cols());
  for (std::size_t s = 0; s < model.support_rows.size(); ++s) {
    auto src = x.row(model.support_rows[s]);
    std::copy(src.begin(), src.end(), model.support_vectors.row(s).begin());
  }
  return model;
}

DenseMatrix decision_values(const SvmModel& model, const DenseMatrix& x, std::size_t threads) {
  if (x.cols() != model.feature_dim) {
    throw Error("shape", "model expects " + std::to_string(model.feature_dim) + " features, got " +
                             std::to_string(x.cols()));
  }
  DenseMatrix out(x.rows(), model.machines.size());
  parallel_for(x.rows(), threads, [&](std::size_t r, std::size_t) {
    std::vector<double> k(model.support_vectors.rows());
    for (std::size_t s = 0; s < k.size(); ++s) k[s] = rbf(model.support_vectors.row(s), x.row(r), model.gamma);
    for (std::size_t m = 0; m < model.machines.size(); ++m) {
      const auto& machine = model.machines[m];
      double f = -machine.rho;
      for (std::size_t e = 0; e < machine.support.size(); ++e) f += machine.coef[e] * k[machine.support[e]];
      out(r, m) = f;
    }
  });
  return out;
}

std::vector<std::uint32_t> svm_predict(const SvmModel& model, const DenseMatrix& x, std::size_t threads) {
  const auto scores = decision_values(model, x, threads);
  std::vector<std::uint32_t> labels(x.rows(), 0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t m = 1; m < scores.cols(); ++m) {
      if (scores(r, m) > scores(r, labels[r])) labels[r] = static_cast<std::uint32_t>(m);
    }
  }
  return labels;
}

double kkt_max_violation(const SvmModel& model, std::size_t m, const DenseMatrix& x,
                         std::span<const std::uint32_t> y) {
  const auto& machine = model.machines.at(m);
  if (!machine.trained) return 0.0;
  std::vector<double> alpha(x.rows(), 0.0);
  for (std::size_t e = 0; e < machine.support.size(); ++e) {
    alpha[model.support_rows[machine.support[e]]] = std::abs(machine.coef[e]);
  }
  const auto scores = decision_values(model, x);
  double worst = 0.0;
  for (std::size_t t = 0; t < x.rows(); ++t) {
    const double yt = y[t] == m ? 1.0 : -1.0;
    const double margin = yt * scores(t, m);
    double v;
    if (alpha[t] <= 0.0) v = std::max(0.0, 1.0 - margin);
    else if (alpha[t] >= model.c) v = std::max(0.0, margin - 1.0);
    else v = std::abs(margin - 1.0);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace embfuse::eval
