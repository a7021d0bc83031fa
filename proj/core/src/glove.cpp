#include "embfuse/glove/glove.hpp"

#include <atomic>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "embfuse/error.hpp"
#include "embfuse/parallel.hpp"
#include "embfuse/random.hpp"

namespace embfuse::glove {

using numerics::DenseMatrix;

void GloveParams::validate() const {
  if (dim < 1) throw Error("config", "dim must be >= 1");
  if (!(x_max > 0.0)) throw Error("config", "x_max must be > 0");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("config", "alpha must be in (0, 1]");
  if (!(lr >= 0.0)) throw Error("config", "lr must be >= 0");
  if (iterations < 1) throw Error("config", "iterations must be >= 1");
  if (threads < 1) throw Error("config", "threads must be >= 1");
}

bool GloveModel::all_finite() const noexcept {
  auto finite = [](const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  return word.all_finite() && context.all_finite() && finite(word_bias) &&
         finite(context_bias) && word_gradsq.all_finite() && context_gradsq.all_finite() &&
         finite(word_bias_gradsq) && finite(context_bias_gradsq);
}

double weight_fn(double x, double x_max, double alpha) {
  if (!(x > 0.0)) throw Error("glove-input", "weight_fn requires x > 0");
  return x < x_max ? std::pow(x / x_max, alpha) : 1.0;
}

GloveModel initialize(std::size_t vocab_size, const GloveParams& params) {
  params.validate();
  const std::size_t d = params.dim;
  GloveModel m;
  m.word = DenseMatrix(vocab_size, d);
  m.context = DenseMatrix(vocab_size, d);
  m.word_bias.resize(vocab_size);
  m.context_bias.resize(vocab_size);
  Rng rng(params.seed);
  const double scale = 1.0 / static_cast<double>(d);
  auto draw = [&] { return (rng.uniform() - 0.5) * scale; };
  for (std::size_t r = 0; r < vocab_size; ++r) {
    for (double& v : m.word.row(r)) v = draw();
    m.word_bias[r] = draw();
  }
  for (std::size_t r = 0; r < vocab_size; ++r) {
    for (double& v : m.context.row(r)) v = draw();
    m.context_bias[r] = draw();
  }
  m.word_gradsq = DenseMatrix(vocab_size, d, 1.0);
  m.context_gradsq = DenseMatrix(vocab_size, d, 1.0);
  m.word_bias_gradsq.assign(vocab_size, 1.0);
  m.context_bias_gradsq.assign(vocab_size, 1.0);
  return m;
}

namespace {

void check_store(const corpus::CooccurrenceStore& store, std::size_t vocab_size) {
  if (store.empty()) throw Error("glove-input", "co-occurrence store is empty");
  if (store.id_bound() > vocab_size) {
    throw Error("glove-input", "co-occurrence ids exceed vocabulary size " +
                                   std::to_string(vocab_size));
  }
}

double residual(const GloveModel& m, std::uint32_t a, std::uint32_t b, double x) {
  return numerics::dot(m.word.row(a), m.context.row(b)) + m.word_bias[a] + m.context_bias[b] -
         std::log(x);
}

template <bool Racy>
double load(double& x) noexcept {
  if constexpr (Racy) {
    return std::atomic_ref<double>(x).load(std::memory_order_relaxed);
  } else {
    return x;
  }
}

template <bool Racy>
void store_value(double& x, double v) noexcept {
  if constexpr (Racy) {
    std::atomic_ref<double>(x).store(v, std::memory_order_relaxed);
  } else {
    x = v;
  }
}

// One AdaGrad step on the oriented nonzero (a, b). Returns the cost
// 0.5 f diff^2, or nullopt when the update was non-finite and skipped.
template <bool Racy>
std::optional<double> update(GloveModel& m, std::uint32_t a, std::uint32_t b, double x,
                             const GloveParams& p, std::vector<double>& scratch) {
  const std::size_t d = m.dim();
  auto w = m.word.row(a);
  auto c = m.context.row(b);
  auto gw = m.word_gradsq.row(a);
  auto gc = m.context_gradsq.row(b);

  double diff = load<Racy>(m.word_bias[a]) + load<Racy>(m.context_bias[b]) - std::log(x);
  for (std::size_t k = 0; k < d; ++k) diff += load<Racy>(w[k]) * load<Racy>(c[k]);
  const double fdiff_raw = weight_fn(x, p.x_max, p.alpha) * diff;
  const double cost = 0.5 * fdiff_raw * diff;
  const double fdiff = fdiff_raw * p.lr;

  // scratch: [0, d) word steps, [d, 2d) context steps, [2d, 4d) new accumulators.
  bool finite = std::isfinite(cost);
  for (std::size_t k = 0; k < d && finite; ++k) {
    const double t1 = fdiff * load<Racy>(c[k]);
    const double t2 = fdiff * load<Racy>(w[k]);
    const double gwk = load<Racy>(gw[k]);
    const double gck = load<Racy>(gc[k]);
    scratch[k] = t1 / std::sqrt(gwk);
    scratch[d + k] = t2 / std::sqrt(gck);
    scratch[2 * d + k] = gwk + t1 * t1;
    scratch[3 * d + k] = gck + t2 * t2;
    finite = std::isfinite(scratch[k]) && std::isfinite(scratch[d + k]) &&
             std::isfinite(scratch[2 * d + k]) && std::isfinite(scratch[3 * d + k]);
  }
  const double gbw = load<Racy>(m.word_bias_gradsq[a]);
  const double gbc = load<Racy>(m.context_bias_gradsq[b]);
  const double step_bw = fdiff / std::sqrt(gbw);
  const double step_bc = fdiff / std::sqrt(gbc);
  finite = finite && std::isfinite(step_bw) && std::isfinite(step_bc) &&
           std::isfinite(fdiff * fdiff);
  if (!finite) return std::nullopt;

  for (std::size_t k = 0; k < d; ++k) {
    store_value<Racy>(w[k], load<Racy>(w[k]) - scratch[k]);
    store_value<Racy>(c[k], load<Racy>(c[k]) - scratch[d + k]);
    store_value<Racy>(gw[k], scratch[2 * d + k]);
    store_value<Racy>(gc[k], scratch[3 * d + k]);
  }
  store_value<Racy>(m.word_bias[a], load<Racy>(m.word_bias[a]) - step_bw);
  store_value<Racy>(m.context_bias[b], load<Racy>(m.context_bias[b]) - step_bc);
  store_value<Racy>(m.word_bias_gradsq[a], gbw + fdiff * fdiff);
  store_value<Racy>(m.context_bias_gradsq[b], gbc + fdiff * fdiff);
  return cost;
}

struct SliceResult {
  double cost = 0.0;
  std::size_t updates = 0;
  std::size_t skipped = 0;
  std::optional<std::pair<std::uint32_t, std::uint32_t>> first_bad;
};

// Visits entries order[begin, end); each off-diagonal pair is applied in
// both orientations back to back. The two orientations touch disjoint
// parameters, so swapping W and C at initialization yields the same costs.
template <bool Racy>
SliceResult run_slice(GloveModel& m, const corpus::CooccurrenceStore& store,
                      std::span<const std::size_t> order, const GloveParams& p) {
  SliceResult out;
  std::vector<double> scratch(4 * m.dim());
  const auto entries = store.entries();
  for (std::size_t idx : order) {
    const auto& e = entries[idx];
    double pair_cost = 0.0;
    auto apply = [&](std::uint32_t a, std::uint32_t b) {
      ++out.updates;
      auto cost = update<Racy>(m, a, b, e.weight, p, scratch);
      if (cost) {
        pair_cost += *cost;
      } else {
        ++out.skipped;
        if (!out.first_bad) out.first_bad = std::make_pair(a, b);
      }
    };
    apply(e.i, e.j);
    if (e.i != e.j) apply(e.j, e.i);
    out.cost += pair_cost;
  }
  return out;
}

std::size_t oriented_count(const corpus::CooccurrenceStore& store) {
  std::size_t n = 0;
  for (const auto& e : store.entries()) n += e.i == e.j ? 1 : 2;
  return n;
}

}  // namespace

double objective(const GloveModel& model, const corpus::CooccurrenceStore& store,
                 const GloveParams& params) {
  double total = 0.0;
  for (const auto& e : store.entries()) {
    const double f = weight_fn(e.weight, params.x_max, params.alpha);
    const double d1 = residual(model, e.i, e.j, e.weight);
    total += 0.5 * f * d1 * d1;
    if (e.i != e.j) {
      const double d2 = residual(model, e.j, e.i, e.weight);
      total += 0.5 * f * d2 * d2;
    }
  }
  return total;
}

GloveModel objective_gradient(const GloveModel& model, const corpus::CooccurrenceStore& store,
                              const GloveParams& params) {
  GloveModel g;
  g.word = DenseMatrix(model.vocab_size(), model.dim());
  g.context = DenseMatrix(model.vocab_size(), model.dim());
  g.word_bias.assign(model.vocab_size(), 0.0);
  g.context_bias.assign(model.vocab_size(), 0.0);
  auto accumulate = [&](std::uint32_t a, std::uint32_t b, double x) {
    const double fd = weight_fn(x, params.x_max, params.alpha) * residual(model, a, b, x);
    auto gw = g.word.row(a);
    auto gc = g.context.row(b);
    auto w = model.word.row(a);
    auto c = model.context.row(b);
    for (std::size_t k = 0; k < model.dim(); ++k) {
      gw[k] += fd * c[k];
      gc[k] += fd * w[k];
    }
    g.word_bias[a] += fd;
    g.context_bias[b] += fd;
  };
  for (const auto& e : store.entries()) {
    accumulate(e.i, e.j, e.weight);
    if (e.i != e.j) accumulate(e.j, e.i, e.weight);
  }
  return g;
}

void train_from(GloveModel& model, const corpus::CooccurrenceStore& store,
                const GloveParams& params, TrainingReport* report, const EpochCallback& on_epoch) {
  params.validate();
  check_store(store, model.vocab_size());
  if (model.dim() != params.dim) throw Error("glove-input", "model width differs from params.dim");

  std::vector<std::size_t> order(store.size());
  const std::size_t nonzeros = oriented_count(store);
  const bool racy = params.mode == ExecutionMode::parallel && params.threads > 1;
  const std::size_t workers = racy ? params.threads : 1;

  for (std::size_t epoch = 1; epoch <= params.iterations; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffler(Rng::derive(params.seed, epoch));
    shuffler.shuffle(std::span<std::size_t>(order));

    std::vector<SliceResult> slices(workers);
    const std::size_t per = (order.size() + workers - 1) / workers;
    parallel_for(workers, workers, [&](std::size_t w, std::size_t) {
      const std::size_t begin = std::min(order.size(), w * per);
      const std::size_t end = std::min(order.size(), begin + per);
      std::span<const std::size_t> slice(order.data() + begin, end - begin);
      slices[w] = racy ? run_slice<true>(model, store, slice, params)
                       : run_slice<false>(model, store, slice, params);
    });

    SliceResult total;
    for (const auto& s : slices) {
      total.cost += s.cost;
      total.updates += s.updates;
      total.skipped += s.skipped;
      if (!total.first_bad && s.first_bad) total.first_bad = s.first_bad;
    }
    if (report) report->skipped_updates += total.skipped;
    if (total.skipped * 1000 > total.updates) {
      throw Error("glove-nonfinite",
                  "epoch " + std::to_string(epoch) + ": " + std::to_string(total.skipped) +
                      " non-finite updates, first at pair (" +
                      std::to_string(total.first_bad->first) + ", " +
                      std::to_string(total.first_bad->second) + ")");
    }
    const double loss = total.cost / static_cast<double>(nonzeros);
    if (report) report->epoch_loss.push_back(loss);
    if (on_epoch) on_epoch(epoch, loss);
  }
}

GloveModel train(const corpus::CooccurrenceStore& store, const corpus::Vocabulary& vocab,
                 const GloveParams& params, TrainingReport* report, const EpochCallback& on_epoch) {
  params.validate();
  check_store(store, vocab.size());
  GloveModel model = initialize(vocab.size(), params);
  train_from(model, store, params, report, on_epoch);
  return model;
}

EmbeddingTable export_vectors(const GloveModel& model, const corpus::Vocabulary& vocab,
                              ExportMode mode) {
  DenseMatrix out = model.word;
  if (mode == ExportMode::word_plus_context) {
    auto& v = out.values();
    const auto& c = model.context.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += c[i];
  }
  return EmbeddingTable(vocab, std::move(out));
}

}  // namespace embfuse::glove
