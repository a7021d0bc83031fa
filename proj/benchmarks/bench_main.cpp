// Micro-benchmarks for the hot loops on synthetic Zipf-like inputs.
#include <benchmark/benchmark.h>

#include <cmath>
#include <string>
#include <vector>

#include "embfuse/corpus/cooccurrence.hpp"
#include "embfuse/corpus/vocabulary.hpp"
#include "embfuse/eval/svm.hpp"
#include "embfuse/glove/glove.hpp"
#include "embfuse/graph/graph.hpp"
#include "embfuse/numerics/least_squares.hpp"
#include "embfuse/numerics/svd.hpp"
#include "embfuse/random.hpp"

using namespace embfuse;

namespace {

constexpr std::size_t kVocab = 2000;

std::size_t zipf_draw(Rng& rng, std::size_t n) {
  // Inverse-CDF approximation of Zipf(1) over [0, n).
  return static_cast<std::size_t>(std::exp(rng.uniform() * std::log(static_cast<double>(n) + 1.0))) - 1;
}

corpus::Vocabulary synthetic_vocab() {
  std::vector<std::pair<std::string, std::uint64_t>> words;
  for (std::size_t i = 0; i < kVocab; ++i) words.push_back({"w" + std::to_string(i), kVocab - i});
  return corpus::Vocabulary::from_entries(words);
}

std::vector<std::vector<std::string>> synthetic_corpus(std::size_t tokens) {
  Rng rng(1);
  std::vector<std::vector<std::string>> sentences;
  for (std::size_t n = 0; n < tokens;) {
    sentences.emplace_back();
    const std::size_t len = 5 + rng.below(25);
    for (std::size_t k = 0; k < len; ++k) sentences.back().push_back("w" + std::to_string(zipf_draw(rng, kVocab)));
    n += len;
  }
  return sentences;
}

numerics::DenseMatrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  numerics::DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

void BM_Cooccurrence(benchmark::State& state) {
  const auto vocab = synthetic_vocab();
  const auto sentences = synthetic_corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(corpus::count_cooccurrences(sentences, vocab, 10));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Cooccurrence)->Arg(20000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_GloveEpoch(benchmark::State& state) {
  const auto vocab = synthetic_vocab();
  const auto store = corpus::count_cooccurrences(synthetic_corpus(100000), vocab, 10);
  glove::GloveParams p;
  p.dim = static_cast<std::size_t>(state.range(0));
  p.iterations = 1;
  auto model = glove::initialize(vocab.size(), p);
  for (auto _ : state) glove::train_from(model, store, p);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(store.size()));
}
BENCHMARK(BM_GloveEpoch)->Arg(50)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_PpmiAndSparseSvd(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  std::vector<graph::SymmetricEntry> entries;
  for (std::uint32_t i = 0; i < n; ++i)
    for (int e = 0; e < 8; ++e) {
      const auto j = static_cast<std::uint32_t>(zipf_draw(rng, n));
      entries.push_back({std::min(i, j), std::max(i, j), 1.0});
    }
  const graph::SparseSymmetricMatrix m(n, entries);
  numerics::SvdOptions o;
  for (auto _ : state) {
    const auto p = graph::ppmi(m);
    benchmark::DoNotOptimize(numerics::truncated_svd(p, 50, o));
  }
}
BENCHMARK(BM_PpmiAndSparseSvd)->Arg(2000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_DenseSvd(benchmark::State& state) {
  const auto a = gaussian(static_cast<std::size_t>(state.range(0)), 600, 3);
  for (auto _ : state) benchmark::DoNotOptimize(numerics::truncated_svd(a, 300));
}
BENCHMARK(BM_DenseSvd)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_LeastSquaresSgd(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto x = gaussian(n, 50, 4);
  const auto z = numerics::multiply_transpose_right(x, gaussian(50, 50, 5));
  for (auto _ : state) benchmark::DoNotOptimize(numerics::solve_least_squares_sgd(x, z));
}
BENCHMARK(BM_LeastSquaresSgd)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_SvmTrain(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  auto x = gaussian(n, 20, 6);
  std::vector<std::uint32_t> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<std::uint32_t>(i % 3);
    x(i, 0) += 1.5 * y[i];
  }
  for (auto _ : state) benchmark::DoNotOptimize(eval::svm_train(x, y, 3));
}
BENCHMARK(BM_SvmTrain)->Arg(300)->Arg(1500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
