#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "embfuse/corpus/cooccurrence.hpp"
#include "embfuse/corpus/vocabulary.hpp"
#include "embfuse/glove/embedding_table.hpp"
#include "embfuse/numerics/dense_matrix.hpp"

namespace embfuse::glove {

enum class ExecutionMode {
  deterministic,  // one worker, fixed visiting order
  parallel,       // lock-free racy updates over disjoint slices of each epoch
};

struct GloveParams {
  std::size_t dim = 300;
  double x_max = 100.0;
  double alpha = 0.75;
  double lr = 0.05;
  std::size_t iterations = 100;
  std::uint64_t seed = 20240917;
  ExecutionMode mode = ExecutionMode::deterministic;
  std::size_t threads = 1;

  // Throws Error("config") naming the first violated constraint.
  void validate() const;
};

// Word vectors W, context vectors C, both bias vectors, and the AdaGrad
// squared-gradient accumulators for each block.
struct GloveModel {
  numerics::DenseMatrix word;
  numerics::DenseMatrix context;
  std::vector<double> word_bias;
  std::vector<double> context_bias;
  numerics::DenseMatrix word_gradsq;
  numerics::DenseMatrix context_gradsq;
  std::vector<double> word_bias_gradsq;
  std::vector<double> context_bias_gradsq;

  std::size_t vocab_size() const noexcept { return word.rows(); }
  std::size_t dim() const noexcept { return word.cols(); }
  bool all_finite() const noexcept;
};

// f(x) = (x / x_max)^alpha below the cutoff, 1 at and above it. x must be > 0.
double weight_fn(double x, double x_max, double alpha);

// Vectors and biases uniform in (-0.5/dim, 0.5/dim); accumulators at 1.
GloveModel initialize(std::size_t vocab_size, const GloveParams& params);

// J = sum over nonzeros X_ij of 0.5 f(X_ij) (w_i . c_j + b_i + b~_j - log X_ij)^2.
// Each stored off-diagonal pair contributes both orientations (i, j) and
// (j, i); diagonal entries contribute once.
double objective(const GloveModel& model, const corpus::CooccurrenceStore& store,
                 const GloveParams& params);

// Full-batch gradient of `objective`, laid out like the model's parameter
// blocks (the accumulator fields are left empty).
GloveModel objective_gradient(const GloveModel& model, const corpus::CooccurrenceStore& store,
                              const GloveParams& params);

struct TrainingReport {
  std::vector<double> epoch_loss;  // mean per-nonzero cost, accumulated during each pass
  std::size_t skipped_updates = 0;
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

// Trains from a fresh initialization. Throws Error("glove-input") for an
// empty store or ids outside the vocabulary, and Error("glove-nonfinite")
// (naming the epoch and first offending pair) when more than 0.1% of an
// epoch's updates are non-finite.
GloveModel train(const corpus::CooccurrenceStore& store, const corpus::Vocabulary& vocab,
                 const GloveParams& params, TrainingReport* report = nullptr,
                 const EpochCallback& on_epoch = {});

// Continues AdaGrad from an existing model (same rules as `train`).
void train_from(GloveModel& model, const corpus::CooccurrenceStore& store,
                const GloveParams& params, TrainingReport* report = nullptr,
                const EpochCallback& on_epoch = {});

enum class ExportMode { word, word_plus_context };

// Biases are never exported.
EmbeddingTable export_vectors(const GloveModel& model, const corpus::Vocabulary& vocab,
                              ExportMode mode = ExportMode::word_plus_context);

}  // namespace embfuse::glove
