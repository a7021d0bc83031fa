#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embfuse/corpus/tokenizer.hpp"
#include "embfuse/eval/svm.hpp"
#include "embfuse/glove/embedding_table.hpp"

namespace embfuse::eval {

// ---- metrics ---------------------------------------------------------------

struct F1Scores {
  double macro = 0.0;
  std::vector<double> per_class;
};

// Per-class F1 = 2TP / (2TP + FP + FN). A class absent from both pred and
// gold scores 0 and is averaged in, unless include_absent is false, in which
// case it is left out of the mean (and reported as 0). Labels >= n_classes
// throw Error("shape").
F1Scores f1_scores(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> gold,
                   std::size_t n_classes, bool include_absent = true);
double macro_f1(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> gold,
                std::size_t n_classes, bool include_absent = true);

// ---- datasets --------------------------------------------------------------

struct WordPair {
  std::string word1;
  std::string word2;
  double score = 0.0;
};

struct WordPairDataset {
  std::string name;
  std::vector<WordPair> entries;
};

// CSV or TSV (tab wins when a line contains one). A header row is detected
// when the score column is not numeric; it may name the columns
// (word1/"word 1", word2/"word 2", score/"average score"/gold/similarity).
// Without a header the first three columns are used. Throws
// Error("dataset") for fewer than 2 pairs or a non-finite score.
WordPairDataset load_word_pairs(const std::filesystem::path& path);

struct LabeledExample {
  std::string text;
  std::optional<std::string> text2;
  std::uint32_t label = 0;
};

struct LabeledTextDataset {
  std::map<std::string, std::vector<LabeledExample>> splits;  // "train", "validation", "test"
  std::vector<std::string> label_names;

  const std::vector<LabeledExample>& split(const std::string& name) const;
};

// Reads <dir>/{train,validation,dev,test}.{tsv,jsonl}; "dev" is stored as
// "validation". TSV files need a header. Recognized columns / keys:
//   text: text | sentence | premise | sentence1
//   text2: text2 | hypothesis | sentence2
//   label: label | category
// Label names are sorted numerically when all are integers, otherwise
// lexicographically, and ids follow that order.
LabeledTextDataset load_labeled_dataset(const std::filesystem::path& dir);

// ---- features --------------------------------------------------------------

enum class OovPolicy { skip, zero_if_all_oov };

struct OovStats {
  std::size_t tokens = 0;
  std::size_t oov_tokens = 0;
  std::size_t sentences = 0;
  std::size_t all_oov_sentences = 0;

  double oov_rate() const { return tokens ? static_cast<double>(oov_tokens) / tokens : 0.0; }
};

// Sum of the rows of in-vocabulary tokens; OOV tokens contribute nothing.
// Under zero_if_all_oov a sentence with no known token is counted in
// stats->all_oov_sentences.
std::vector<double> embed_sentence(std::span<const std::string> tokens, const EmbeddingTable& table,
                                   OovPolicy policy = OovPolicy::zero_if_all_oov,
                                   OovStats* stats = nullptr);

// [embed(premise) | embed(hypothesis)], width 2 * table.dim().
std::vector<double> embed_pair(std::span<const std::string> premise,
                               std::span<const std::string> hypothesis, const EmbeddingTable& table,
                               OovPolicy policy = OovPolicy::zero_if_all_oov,
                               OovStats* stats = nullptr);

// ---- tasks -----------------------------------------------------------------

struct SimilarityResult {
  double spearman = 0.0;
  std::size_t pairs = 0;
  std::size_t retained = 0;
  std::size_t dropped_oov = 0;
  std::vector<double> predicted;  // cosine per retained pair, dataset order

  nlohmann::json to_json() const;
};

// Cosine per pair, pairs with an OOV word dropped. Lookup tries the word as
// given, then lowercased. Throws Error("too-few-pairs") below 2 retained
// pairs; constant predictions surface as Error("degenerate-ranks").
SimilarityResult eval_similarity(const EmbeddingTable& table, const WordPairDataset& ds);

enum class TaskKind { classify, nli };

struct TaskReport {
  TaskKind task = TaskKind::classify;
  std::string train_split;
  std::string test_split;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double macro_f1 = 0.0;
  std::vector<double> per_class_f1;
  std::vector<std::string> label_names;
  OovStats oov;          // over the train and test splits
  double coverage = 0.0;  // fraction of task tokens found in the table
  double gamma = 0.0;
  double c = 0.0;
  bool svm_converged = true;

  nlohmann::json to_json() const;
};

// classify: train on "train", test on "test". nli: train on "validation",
// test on "test", features are premise/hypothesis concatenations.
TaskReport run_task(const EmbeddingTable& table, const LabeledTextDataset& ds, TaskKind task,
                    const SvmConfig& svm = {}, const corpus::TokenizerConfig& tokenizer = {},
                    OovPolicy policy = OovPolicy::zero_if_all_oov);

struct ImprovementRecord {
  std::string name;
  double common_vocab = 0.0;
  double improvement = 0.0;
};

struct CorrelationResult {
  double pearson = 0.0;
  double spearman = 0.0;
  std::size_t n = 0;
};

// Needs >= 3 records.
CorrelationResult correlate_improvement(std::span<const ImprovementRecord> records);

}  // namespace embfuse::eval
