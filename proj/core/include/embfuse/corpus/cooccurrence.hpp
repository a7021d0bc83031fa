#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "embfuse/corpus/tokenizer.hpp"
#include "embfuse/corpus/vocabulary.hpp"

namespace embfuse::corpus {

struct CooccurrenceEntry {
  std::uint32_t i;  // i <= j
  std::uint32_t j;
  double weight;

  friend bool operator==(const CooccurrenceEntry&, const CooccurrenceEntry&) = default;
};

// Sparse symmetric word-pair weights, stored once per unordered pair with
// i <= j and sorted by (i, j). Zero weights are never stored.
class CooccurrenceStore {
 public:
  CooccurrenceStore() = default;

  // Canonicalizes (i, j) order, sums duplicates, and drops zero weights.
  // Throws Error("cooccur") on negative or non-finite weights.
  static CooccurrenceStore from_entries(std::vector<CooccurrenceEntry> entries);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::span<const CooccurrenceEntry> entries() const noexcept { return entries_; }

  // Symmetric lookup; 0 when the pair never co-occurred.
  double lookup(std::uint32_t i, std::uint32_t j) const noexcept;
  double total_weight() const noexcept;
  // One past the largest word id referenced, 0 when empty.
  std::size_t id_bound() const noexcept;

  // Adds weights pairwise.
  CooccurrenceStore merged_with(const CooccurrenceStore& other) const;

  friend bool operator==(const CooccurrenceStore&, const CooccurrenceStore&) = default;

 private:
  std::vector<CooccurrenceEntry> entries_;
};

// Windowed co-occurrence accumulation over sentences of word ids.
//
// A pair of in-vocabulary tokens at distance d <= window in the same
// sentence adds 1/d to their unordered pair. Out-of-vocabulary tokens keep
// their positions but contribute nothing. For windows up to
// kExactWindowLimit, weights are accumulated as integer multiples of
// 1 / lcm(1..window), so the result is exact and independent of how the
// corpus is partitioned across workers.
class CooccurrenceCounter {
 public:
  static constexpr std::size_t kExactWindowLimit = 24;

  explicit CooccurrenceCounter(std::size_t window);

  std::size_t window() const noexcept { return window_; }
  bool exact() const noexcept { return unit_ != 0; }

  // ids: one entry per token position; kOutOfVocabulary marks OOV tokens.
  static constexpr std::uint32_t kOutOfVocabulary = 0xFFFFFFFFu;
  void add_sentence(std::span<const std::uint32_t> ids);
  void merge(const CooccurrenceCounter& other);
  CooccurrenceStore finish() const;

 private:
  struct Accumulator {
    std::int64_t units = 0;
    double weight = 0.0;
  };
  std::size_t window_;
  std::int64_t unit_;  // lcm(1..window), 0 in floating-point mode
  std::unordered_map<std::uint64_t, Accumulator> cells_;
};

std::vector<std::uint32_t> to_ids(std::span<const std::string> tokens, const Vocabulary& vocab);

// Counts every sentence; with threads > 1 sentences are split into
// contiguous blocks, counted by independent workers, and merged by addition.
// Floating-point mode (window > kExactWindowLimit) always runs on one
// worker so the summation order is fixed.
CooccurrenceStore count_cooccurrences(std::span<const std::vector<std::string>> sentences,
                                      const Vocabulary& vocab, std::size_t window,
                                      std::size_t threads = 1);

// Streams text files line by line (one sentence per line).
CooccurrenceStore count_cooccurrences_in_files(std::span<const std::filesystem::path> files,
                                               const TokenizerConfig& tokenizer,
                                               const Vocabulary& vocab, std::size_t window,
                                               std::size_t threads = 1);

// Binary shard format: 8-byte magic "EMBFCOOC", u32 version, then
// (u32 i, u32 j, f64 weight) records, all little-endian.
inline constexpr std::size_t kShardHeaderBytes = 12;
inline constexpr std::size_t kShardRecordBytes = 16;

void write_shard(const CooccurrenceStore& store, const std::filesystem::path& file);
// Splits the store into files "cooc-00000.bin", ... inside `dir`.
std::vector<std::filesystem::path> write_shards(const CooccurrenceStore& store,
                                                const std::filesystem::path& dir,
                                                std::size_t records_per_shard = 1 << 22);
// Reads a single shard file, or every "*.bin" shard inside a directory.
CooccurrenceStore read_shards(const std::filesystem::path& path);

}  // namespace embfuse::corpus
