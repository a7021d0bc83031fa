#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "embfuse/corpus/tokenizer.hpp"

namespace embfuse::corpus {

// Minimum frequency for a token to enter the vocabulary. The automatic
// policy keeps tokens seen 5+ times in corpora above one million tokens and
// 2+ times otherwise.
class MinCount {
 public:
  static constexpr std::uint64_t kLargeCorpusTokens = 1'000'000;

  static MinCount automatic() noexcept { return MinCount(0); }
  static MinCount fixed(std::uint64_t n);
  // "auto" or a positive integer.
  static MinCount parse(std::string_view text);

  bool is_automatic() const noexcept { return value_ == 0; }
  std::uint64_t resolve(std::uint64_t total_tokens) const noexcept;
  std::string to_string() const;

 private:
  explicit MinCount(std::uint64_t v) : value_(v) {}
  std::uint64_t value_;
};

// Token <-> row-id map with corpus frequencies. Immutable once built.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Canonical order: descending count, ties broken by byte-wise
  // lexicographic order of the token.
  static Vocabulary from_counts(const std::unordered_map<std::string, std::uint64_t>& counts,
                                std::uint64_t min_count, std::uint64_t total_tokens);

  // Keeps the given order (used for subsets and for files written by this
  // toolkit). Throws Error("vocab") on duplicate tokens.
  static Vocabulary from_entries(std::vector<std::pair<std::string, std::uint64_t>> entries,
                                 std::uint64_t total_tokens = 0);

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::uint64_t count(std::size_t id) const { return counts_.at(id); }
  std::span<const std::string> tokens() const noexcept { return tokens_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t total_tokens() const noexcept { return total_tokens_; }

  std::optional<std::uint32_t> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && counts_ == other.counts_ &&
           total_tokens_ == other.total_tokens_;
  }

 private:
  void build_index();

  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_tokens_ = 0;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Accumulates token frequencies; counters from different workers merge by
// addition.
class TokenCounter {
 public:
  void add(std::span<const std::string> tokens);
  void merge(const TokenCounter& other);
  std::uint64_t total_tokens() const noexcept { return total_; }
  const std::unordered_map<std::string, std::uint64_t>& counts() const noexcept { return counts_; }

  // Throws Error("empty-corpus") when no tokens were added.
  Vocabulary finish(const MinCount& min_count) const;

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

Vocabulary build_vocab(std::span<const std::string> tokens, const MinCount& min_count);
Vocabulary build_vocab(std::span<const std::vector<std::string>> sentences, const MinCount& min_count);
// Streams plain or gzip text files, one sentence per line.
Vocabulary build_vocab_from_files(std::span<const std::filesystem::path> files,
                                  const TokenizerConfig& tokenizer, const MinCount& min_count);

// One "token<TAB>count" line per entry, in vocabulary order. The first line
// may be a "#total_tokens<TAB>N" comment carrying the corpus size.
void write_vocab_tsv(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary read_vocab_tsv(const std::filesystem::path& path);

}  // namespace embfuse::corpus
