#include "embfuse/corpus/vocabulary.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "embfuse/error.hpp"
#include "embfuse/io.hpp"

namespace embfuse::corpus {

MinCount MinCount::fixed(std::uint64_t n) {
  if (n < 1) throw Error("config", "min_count must be >= 1");
  return MinCount(n);
}

MinCount MinCount::parse(std::string_view text) {
  if (text == "auto") return automatic();
  std::uint64_t n = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc() || ptr != text.data() + text.size() || n < 1) {
    throw Error("config", "min-count must be 'auto' or a positive integer, got '" +
                              std::string(text) + "'");
  }
  return MinCount(n);
}

std::uint64_t MinCount::resolve(std::uint64_t total_tokens) const noexcept {
  if (!is_automatic()) return value_;
  return total_tokens > kLargeCorpusTokens ? 5 : 2;
}

std::string MinCount::to_string() const {
  return is_automatic() ? "auto" : std::to_string(value_);
}

Vocabulary Vocabulary::from_counts(const std::unordered_map<std::string, std::uint64_t>& counts,
                                   std::uint64_t min_count, std::uint64_t total_tokens) {
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (const auto& [token, count] : counts) {
    if (count >= min_count) kept.emplace_back(token, count);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return from_entries(std::move(kept), total_tokens);
}

Vocabulary Vocabulary::from_entries(std::vector<std::pair<std::string, std::uint64_t>> entries,
                                    std::uint64_t total_tokens) {
  Vocabulary v;
  v.tokens_.reserve(entries.size());
  v.counts_.reserve(entries.size());
  for (auto& [token, count] : entries) {
    v.tokens_.push_back(std::move(token));
    v.counts_.push_back(count);
  }
  v.total_tokens_ = total_tokens;
  v.build_index();
  return v;
}

void Vocabulary::build_index() {
  index_.clear();
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<std::uint32_t>(i)).second) {
      throw Error("vocab", "duplicate token '" + tokens_[i] + "'");
    }
  }
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void TokenCounter::add(std::span<const std::string> tokens) {
  for (const auto& t : tokens) ++counts_[t];
  total_ += tokens.size();
}

void TokenCounter::merge(const TokenCounter& other) {
  for (const auto& [token, count] : other.counts_) counts_[token] += count;
  total_ += other.total_;
}

Vocabulary TokenCounter::finish(const MinCount& min_count) const {
  if (total_ == 0) throw Error("empty-corpus", "corpus contains no tokens");
  return Vocabulary::from_counts(counts_, min_count.resolve(total_), total_);
}

Vocabulary build_vocab(std::span<const std::string> tokens, const MinCount& min_count) {
  TokenCounter counter;
  counter.add(tokens);
  return counter.finish(min_count);
}

Vocabulary build_vocab(std::span<const std::vector<std::string>> sentences,
                       const MinCount& min_count) {
  TokenCounter counter;
  for (const auto& s : sentences) counter.add(s);
  return counter.finish(min_count);
}

Vocabulary build_vocab_from_files(std::span<const std::filesystem::path> files,
                                  const TokenizerConfig& tokenizer, const MinCount& min_count) {
  TokenCounter counter;
  std::string line;
  for (const auto& file : files) {
    io::LineReader reader(file);
    while (reader.next(line)) {
      try {
        counter.add(tokenize(line, tokenizer));
      } catch (const Error& e) {
        throw Error(e.code(), file.string() + ":" + std::to_string(reader.line_number()) + ": " + e.what());
      }
    }
  }
  return counter.finish(min_count);
}

void write_vocab_tsv(const Vocabulary& vocab, const std::filesystem::path& path) {
  auto out = io::open_for_write(path);
  out << "#total_tokens\t" << vocab.total_tokens() << '\n';
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.token(i) << '\t' << vocab.count(i) << '\n';
  }
  if (!out) throw Error("io", "failed writing " + path.string());
}

Vocabulary read_vocab_tsv(const std::filesystem::path& path) {
  io::LineReader reader(path);
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  std::uint64_t total = 0;
  std::string line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) {
      throw Error("vocab", path.string() + ":" + std::to_string(reader.line_number()) +
                               ": expected token<TAB>count");
    }
    std::uint64_t count = 0;
    const char* begin = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(begin, end, count);
    if (ec != std::errc() || ptr != end) {
      throw Error("vocab", path.string() + ":" + std::to_string(reader.line_number()) +
                               ": bad count");
    }
    std::string token = line.substr(0, tab);
    if (reader.line_number() == 1 && token == "#total_tokens") {
      total = count;
      continue;
    }
    entries.emplace_back(std::move(token), count);
  }
  return Vocabulary::from_entries(std::move(entries), total);
}

}  // namespace embfuse::corpus
