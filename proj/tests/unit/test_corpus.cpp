#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "embfuse/corpus/cooccurrence.hpp"
#include "embfuse/corpus/tokenizer.hpp"
#include "embfuse/corpus/vocabulary.hpp"
#include "embfuse/random.hpp"
#include "expect_error.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace embfuse;
using namespace embfuse::corpus;

namespace {

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("embfuse_corpus_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Vocabulary abc() { return Vocabulary::from_entries({{"a", 3}, {"b", 2}, {"c", 1}}); }

std::vector<std::vector<std::string>> one_line(std::string text) {
  return {tokenize(text, {TokenScheme::whitespace, true})};
}

}  // namespace

TEST(Tokenizer, WhitespaceLowercases) {
  EXPECT_EQ(tokenize("A b  c", {TokenScheme::whitespace, true}), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_TRUE(tokenize("").empty());
}

TEST(Tokenizer, WordBoundaryKeepsApostropheInsideWords) {
  EXPECT_EQ(tokenize("don't stop"), (std::vector<std::string>{"don't", "stop"}));
  EXPECT_EQ(tokenize("Hello, world!  (again)"), (std::vector<std::string>{"hello", "world", "again"}));
  EXPECT_EQ(tokenize("'quoted'"), (std::vector<std::string>{"quoted"}));
  EXPECT_EQ(tokenize("3.14 and 1,000"), (std::vector<std::string>{"3.14", "and", "1,000"}));
  EXPECT_EQ(tokenize("e-mail"), (std::vector<std::string>{"e", "mail"}));
}

TEST(Tokenizer, NonLatinScripts) {
  EXPECT_EQ(tokenize("Привет, МИР"), (std::vector<std::string>{"привет", "мир"}));
  EXPECT_EQ(tokenize("Ωμέγα"), (std::vector<std::string>{"ωμέγα"}));
  EXPECT_EQ(tokenize("Keep", {TokenScheme::word_boundary, false}), (std::vector<std::string>{"Keep"}));
}

TEST(Tokenizer, MalformedUtf8NamesOffset) {
  const std::string bad = std::string("ab") + '\xC3';
  try {
    tokenize(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "malformed-encoding");
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  EXPECT_ERROR_CODE(tokenize("\xFF"), "malformed-encoding");
}

TEST(Tokenizer, SchemeNames) {
  EXPECT_EQ(parse_token_scheme("whitespace"), TokenScheme::whitespace);
  EXPECT_EQ(parse_token_scheme("unicode-word-boundary"), TokenScheme::word_boundary);
  EXPECT_EQ(parse_token_scheme(to_string(TokenScheme::word_boundary)), TokenScheme::word_boundary);
}

TEST(Vocabulary, MinCountFilters) {
  const std::vector<std::string> tokens{"a", "b", "a"};
  const auto v = build_vocab(tokens, MinCount::fixed(2));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v.token(0), "a");
  EXPECT_EQ(v.count(0), 2u);
  EXPECT_EQ(v.total_tokens(), 3u);
}

TEST(Vocabulary, TiesBreakLexicographically) {
  const std::vector<std::string> tokens{"b", "a", "a", "b"};
  const auto v = build_vocab(tokens, MinCount::fixed(1));
  EXPECT_EQ(std::vector<std::string>(v.tokens().begin(), v.tokens().end()), (std::vector<std::string>{"a", "b"}));
}

TEST(Vocabulary, AutomaticMinCount) {
  const auto m = MinCount::automatic();
  EXPECT_EQ(m.resolve(1'000'000), 2u);
  EXPECT_EQ(m.resolve(1'000'001), 5u);
  EXPECT_EQ(MinCount::parse("auto").resolve(10), 2u);
  EXPECT_EQ(MinCount::parse("7").resolve(10), 7u);
  EXPECT_ERROR_CODE(MinCount::parse("zero"), "config");
}

TEST(Vocabulary, EmptyCorpus) {
  const std::vector<std::string> none;
  EXPECT_ERROR_CODE(build_vocab(none, MinCount::fixed(1)), "empty-corpus");
}

TEST(Vocabulary, DuplicateEntriesRejected) {
  EXPECT_ERROR_CODE(Vocabulary::from_entries({{"a", 1}, {"a", 2}}), "vocab");
}

TEST(Vocabulary, DistinctTokensPropertyOnRandomCorpora) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> tokens;
    std::set<std::string> distinct;
    const std::size_t n = 1 + rng.below(300);
    for (std::size_t i = 0; i < n; ++i) {
      tokens.push_back("w" + std::to_string(rng.below(60)));
      distinct.insert(tokens.back());
    }
    const auto v = build_vocab(tokens, MinCount::fixed(1));
    EXPECT_EQ(v.size(), distinct.size());
    for (std::size_t i = 1; i < v.size(); ++i) {
      EXPECT_TRUE(v.count(i - 1) > v.count(i) || (v.count(i - 1) == v.count(i) && v.token(i - 1) < v.token(i)));
    }
  }
}

TEST(Vocabulary, TsvRoundTrip) {
  const auto dir = temp_dir("vocab");
  const auto v = Vocabulary::from_entries({{"x", 4}, {"yé", 2}}, 9);
  write_vocab_tsv(v, dir / "v.tsv");
  EXPECT_EQ(read_vocab_tsv(dir / "v.tsv"), v);
}

TEST(Vocabulary, FromFilesMatchesInMemory) {
  const auto dir = temp_dir("vocab_files");
  {
    std::ofstream(dir / "a.txt") << "The cat sat.\nthe dog\n";
    std::ofstream(dir / "b.txt") << "A cat!\n";
  }
  const std::vector<fs::path> files{dir / "a.txt", dir / "b.txt"};
  const auto v = build_vocab_from_files(files, {}, MinCount::fixed(1));
  const std::vector<std::string> tokens{"the", "cat", "sat", "the", "dog", "a", "cat"};
  EXPECT_EQ(v, build_vocab(tokens, MinCount::fixed(1)));
}

TEST(Cooccurrence, HandExamples) {
  const auto v = abc();
  auto s = count_cooccurrences(one_line("a b c"), v, 2);
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s.lookup(0, 1), 1.0);
  EXPECT_EQ(s.lookup(1, 2), 1.0);
  EXPECT_EQ(s.lookup(0, 2), 0.5);
  EXPECT_EQ(s.lookup(2, 0), 0.5);

  EXPECT_TRUE(count_cooccurrences(one_line("a"), v, 5).empty());

  s = count_cooccurrences(one_line("a b a"), v, 2);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.lookup(0, 1), 2.0);
  EXPECT_EQ(s.lookup(0, 0), 0.5);
}

TEST(Cooccurrence, OovKeepsPositions) {
  const auto v = abc();
  const auto s = count_cooccurrences(one_line("a zzz b"), v, 2);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_EQ(s.lookup(0, 1), 0.5);
}

TEST(Cooccurrence, StoreCanonicalizes) {
  const auto s = CooccurrenceStore::from_entries({{2, 1, 1.0}, {1, 2, 0.5}, {0, 0, 0.0}});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.entries()[0], (CooccurrenceEntry{1, 2, 1.5}));
  EXPECT_ERROR_CODE(CooccurrenceStore::from_entries({{0, 1, -1.0}}), "cooccur");
}

TEST(Cooccurrence, AnalyticTotalWeight) {
  // Every in-vocabulary pair at distance d <= window adds 1/d.
  Rng rng(5);
  const auto v = Vocabulary::from_entries({{"a", 1}, {"b", 1}, {"c", 1}, {"d", 1}});
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<std::string>> sentences(1);
    const std::size_t n = 2 + rng.below(200);
    for (std::size_t i = 0; i < n; ++i) sentences[0].push_back(std::string(1, static_cast<char>('a' + rng.below(4))));
    const std::size_t window = 1 + rng.below(10);
    double expected = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 1; d <= window && i + d < n; ++d) expected += 1.0 / d;
    EXPECT_NEAR(count_cooccurrences(sentences, v, window).total_weight(), expected, 1e-9 * expected);
  }
}

TEST(Cooccurrence, MatchesBruteForceAndIgnoresWorkerCount) {
  Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::pair<std::string, std::uint64_t>> entries;
    const std::size_t vocab_size = 3 + rng.below(20);
    for (std::size_t i = 0; i < vocab_size; ++i) entries.push_back({"t" + std::to_string(i), 1});
    const auto vocab = Vocabulary::from_entries(entries);
    std::vector<std::vector<std::string>> sentences;
    std::vector<std::vector<std::uint32_t>> ids;
    std::size_t tokens = 0;
    while (tokens < 600) {
      sentences.emplace_back();
      ids.emplace_back();
      const std::size_t len = 1 + rng.below(30);
      for (std::size_t k = 0; k < len; ++k) {
        const std::size_t id = rng.below(vocab_size + 3);  // some OOV
        sentences.back().push_back("t" + std::to_string(id));
        ids.back().push_back(id < vocab_size ? static_cast<std::uint32_t>(id) : oracle::kOov);
      }
      tokens += len;
    }
    const std::size_t window = 1 + rng.below(10);
    const auto reference = oracle::brute_cooccurrence(ids, window);
    const auto one = count_cooccurrences(sentences, vocab, window, 1);
    ASSERT_EQ(one.size(), reference.size());
    for (const auto& e : one.entries()) EXPECT_EQ(e.weight, reference.at({e.i, e.j}));
    EXPECT_EQ(count_cooccurrences(sentences, vocab, window, 4), one);
  }
}

TEST(Cooccurrence, FloatingModeBeyondExactLimit) {
  const auto v = abc();
  CooccurrenceCounter counter(30);
  EXPECT_FALSE(counter.exact());
  const auto s = count_cooccurrences(one_line("a b c"), v, 30, 4);
  EXPECT_EQ(s.lookup(0, 2), 0.5);
}

TEST(Cooccurrence, ShardRoundTrip) {
  const auto dir = temp_dir("shards");
  const auto s = count_cooccurrences(one_line("a b c"), abc(), 2);
  write_shard(s, dir / "one.bin");
  EXPECT_EQ(read_shards(dir / "one.bin"), s);
  EXPECT_EQ(fs::file_size(dir / "one.bin"), kShardHeaderBytes + 3 * kShardRecordBytes);

  write_shard(CooccurrenceStore{}, dir / "empty.bin");
  EXPECT_EQ(fs::file_size(dir / "empty.bin"), kShardHeaderBytes);
}

TEST(Cooccurrence, ThousandEntryShardSize) {
  const auto dir = temp_dir("shards_big");
  Rng rng(3);
  std::vector<CooccurrenceEntry> entries;
  for (std::uint32_t i = 0; i < 1000; ++i) entries.push_back({i, i + 1 + static_cast<std::uint32_t>(rng.below(5)), 1.0 + rng.uniform()});
  const auto s = CooccurrenceStore::from_entries(entries);
  ASSERT_EQ(s.size(), 1000u);
  write_shard(s, dir / "big.bin");
  EXPECT_EQ(fs::file_size(dir / "big.bin"), kShardHeaderBytes + 16000);
  const auto split = write_shards(s, dir / "split", 300);
  EXPECT_EQ(split.size(), 4u);
  EXPECT_EQ(read_shards(dir / "split"), s);
}

TEST(Cooccurrence, TruncatedShardReportsBytes) {
  const auto dir = temp_dir("truncated");
  const auto s = count_cooccurrences(one_line("a b c"), abc(), 2);
  write_shard(s, dir / "t.bin");
  fs::resize_file(dir / "t.bin", fs::file_size(dir / "t.bin") - 3);
  try {
    read_shards(dir / "t.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "shard-format");
    EXPECT_NE(std::string(e.what()).find("45"), std::string::npos) << e.what();
  }
}
