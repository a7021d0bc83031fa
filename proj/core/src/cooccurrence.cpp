#include "embfuse/corpus/cooccurrence.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "embfuse/error.hpp"
#include "embfuse/io.hpp"
#include "embfuse/parallel.hpp"

namespace embfuse::corpus {

namespace fs = std::filesystem;

namespace {

constexpr char kShardMagic[8] = {'E', 'M', 'B', 'F', 'C', 'O', 'O', 'C'};
constexpr std::uint32_t kShardVersion = 1;

std::uint64_t pack(std::uint32_t i, std::uint32_t j) noexcept {
  if (i > j) std::swap(i, j);
  return (static_cast<std::uint64_t>(i) << 32) | j;
}

bool entry_less(const CooccurrenceEntry& a, const CooccurrenceEntry& b) noexcept {
  return a.i != b.i ? a.i < b.i : a.j < b.j;
}

}  // namespace

CooccurrenceStore CooccurrenceStore::from_entries(std::vector<CooccurrenceEntry> entries) {
  for (auto& e : entries) {
    if (!std::isfinite(e.weight) || e.weight < 0.0) {
      throw Error("cooccur", "weights must be finite and non-negative");
    }
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(entries.begin(), entries.end(), entry_less);
  CooccurrenceStore store;
  store.entries_.reserve(entries.size());
  for (const auto& e : entries) {
    if (!store.entries_.empty() && store.entries_.back().i == e.i && store.entries_.back().j == e.j) {
      store.entries_.back().weight += e.weight;
    } else {
      store.entries_.push_back(e);
    }
  }
  std::erase_if(store.entries_, [](const CooccurrenceEntry& e) { return e.weight == 0.0; });
  return store;
}

double CooccurrenceStore::lookup(std::uint32_t i, std::uint32_t j) const noexcept {
  if (i > j) std::swap(i, j);
  const CooccurrenceEntry key{i, j, 0.0};
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key, entry_less);
  if (it == entries_.end() || it->i != i || it->j != j) return 0.0;
  return it->weight;
}

double CooccurrenceStore::total_weight() const noexcept {
  double s = 0.0;
  for (const auto& e : entries_) s += e.weight;
  return s;
}

std::size_t CooccurrenceStore::id_bound() const noexcept {
  std::size_t bound = 0;
  for (const auto& e : entries_) bound = std::max<std::size_t>(bound, e.j + 1);
  return bound;
}

CooccurrenceStore CooccurrenceStore::merged_with(const CooccurrenceStore& other) const {
  std::vector<CooccurrenceEntry> all(entries_);
  all.insert(all.end(), other.entries_.begin(), other.entries_.end());
  return from_entries(std::move(all));
}

CooccurrenceCounter::CooccurrenceCounter(std::size_t window) : window_(window), unit_(0) {
  if (window < 1) throw Error("config", "window must be >= 1");
  if (window <= kExactWindowLimit) {
    std::int64_t l = 1;
    for (std::size_t d = 2; d <= window; ++d) l = std::lcm(l, static_cast<std::int64_t>(d));
    unit_ = l;
  }
}

void CooccurrenceCounter::add_sentence(std::span<const std::uint32_t> ids) {
  for (std::size_t pos = 0; pos < ids.size(); ++pos) {
    const std::uint32_t center = ids[pos];
    if (center == kOutOfVocabulary) continue;
    const std::size_t last = std::min(ids.size() - 1, pos + window_);
    for (std::size_t other = pos + 1; other <= last; ++other) {
      const std::uint32_t context = ids[other];
      if (context == kOutOfVocabulary) continue;
      const std::size_t d = other - pos;
      auto& cell = cells_[pack(center, context)];
      if (unit_ != 0) {
        cell.units += unit_ / static_cast<std::int64_t>(d);
      } else {
        cell.weight += 1.0 / static_cast<double>(d);
      }
    }
  }
}

void CooccurrenceCounter::merge(const CooccurrenceCounter& other) {
  if (other.window_ != window_) throw Error("cooccur", "cannot merge counters with different windows");
  for (const auto& [key, acc] : other.cells_) {
    auto& cell = cells_[key];
    cell.units += acc.units;
    cell.weight += acc.weight;
  }
}

CooccurrenceStore CooccurrenceCounter::finish() const {
  std::vector<CooccurrenceEntry> entries;
  entries.reserve(cells_.size());
  for (const auto& [key, acc] : cells_) {
    const double w = unit_ != 0 ? static_cast<double>(acc.units) / static_cast<double>(unit_)
                                : acc.weight;
    entries.push_back({static_cast<std::uint32_t>(key >> 32),
                       static_cast<std::uint32_t>(key & 0xFFFFFFFFu), w});
  }
  return CooccurrenceStore::from_entries(std::move(entries));
}

std::vector<std::uint32_t> to_ids(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::vector<std::uint32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    ids.push_back(vocab.find(t).value_or(CooccurrenceCounter::kOutOfVocabulary));
  }
  return ids;
}

namespace {

// Counts `sentences` into one counter per worker (contiguous blocks).
void count_block(std::span<const std::vector<std::string>> sentences, const Vocabulary& vocab,
                 std::vector<CooccurrenceCounter>& workers) {
  const std::size_t parts = workers.size();
  const std::size_t per = (sentences.size() + parts - 1) / std::max<std::size_t>(parts, 1);
  parallel_for(parts, parts, [&](std::size_t part, std::size_t) {
    const std::size_t begin = std::min(sentences.size(), part * per);
    const std::size_t end = std::min(sentences.size(), begin + per);
    for (std::size_t s = begin; s < end; ++s) {
      workers[part].add_sentence(to_ids(sentences[s], vocab));
    }
  });
}

CooccurrenceStore reduce(std::vector<CooccurrenceCounter>& workers) {
  for (std::size_t w = 1; w < workers.size(); ++w) workers[0].merge(workers[w]);
  return workers[0].finish();
}

}  // namespace

CooccurrenceStore count_cooccurrences(std::span<const std::vector<std::string>> sentences,
                                      const Vocabulary& vocab, std::size_t window,
                                      std::size_t threads) {
  CooccurrenceCounter probe(window);
  const std::size_t parts = probe.exact() ? std::max<std::size_t>(threads, 1) : 1;
  std::vector<CooccurrenceCounter> workers(parts, probe);
  count_block(sentences, vocab, workers);
  return reduce(workers);
}

CooccurrenceStore count_cooccurrences_in_files(std::span<const fs::path> files,
                                               const TokenizerConfig& tokenizer,
                                               const Vocabulary& vocab, std::size_t window,
                                               std::size_t threads) {
  CooccurrenceCounter probe(window);
  const std::size_t parts = probe.exact() ? std::max<std::size_t>(threads, 1) : 1;
  std::vector<CooccurrenceCounter> workers(parts, probe);
  constexpr std::size_t kBlockLines = 1 << 14;
  std::vector<std::vector<std::string>> block;
  block.reserve(kBlockLines);
  std::string line;
  for (const auto& file : files) {
    io::LineReader reader(file);
    while (reader.next(line)) {
      block.push_back(tokenize(line, tokenizer));
      if (block.size() == kBlockLines) {
        count_block(block, vocab, workers);
        block.clear();
      }
    }
  }
  count_block(block, vocab, workers);
  return reduce(workers);
}

void write_shard(const CooccurrenceStore& store, const fs::path& file) {
  auto out = io::open_for_write(file);
  out.write(kShardMagic, sizeof(kShardMagic));
  io::write_u32(out, kShardVersion);
  for (const auto& e : store.entries()) {
    io::write_u32(out, e.i);
    io::write_u32(out, e.j);
    io::write_f64(out, e.weight);
  }
  if (!out) throw Error("io", "failed writing " + file.string());
}

std::vector<fs::path> write_shards(const CooccurrenceStore& store, const fs::path& dir,
                                   std::size_t records_per_shard) {
  if (records_per_shard == 0) throw Error("config", "records_per_shard must be >= 1");
  fs::create_directories(dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.starts_with("cooc-") && name.ends_with(".bin")) fs::remove(entry.path());
  }
  std::vector<fs::path> written;
  const auto entries = store.entries();
  std::size_t shard = 0;
  std::size_t start = 0;
  do {
    const std::size_t stop = std::min(entries.size(), start + records_per_shard);
    std::vector<CooccurrenceEntry> part(entries.begin() + static_cast<std::ptrdiff_t>(start),
                                        entries.begin() + static_cast<std::ptrdiff_t>(stop));
    char name[32];
    std::snprintf(name, sizeof(name), "cooc-%05zu.bin", shard++);
    write_shard(CooccurrenceStore::from_entries(std::move(part)), dir / name);
    written.push_back(dir / name);
    start = stop;
  } while (start < entries.size());
  return written;
}

namespace {

std::vector<CooccurrenceEntry> read_one_shard(const fs::path& file) {
  const auto bytes = fs::file_size(file);
  if (bytes < kShardHeaderBytes) {
    throw Error("shard-format", file.string() + ": " + std::to_string(bytes) +
                                    " bytes is shorter than the header");
  }
  const auto payload = bytes - kShardHeaderBytes;
  if (payload % kShardRecordBytes != 0) {
    throw Error("shard-format", file.string() + ": truncated, payload of " +
                                    std::to_string(payload) + " bytes is not a multiple of " +
                                    std::to_string(kShardRecordBytes));
  }
  auto in = io::open_for_read(file);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, kShardMagic, sizeof(magic)) != 0) {
    throw Error("shard-format", file.string() + ": bad magic");
  }
  const auto version = io::read_u32(in);
  if (version != kShardVersion) {
    throw Error("shard-format", file.string() + ": unsupported version " + std::to_string(version));
  }
  std::vector<CooccurrenceEntry> entries(payload / kShardRecordBytes);
  for (auto& e : entries) {
    e.i = io::read_u32(in);
    e.j = io::read_u32(in);
    e.weight = io::read_f64(in);
  }
  return entries;
}

}  // namespace

CooccurrenceStore read_shards(const fs::path& path) {
  if (!fs::is_directory(path)) return CooccurrenceStore::from_entries(read_one_shard(path));
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bin") files.push_back(entry.path());
  }
  if (files.empty()) throw Error("io", "no .bin shards in " + path.string());
  std::sort(files.begin(), files.end());
  std::vector<CooccurrenceEntry> all;
  for (const auto& f : files) {
    auto part = read_one_shard(f);
    all.insert(all.end(), part.begin(), part.end());
  }
  return CooccurrenceStore::from_entries(std::move(all));
}

}  // namespace embfuse::corpus
