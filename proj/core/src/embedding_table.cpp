#include "embfuse/glove/embedding_table.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "embfuse/error.hpp"
#include "embfuse/io.hpp"

namespace embfuse {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'E', 'M', 'B', 'F', 'V', 'E', 'C', 'S'};
constexpr std::uint32_t kVersion = 1;

double parse_double(std::string_view text, const fs::path& path, std::uint64_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error("embedding", path.string() + ":" + std::to_string(line) + ": bad number '" +
                                 std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    if (i > start) parts.push_back(line.substr(start, i - start));
  }
  return parts;
}

}  // namespace

EmbeddingTable::EmbeddingTable(corpus::Vocabulary vocab, numerics::DenseMatrix vectors)
    : vocab_(std::move(vocab)), vectors_(std::move(vectors)) {
  if (vectors_.rows() != vocab_.size()) {
    throw Error("embedding", "row count " + std::to_string(vectors_.rows()) +
                                 " does not match vocabulary size " + std::to_string(vocab_.size()));
  }
  if (!vectors_.all_finite()) throw Error("embedding", "non-finite embedding value");
}

std::optional<std::span<const double>> EmbeddingTable::find(std::string_view token) const {
  auto id = vocab_.find(token);
  if (!id) return std::nullopt;
  return row(*id);
}

void write_embeddings_text(const EmbeddingTable& table, const fs::path& path, bool header) {
  auto out = io::open_for_write(path);
  if (header) out << table.size() << ' ' << table.dim() << '\n';
  char buf[64];
  std::string line;
  for (std::size_t r = 0; r < table.size(); ++r) {
    line = table.vocab().token(r);
    for (double v : table.row(r)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      line.push_back(' ');
      line.append(buf, ptr);
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) throw Error("io", "failed writing " + path.string());
}

EmbeddingTable read_embeddings_text(const fs::path& path) {
  io::LineReader reader(path);
  std::string line;
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  std::vector<double> values;
  std::size_t dim = 0;
  bool first = true;
  while (reader.next(line)) {
    if (line.empty()) continue;
    auto parts = split_spaces(line);
    if (first) {
      first = false;
      if (parts.size() == 2 && parts[0].find_first_not_of("0123456789") == std::string_view::npos &&
          parts[1].find_first_not_of("0123456789") == std::string_view::npos) {
        dim = std::stoul(std::string(parts[1]));
        continue;
      }
    }
    if (parts.size() < 2) {
      throw Error("embedding", path.string() + ":" + std::to_string(reader.line_number()) +
                                   ": expected a word followed by values");
    }
    if (dim == 0) dim = parts.size() - 1;
    if (parts.size() - 1 != dim) {
      throw Error("embedding", path.string() + ":" + std::to_string(reader.line_number()) +
                                   ": expected " + std::to_string(dim) + " values, found " +
                                   std::to_string(parts.size() - 1));
    }
    entries.emplace_back(std::string(parts[0]), 0);
    for (std::size_t k = 1; k < parts.size(); ++k) {
      values.push_back(parse_double(parts[k], path, reader.line_number()));
    }
  }
  const std::size_t rows = entries.size();
  return EmbeddingTable(corpus::Vocabulary::from_entries(std::move(entries)),
                        numerics::DenseMatrix(rows, dim, std::move(values)));
}

void write_embeddings_binary(const EmbeddingTable& table, const fs::path& path,
                             Precision precision) {
  auto out = io::open_for_write(path);
  out.write(kMagic, sizeof(kMagic));
  io::write_u32(out, kVersion);
  io::write_u32(out, precision == Precision::f32 ? 4 : 8);
  io::write_u64(out, table.size());
  io::write_u64(out, table.dim());
  io::write_u64(out, table.vocab().total_tokens());
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto& token = table.vocab().token(r);
    io::write_u32(out, static_cast<std::uint32_t>(token.size()));
    out.write(token.data(), static_cast<std::streamsize>(token.size()));
    io::write_u64(out, table.vocab().count(r));
  }
  for (double v : table.vectors().values()) {
    if (precision == Precision::f32) {
      io::write_f32(out, static_cast<float>(v));
    } else {
      io::write_f64(out, v);
    }
  }
  if (!out) throw Error("io", "failed writing " + path.string());
}

EmbeddingTable read_embeddings_binary(const fs::path& path) {
  auto in = io::open_for_read(path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw Error("embedding", path.string() + ": not a binary embedding file");
  }
  const auto version = io::read_u32(in);
  if (version != kVersion) {
    throw Error("embedding", path.string() + ": unsupported version " + std::to_string(version));
  }
  const auto width = io::read_u32(in);
  if (width != 4 && width != 8) throw Error("embedding", path.string() + ": bad element width");
  const auto rows = io::read_u64(in);
  const auto dim = io::read_u64(in);
  const auto total = io::read_u64(in);
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  entries.reserve(rows);
  for (std::uint64_t r = 0; r < rows; ++r) {
    const auto len = io::read_u32(in);
    std::string token(len, '\0');
    if (!in.read(token.data(), len)) throw Error("embedding", path.string() + ": truncated vocabulary");
    entries.emplace_back(std::move(token), io::read_u64(in));
  }
  std::vector<double> values(rows * dim);
  for (double& v : values) v = width == 4 ? static_cast<double>(io::read_f32(in)) : io::read_f64(in);
  return EmbeddingTable(corpus::Vocabulary::from_entries(std::move(entries), total),
                        numerics::DenseMatrix(rows, dim, std::move(values)));
}

EmbeddingTable load_embeddings(const fs::path& path) {
  char magic[8] = {};
  {
    auto in = io::open_for_read(path);
    in.read(magic, sizeof(magic));
  }
  if (std::memcmp(magic, kMagic, sizeof(magic)) == 0) return read_embeddings_binary(path);
  return read_embeddings_text(path);
}

void save_embeddings(const EmbeddingTable& table, const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".txt" || ext == ".vec") {
    write_embeddings_text(table, path);
  } else {
    write_embeddings_binary(table, path, Precision::f64);
  }
}

}  // namespace embfuse
