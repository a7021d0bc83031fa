#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string_view>

#include "embfuse/corpus/vocabulary.hpp"
#include "embfuse/numerics/dense_matrix.hpp"

namespace embfuse {

// Dense row-per-word embeddings bound to a vocabulary. Row i is the vector of
// vocab.token(i). This is the exchange type between every pipeline stage.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  // Throws Error("embedding") when the row count differs from the vocabulary
  // size or any value is non-finite.
  EmbeddingTable(corpus::Vocabulary vocab, numerics::DenseMatrix vectors);

  const corpus::Vocabulary& vocab() const noexcept { return vocab_; }
  const numerics::DenseMatrix& vectors() const noexcept { return vectors_; }
  std::size_t size() const noexcept { return vocab_.size(); }
  std::size_t dim() const noexcept { return vectors_.cols(); }
  bool empty() const noexcept { return vocab_.empty(); }

  std::span<const double> row(std::size_t id) const noexcept { return vectors_.row(id); }
  std::optional<std::span<const double>> find(std::string_view token) const;

  bool operator==(const EmbeddingTable& other) const {
    return vocab_ == other.vocab_ && vectors_ == other.vectors_;
  }

 private:
  corpus::Vocabulary vocab_;
  numerics::DenseMatrix vectors_;
};

enum class Precision { f32, f64 };

// Text interchange: optional "<V> <dim>" header line, then one
// "word v1 ... vdim" line per row with shortest round-trip float formatting.
void write_embeddings_text(const EmbeddingTable& table, const std::filesystem::path& path,
                           bool header = true);
EmbeddingTable read_embeddings_text(const std::filesystem::path& path);

// Binary: magic "EMBFVECS", u32 version, u32 element bytes (4 or 8), u64 V,
// u64 dim, u64 total_tokens, then V x (u32 length, UTF-8 bytes, u64 count),
// then the row-major payload. Little-endian throughout.
void write_embeddings_binary(const EmbeddingTable& table, const std::filesystem::path& path,
                             Precision precision = Precision::f64);
EmbeddingTable read_embeddings_binary(const std::filesystem::path& path);

// Picks the reader from the file's first bytes.
EmbeddingTable load_embeddings(const std::filesystem::path& path);
// ".txt"/".vec" extensions select the text format, anything else binary f64.
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

}  // namespace embfuse
