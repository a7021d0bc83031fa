#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embfuse/corpus/vocabulary.hpp"
#include "embfuse/glove/embedding_table.hpp"
#include "embfuse/numerics/sparse.hpp"
#include "embfuse/numerics/svd.hpp"

namespace embfuse::graph {

struct Term {
  std::string language;  // lowercase BCP-47 style tag, e.g. "sw", "zh-hant"
  std::string text;      // lowercased, white space replaced by '_'

  // "/c/<language>/<text>", the key used in graph vocabularies.
  std::string key() const { return "/c/" + language + "/" + text; }
  friend bool operator==(const Term&, const Term&) = default;
};

struct GraphAssertion {
  Term start;
  Term end;
  std::string relation;
  double weight = 1.0;
};

// Parses "/c/<lang>/<term>[/<pos>[/...]]"; anything after the term is a
// sense qualifier and is dropped. Returns nullopt when the URI is not a
// well-formed concept URI.
std::optional<Term> parse_term_uri(std::string_view uri);

// Lowercases and replaces runs of white space with a single '_'.
std::string normalize_term(std::string_view text);

struct ParseStats {
  std::size_t records = 0;
  std::size_t kept = 0;
  std::size_t filtered = 0;   // well-formed but outside the language filter
  std::size_t non_term = 0;   // an endpoint is not a /c/ concept (e.g. ExternalURL)
  std::size_t malformed = 0;  // wrong column count, bad concept URI, bad metadata
};

// Record-by-record parser for the 5-column assertion dump
// (edge-uri, relation, start-uri, end-uri, json-metadata).
class AssertionParser {
 public:
  static constexpr double kMaxMalformedRate = 0.05;

  // Without a filter every assertion is kept. With one, both endpoints must
  // carry a listed language.
  explicit AssertionParser(std::optional<std::set<std::string>> language_filter = std::nullopt)
      : filter_(std::move(language_filter)) {}

  std::optional<GraphAssertion> parse(std::string_view record);
  const ParseStats& stats() const noexcept { return stats_; }
  // Throws Error("graph-parse") when more than 5% of records were malformed.
  void check_malformed_rate() const;

 private:
  std::optional<std::set<std::string>> filter_;
  ParseStats stats_;
};

std::vector<GraphAssertion> parse_assertions(std::span<const std::string> records,
                                             const std::optional<std::set<std::string>>& filter,
                                             ParseStats* stats = nullptr);
// Plain or gzip TSV dump.
std::vector<GraphAssertion> parse_assertions_file(const std::filesystem::path& dump,
                                                  const std::optional<std::set<std::string>>& filter,
                                                  ParseStats* stats = nullptr);

struct SymmetricEntry {
  std::uint32_t i;  // i <= j
  std::uint32_t j;
  double value;
  friend bool operator==(const SymmetricEntry&, const SymmetricEntry&) = default;
};

// n x n symmetric matrix stored once per unordered pair (i <= j), sorted.
class SparseSymmetricMatrix {
 public:
  SparseSymmetricMatrix() = default;
  // Canonicalizes, sums duplicates, drops zeros. Throws on non-finite values
  // or ids >= n.
  SparseSymmetricMatrix(std::size_t n, std::vector<SymmetricEntry> entries);

  std::size_t n() const noexcept { return n_; }
  std::span<const SymmetricEntry> entries() const noexcept { return entries_; }
  double lookup(std::uint32_t i, std::uint32_t j) const noexcept;

  // Row sums of the full symmetric matrix (diagonal counted once).
  std::vector<double> row_sums() const;
  double total_mass() const;
  numerics::CsrMatrix to_csr() const;  // both triangles
  numerics::DenseMatrix to_dense() const;

  friend bool operator==(const SparseSymmetricMatrix&, const SparseSymmetricMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<SymmetricEntry> entries_;
};

struct TermMatrix {
  corpus::Vocabulary terms;  // keys "/c/<lang>/<text>", count = incident assertions
  SparseSymmetricMatrix counts;
};

// M[i, j] = summed weight of every assertion joining terms i and j in
// either direction. Every term is kept, however few edges it has.
TermMatrix build_term_matrix(std::span<const GraphAssertion> assertions);

// Smoothed positive PMI on the nonzeros of M:
//   max(0, log(p(i,j) / (p(i) p_cds(j))))
// with p(i,j) = M_ij / T, p(i) = rowsum_i / T and
// p_cds(j) = rowsum_j^cds / sum_k rowsum_k^cds. Context smoothing makes the
// result asymmetric in general, so it is returned as a general sparse
// matrix with the sparsity pattern of M. Clipped zeros are not stored.
numerics::CsrMatrix ppmi(const SparseSymmetricMatrix& m, double cds = 0.75);

enum class SigmaWeight { none, sqrt, full };
SigmaWeight parse_sigma_weight(std::string_view name);
std::string to_string(SigmaWeight w);

// Truncated SVD P ~ U S V^T; row r of the result is
// U[r] * g(S) + V[r] * g(S) where g is 1, sqrt(S), or S.
EmbeddingTable factor_ppmi(const numerics::CsrMatrix& p, const corpus::Vocabulary& terms,
                           std::size_t k, SigmaWeight weighting = SigmaWeight::none,
                           const numerics::SvdOptions& svd = {});

enum class GraphMode { single, all };

struct GraphEmbeddingOptions {
  GraphMode mode = GraphMode::single;
  std::set<std::string> languages;  // consulted in single mode
  std::size_t dim = 300;
  double cds = 0.75;
  SigmaWeight sigma_weight = SigmaWeight::none;
  numerics::SvdOptions svd;
};

// parse -> term matrix -> PPMI -> factorization. k is clamped to the number
// of terms when the graph is smaller than `dim`.
EmbeddingTable graph_embeddings(std::span<const GraphAssertion> assertions,
                                const GraphEmbeddingOptions& options);

}  // namespace embfuse::graph
