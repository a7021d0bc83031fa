#include "embfuse/graph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "embfuse/corpus/tokenizer.hpp"
#include "embfuse/error.hpp"
#include "embfuse/io.hpp"

namespace embfuse::graph {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

bool valid_language(std::string_view tag) {
  if (tag.empty() || !(tag[0] >= 'a' && tag[0] <= 'z')) return false;
  bool prev_dash = false;
  for (char ch : tag) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '-';
    if (!ok || (ch == '-' && prev_dash)) return false;
    prev_dash = ch == '-';
  }
  return !prev_dash;
}

}  // namespace

std::string normalize_term(std::string_view text) {
  std::string lowered = corpus::to_lower_utf8(text);
  std::string out;
  out.reserve(lowered.size());
  bool in_space = false;
  for (char ch : lowered) {
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      if (!in_space && !out.empty()) out.push_back('_');
      in_space = true;
    } else {
      out.push_back(ch);
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == '_' && in_space) {
    out.pop_back();
    in_space = false;
  }
  return out;
}

std::optional<Term> parse_term_uri(std::string_view uri) {
  if (!uri.starts_with("/c/")) return std::nullopt;
  auto parts = split(uri.substr(3), '/');
  if (parts.size() < 2) return std::nullopt;
  if (!valid_language(parts[0]) || parts[1].empty()) return std::nullopt;
  Term term;
  term.language = std::string(parts[0]);
  try {
    term.text = normalize_term(parts[1]);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (term.text.empty()) return std::nullopt;
  return term;
}

std::optional<GraphAssertion> AssertionParser::parse(std::string_view record) {
  ++stats_.records;
  if (!record.empty() && record.back() == '\r') record.remove_suffix(1);
  auto cols = split(record, '\t');
  if (cols.size() != 5) {
    ++stats_.malformed;
    return std::nullopt;
  }
  if (!cols[2].starts_with("/c/") || !cols[3].starts_with("/c/")) {
    ++stats_.non_term;
    return std::nullopt;
  }
  auto start = parse_term_uri(cols[2]);
  auto end = parse_term_uri(cols[3]);
  if (!start || !end) {
    ++stats_.malformed;
    return std::nullopt;
  }
  double weight = 1.0;
  if (!cols[4].empty()) {
    auto meta = nlohmann::json::parse(cols[4], nullptr, /*allow_exceptions=*/false);
    if (meta.is_discarded() || !meta.is_object()) {
      ++stats_.malformed;
      return std::nullopt;
    }
    if (auto it = meta.find("weight"); it != meta.end()) {
      if (!it->is_number()) {
        ++stats_.malformed;
        return std::nullopt;
      }
      weight = it->get<double>();
    }
  }
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    ++stats_.malformed;
    return std::nullopt;
  }
  if (filter_ && (!filter_->contains(start->language) || !filter_->contains(end->language))) {
    ++stats_.filtered;
    return std::nullopt;
  }
  ++stats_.kept;
  return GraphAssertion{std::move(*start), std::move(*end), std::string(cols[1]), weight};
}

void AssertionParser::check_malformed_rate() const {
  if (stats_.records == 0) return;
  const double rate = static_cast<double>(stats_.malformed) / static_cast<double>(stats_.records);
  if (rate > kMaxMalformedRate) {
    throw Error("graph-parse", std::to_string(stats_.malformed) + " of " +
                                   std::to_string(stats_.records) +
                                   " records are malformed (limit 5%)");
  }
}

std::vector<GraphAssertion> parse_assertions(std::span<const std::string> records,
                                             const std::optional<std::set<std::string>>& filter,
                                             ParseStats* stats) {
  AssertionParser parser(filter);
  std::vector<GraphAssertion> out;
  for (const auto& r : records) {
    if (auto a = parser.parse(r)) out.push_back(std::move(*a));
  }
  if (stats) *stats = parser.stats();
  parser.check_malformed_rate();
  return out;
}

std::vector<GraphAssertion> parse_assertions_file(const std::filesystem::path& dump,
                                                  const std::optional<std::set<std::string>>& filter,
                                                  ParseStats* stats) {
  AssertionParser parser(filter);
  io::LineReader reader(dump);
  std::vector<GraphAssertion> out;
  std::string line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    if (auto a = parser.parse(line)) out.push_back(std::move(*a));
  }
  if (stats) *stats = parser.stats();
  parser.check_malformed_rate();
  return out;
}

SparseSymmetricMatrix::SparseSymmetricMatrix(std::size_t n, std::vector<SymmetricEntry> entries)
    : n_(n) {
  for (auto& e : entries) {
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.j >= n_) throw Error("shape", "symmetric entry outside the matrix");
    if (!std::isfinite(e.value)) throw Error("graph", "non-finite matrix value");
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (const auto& e : entries) {
    if (!entries_.empty() && entries_.back().i == e.i && entries_.back().j == e.j) {
      entries_.back().value += e.value;
    } else {
      entries_.push_back(e);
    }
  }
  std::erase_if(entries_, [](const SymmetricEntry& e) { return e.value == 0.0; });
}

double SparseSymmetricMatrix::lookup(std::uint32_t i, std::uint32_t j) const noexcept {
  if (i > j) std::swap(i, j);
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::make_pair(i, j),
                             [](const SymmetricEntry& e, const std::pair<std::uint32_t, std::uint32_t>& k) {
                               return e.i != k.first ? e.i < k.first : e.j < k.second;
                             });
  if (it == entries_.end() || it->i != i || it->j != j) return 0.0;
  return it->value;
}

std::vector<double> SparseSymmetricMatrix::row_sums() const {
  std::vector<double> sums(n_, 0.0);
  for (const auto& e : entries_) {
    sums[e.i] += e.value;
    if (e.i != e.j) sums[e.j] += e.value;
  }
  return sums;
}

double SparseSymmetricMatrix::total_mass() const {
  double total = 0.0;
  for (double s : row_sums()) total += s;
  return total;
}

numerics::CsrMatrix SparseSymmetricMatrix::to_csr() const {
  std::vector<numerics::Triplet> triplets;
  triplets.reserve(entries_.size() * 2);
  for (const auto& e : entries_) {
    triplets.push_back({e.i, e.j, e.value});
    if (e.i != e.j) triplets.push_back({e.j, e.i, e.value});
  }
  return numerics::CsrMatrix(n_, n_, std::move(triplets));
}

numerics::DenseMatrix SparseSymmetricMatrix::to_dense() const { return to_csr().to_dense(); }

TermMatrix build_term_matrix(std::span<const GraphAssertion> assertions) {
  if (assertions.empty()) throw Error("graph-input", "no assertions to build a term matrix from");
  std::unordered_map<std::string, std::uint64_t> degree;
  for (const auto& a : assertions) {
    const auto s = a.start.key();
    const auto e = a.end.key();
    ++degree[s];
    if (e != s) ++degree[e];
  }
  TermMatrix out;
  out.terms = corpus::Vocabulary::from_counts(degree, 1, assertions.size());
  std::vector<SymmetricEntry> entries;
  entries.reserve(assertions.size());
  for (const auto& a : assertions) {
    entries.push_back({*out.terms.find(a.start.key()), *out.terms.find(a.end.key()), a.weight});
  }
  out.counts = SparseSymmetricMatrix(out.terms.size(), std::move(entries));
  return out;
}

numerics::CsrMatrix ppmi(const SparseSymmetricMatrix& m, double cds) {
  if (!(cds > 0.0 && cds <= 1.0)) throw Error("config", "cds must be in (0, 1]");
  const auto sums = m.row_sums();
  double total = 0.0;
  double smoothed_total = 0.0;
  for (double s : sums) {
    if (s < 0.0) throw Error("graph", "PPMI needs a non-negative count matrix");
    total += s;
    smoothed_total += std::pow(s, cds);
  }
  if (!(total > 0.0)) throw Error("ppmi-zero-mass", "matrix has no positive mass");

  auto value = [&](std::uint32_t i, std::uint32_t j, double count) {
    const double joint = count / total;
    const double row_p = sums[i] / total;
    const double context_p = std::pow(sums[j], cds) / smoothed_total;
    return std::max(0.0, std::log(joint / (row_p * context_p)));
  };

  std::vector<numerics::Triplet> triplets;
  triplets.reserve(m.entries().size() * 2);
  for (const auto& e : m.entries()) {
    if (e.value <= 0.0) continue;
    triplets.push_back({e.i, e.j, value(e.i, e.j, e.value)});
    if (e.i != e.j) triplets.push_back({e.j, e.i, value(e.j, e.i, e.value)});
  }
  return numerics::CsrMatrix(m.n(), m.n(), std::move(triplets));
}

SigmaWeight parse_sigma_weight(std::string_view name) {
  if (name == "none") return SigmaWeight::none;
  if (name == "sqrt") return SigmaWeight::sqrt;
  if (name == "full") return SigmaWeight::full;
  throw Error("config", "sigma-weight must be none|sqrt|full, got '" + std::string(name) + "'");
}

std::string to_string(SigmaWeight w) {
  switch (w) {
    case SigmaWeight::none:
      return "none";
    case SigmaWeight::sqrt:
      return "sqrt";
    case SigmaWeight::full:
      return "full";
  }
  return "none";
}

EmbeddingTable factor_ppmi(const numerics::CsrMatrix& p, const corpus::Vocabulary& terms,
                           std::size_t k, SigmaWeight weighting, const numerics::SvdOptions& svd) {
  if (p.rows() != terms.size() || p.cols() != terms.size()) {
    throw Error("shape", "PPMI matrix does not match the term vocabulary");
  }
  const auto result = numerics::truncated_svd(p, k, svd);
  numerics::DenseMatrix rows(p.rows(), k);
  for (std::size_t c = 0; c < k; ++c) {
    const double s = result.singular_values[c];
    const double g = weighting == SigmaWeight::none ? 1.0
                     : weighting == SigmaWeight::sqrt ? std::sqrt(s)
                                                      : s;
    for (std::size_t r = 0; r < p.rows(); ++r) {
      rows(r, c) = (result.u(r, c) + result.v(r, c)) * g;
    }
  }
  return EmbeddingTable(terms, std::move(rows));
}

EmbeddingTable graph_embeddings(std::span<const GraphAssertion> assertions,
                                const GraphEmbeddingOptions& options) {
  std::vector<GraphAssertion> selected;
  if (options.mode == GraphMode::single) {
    for (const auto& a : assertions) {
      if (options.languages.contains(a.start.language) && options.languages.contains(a.end.language)) {
        selected.push_back(a);
      }
    }
  } else {
    selected.assign(assertions.begin(), assertions.end());
  }
  const TermMatrix tm = build_term_matrix(selected);
  const auto p = ppmi(tm.counts, options.cds);
  const std::size_t k = std::min(options.dim, tm.terms.size());
  return factor_ppmi(p, tm.terms, k, options.sigma_weight, options.svd);
}

}  // namespace embfuse::graph
