#include "embfuse/fuse/fuse.hpp"

#include <unordered_map>

#include "embfuse/corpus/tokenizer.hpp"
#include "embfuse/error.hpp"

namespace embfuse::fuse {

using numerics::DenseMatrix;

namespace {

std::string match_key(std::string token, const MatchPolicy& policy) {
  if (policy.lowercase) token = corpus::to_lower_utf8(token);
  if (policy.unify_separators) {
    for (char& ch : token)
      if (ch == ' ') ch = '_';
  }
  return token;
}

// Key for a graph token, or nullopt when it belongs to another language.
std::optional<std::string> graph_key(const std::string& token, const MatchPolicy& policy) {
  if (!policy.graph_language || !token.starts_with("/c/")) return match_key(token, policy);
  const std::string prefix = "/c/" + *policy.graph_language + "/";
  if (!token.starts_with(prefix)) return std::nullopt;
  return match_key(token.substr(prefix.size()), policy);
}

double mean_norm(const EmbeddingTable& table, const SharedVocabAlignment& alignment, bool glove_side) {
  double total = 0.0;
  for (const auto& p : alignment.pairs) {
    total += numerics::norm2(table.row(glove_side ? p.glove_id : p.graph_id));
  }
  return total / static_cast<double>(alignment.pairs.size());
}

corpus::Vocabulary shared_vocab(const EmbeddingTable& glove, const SharedVocabAlignment& alignment) {
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  entries.reserve(alignment.pairs.size());
  for (const auto& p : alignment.pairs) {
    entries.emplace_back(glove.vocab().token(p.glove_id), glove.vocab().count(p.glove_id));
  }
  return corpus::Vocabulary::from_entries(std::move(entries), glove.vocab().total_tokens());
}

}  // namespace

SharedVocabAlignment align_vocab(const EmbeddingTable& glove, const EmbeddingTable& graph,
                                 const MatchPolicy& policy) {
  if (glove.empty() || graph.empty()) throw Error("fuse-input", "both tables must be nonempty");
  std::unordered_map<std::string, std::uint32_t> graph_index;
  for (std::size_t r = 0; r < graph.size(); ++r) {
    if (auto key = graph_key(graph.vocab().token(r), policy)) {
      graph_index.emplace(std::move(*key), static_cast<std::uint32_t>(r));
    }
  }
  SharedVocabAlignment out;
  std::unordered_map<std::string, bool> seen;
  for (std::size_t r = 0; r < glove.size(); ++r) {
    const auto& token = glove.vocab().token(r);
    auto key = match_key(token, policy);
    auto it = graph_index.find(key);
    if (it == graph_index.end() || !seen.emplace(key, true).second) continue;
    out.pairs.push_back({static_cast<std::uint32_t>(r), it->second, token});
  }
  if (out.pairs.empty()) throw Error("no-shared-vocab", "GloVe and graph vocabularies are disjoint");
  out.coverage = static_cast<double>(out.pairs.size()) / static_cast<double>(glove.size());
  return out;
}

NormMode parse_norm_mode(std::string_view name) {
  if (name == "global-mean-l2") return NormMode::global_mean_l2;
  if (name == "per-vector-l2") return NormMode::per_vector_l2;
  throw Error("config", "norm must be global-mean-l2|per-vector-l2, got '" + std::string(name) + "'");
}

std::string to_string(NormMode mode) {
  return mode == NormMode::global_mean_l2 ? "global-mean-l2" : "per-vector-l2";
}

Normalized normalize_graph_to_glove(const EmbeddingTable& graph, const EmbeddingTable& glove,
                                    const SharedVocabAlignment& alignment, NormMode mode) {
  if (alignment.pairs.empty()) throw Error("fuse-input", "alignment is empty");
  const double glove_mean = mean_norm(glove, alignment, true);
  const double graph_mean = mean_norm(graph, alignment, false);
  if (glove_mean == 0.0 || graph_mean == 0.0) {
    throw Error("zero-norm", "aligned rows have zero mean norm");
  }
  DenseMatrix rows = graph.vectors();
  Normalized out;
  if (mode == NormMode::global_mean_l2) {
    out.scale = glove_mean / graph_mean;
    for (double& v : rows.values()) v *= out.scale;
  } else {
    out.scale = glove_mean;
    for (std::size_t r = 0; r < rows.rows(); ++r) {
      auto row = rows.row(r);
      const double n = numerics::norm2(row);
      if (n == 0.0) continue;
      for (double& v : row) v *= glove_mean / n;
    }
  }
  out.table = EmbeddingTable(graph.vocab(), std::move(rows));
  return out;
}

MergedSpace build_merged_space(const EmbeddingTable& glove, const EmbeddingTable& graph_normalized,
                               const SharedVocabAlignment& alignment, std::size_t k_prime,
                               graph::SigmaWeight weighting, const numerics::SvdOptions& svd) {
  const std::size_t n = alignment.pairs.size();
  const std::size_t width = glove.dim() + graph_normalized.dim();
  if (k_prime < 1 || k_prime > std::min(n, width)) {
    throw Error("kprime-range", "k'=" + std::to_string(k_prime) + " must lie in [1, min(" +
                                    std::to_string(n) + " shared, " + std::to_string(width) +
                                    " concatenated dims)]");
  }
  DenseMatrix stacked(n, width);
  for (std::size_t r = 0; r < n; ++r) {
    auto out = stacked.row(r);
    auto g = glove.row(alignment.pairs[r].glove_id);
    auto p = graph_normalized.row(alignment.pairs[r].graph_id);
    std::copy(g.begin(), g.end(), out.begin());
    std::copy(p.begin(), p.end(), out.begin() + static_cast<std::ptrdiff_t>(g.size()));
  }
  MergedSpace out;
  out.svd = numerics::truncated_svd(stacked, k_prime, svd);
  DenseMatrix rows = out.svd.u;
  if (weighting != graph::SigmaWeight::none) {
    for (std::size_t c = 0; c < k_prime; ++c) {
      const double s = out.svd.singular_values[c];
      const double g = weighting == graph::SigmaWeight::sqrt ? std::sqrt(s) : s;
      for (std::size_t r = 0; r < n; ++r) rows(r, c) *= g;
    }
  }
  out.merged = EmbeddingTable(shared_vocab(glove, alignment), std::move(rows));
  return out;
}

EmbeddingTable aligned_graph_rows(const EmbeddingTable& graph, const EmbeddingTable& glove,
                                  const SharedVocabAlignment& alignment) {
  DenseMatrix rows(alignment.pairs.size(), graph.dim());
  for (std::size_t r = 0; r < alignment.pairs.size(); ++r) {
    auto src = graph.row(alignment.pairs[r].graph_id);
    std::copy(src.begin(), src.end(), rows.row(r).begin());
  }
  return EmbeddingTable(shared_vocab(glove, alignment), std::move(rows));
}

ProjectionModel learn_projection(const EmbeddingTable& glove, const EmbeddingTable& targets,
                                 const SharedVocabAlignment& alignment,
                                 const numerics::SgdOptions& sgd) {
  const std::size_t n = alignment.pairs.size();
  if (n < 2) throw Error("fuse-input", "learning a projection needs at least 2 shared tokens");
  if (targets.size() != n) throw Error("shape", "target rows do not match the alignment");
  DenseMatrix x(n, glove.dim());
  for (std::size_t r = 0; r < n; ++r) {
    auto src = glove.row(alignment.pairs[r].glove_id);
    std::copy(src.begin(), src.end(), x.row(r).begin());
  }
  return numerics::solve_least_squares_sgd(x, targets.vectors(), sgd);
}

SplicePolicy parse_splice_policy(std::string_view name) {
  if (name == "projected" || name == "projected-everywhere") return SplicePolicy::projected_everywhere;
  if (name == "keep-merged" || name == "keep-merged-on-shared") return SplicePolicy::keep_merged_on_shared;
  throw Error("config", "splice must be projected|keep-merged, got '" + std::string(name) + "'");
}

std::string to_string(SplicePolicy policy) {
  return policy == SplicePolicy::projected_everywhere ? "projected" : "keep-merged";
}

EmbeddingTable project_full_vocab(const EmbeddingTable& glove, const ProjectionModel& model,
                                  const EmbeddingTable& merged_shared,
                                  const SharedVocabAlignment& alignment, SplicePolicy splice) {
  if (model.source_dim != glove.dim() || model.w.cols() != glove.dim()) {
    throw Error("shape", "projection expects " + std::to_string(model.source_dim) +
                             "-dim input, GloVe has " + std::to_string(glove.dim()));
  }
  DenseMatrix rows(glove.size(), model.target_dim);
  for (std::size_t r = 0; r < glove.size(); ++r) {
    auto projected = model.apply(glove.row(r));
    std::copy(projected.begin(), projected.end(), rows.row(r).begin());
  }
  if (splice == SplicePolicy::keep_merged_on_shared) {
    if (merged_shared.dim() != model.target_dim || merged_shared.size() != alignment.pairs.size()) {
      throw Error("shape", "merged table does not match the projection target");
    }
    for (std::size_t i = 0; i < alignment.pairs.size(); ++i) {
      auto src = merged_shared.row(i);
      std::copy(src.begin(), src.end(), rows.row(alignment.pairs[i].glove_id).begin());
    }
  }
  return EmbeddingTable(glove.vocab(), std::move(rows));
}

ProjectionTarget parse_projection_target(std::string_view name) {
  if (name == "merged") return ProjectionTarget::merged;
  if (name == "ppmi") return ProjectionTarget::ppmi;
  throw Error("config", "target must be merged|ppmi, got '" + std::string(name) + "'");
}

std::string to_string(ProjectionTarget target) {
  return target == ProjectionTarget::merged ? "merged" : "ppmi";
}

nlohmann::json FuseReport::to_json() const {
  nlohmann::json j;
  j["glove_vocab"] = glove_vocab;
  j["graph_vocab"] = graph_vocab;
  j["shared"] = shared;
  j["coverage"] = coverage;
  j["scale"] = scale;
  j["k_prime"] = k_prime;
  j["fit_mse"] = fit_mse;
  j["sgd_epochs"] = sgd_epochs;
  j["output_vocab"] = output_vocab;
  j["norm"] = to_string(options.norm);
  j["sigma_weight"] = graph::to_string(options.sigma_weight);
  j["target"] = to_string(options.target);
  j["splice"] = to_string(options.splice);
  j["match"] = {{"lowercase", options.match.lowercase},
                {"unify_separators", options.match.unify_separators},
                {"graph_language", options.match.graph_language
                                       ? nlohmann::json(*options.match.graph_language)
                                       : nlohmann::json(nullptr)}};
  j["sgd"] = {{"lr", options.sgd.lr},
              {"decay", options.sgd.decay == numerics::LearningRateDecay::inv_sqrt ? "inv-sqrt" : "none"},
              {"epochs", options.sgd.epochs},
              {"batch", options.sgd.batch},
              {"seed", options.sgd.seed}};
  j["svd"] = {{"oversampling", options.svd.oversampling},
              {"power_iterations", options.svd.power_iterations},
              {"tol", options.svd.tol},
              {"seed", options.svd.seed}};
  return j;
}

FuseResult fuse(const EmbeddingTable& glove, const EmbeddingTable& graph, const FuseOptions& options) {
  const auto alignment = align_vocab(glove, graph, options.match);
  const auto normalized = normalize_graph_to_glove(graph, glove, alignment, options.norm);
  auto merged = build_merged_space(glove, normalized.table, alignment, options.k_prime,
                                   options.sigma_weight, options.svd);

  FuseResult result;
  if (options.target == ProjectionTarget::merged) {
    result.projection = learn_projection(glove, merged.merged, alignment, options.sgd);
  } else {
    result.projection = learn_projection(
        glove, aligned_graph_rows(normalized.table, glove, alignment), alignment, options.sgd);
  }
  // Splicing merged rows only makes sense when the projection lands in the merged space.
  const SplicePolicy splice =
      options.target == ProjectionTarget::merged ? options.splice : SplicePolicy::projected_everywhere;
  result.fused = project_full_vocab(glove, result.projection, merged.merged, alignment, splice);
  result.merged_shared = std::move(merged.merged);

  auto& r = result.report;
  r.glove_vocab = glove.size();
  r.graph_vocab = graph.size();
  r.shared = alignment.pairs.size();
  r.coverage = alignment.coverage;
  r.scale = normalized.scale;
  r.k_prime = options.k_prime;
  r.fit_mse = result.projection.fit_mse;
  r.sgd_epochs = result.projection.epochs_run;
  r.output_vocab = result.fused.size();
  r.options = options;
  return result;
}

}  // namespace embfuse::fuse
