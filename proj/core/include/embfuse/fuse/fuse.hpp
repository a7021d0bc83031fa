#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embfuse/glove/embedding_table.hpp"
#include "embfuse/graph/graph.hpp"
#include "embfuse/numerics/least_squares.hpp"
#include "embfuse/numerics/svd.hpp"

namespace embfuse::fuse {

using numerics::ProjectionModel;

struct MatchPolicy {
  bool lowercase = true;
  // Treat ' ' and '_' as the same separator on both sides.
  bool unify_separators = true;
  // When set, graph keys "/c/<lang>/<term>" match only for this language and
  // are compared by <term>. Keys without the "/c/" prefix are compared as is.
  std::optional<std::string> graph_language;
};

struct AlignedPair {
  std::uint32_t glove_id;
  std::uint32_t graph_id;
  std::string token;  // GloVe surface form
};

struct SharedVocabAlignment {
  std::vector<AlignedPair> pairs;  // GloVe order
  double coverage = 0.0;           // |pairs| / |GloVe vocabulary|
};

// Exact match after the policy's normalization. When several tokens on one
// side normalize to the same key, the earliest row wins. Throws
// Error("no-shared-vocab") for an empty intersection.
SharedVocabAlignment align_vocab(const EmbeddingTable& glove, const EmbeddingTable& graph,
                                 const MatchPolicy& policy = {});

enum class NormMode {
  global_mean_l2,  // one scalar s = mean|glove row| / mean|graph row| over aligned pairs
  per_vector_l2,   // every graph row rescaled to the aligned GloVe mean norm
};
NormMode parse_norm_mode(std::string_view name);
std::string to_string(NormMode mode);

struct Normalized {
  EmbeddingTable table;
  double scale = 1.0;  // s for global mode, the target norm for per-vector mode
};

// Throws Error("zero-norm") when either side's aligned mean norm is zero.
Normalized normalize_graph_to_glove(const EmbeddingTable& graph, const EmbeddingTable& glove,
                                    const SharedVocabAlignment& alignment,
                                    NormMode mode = NormMode::global_mean_l2);

struct MergedSpace {
  EmbeddingTable merged;  // one row per aligned pair, in alignment order
  numerics::SvdResult svd;
};

// Stacks [glove row | graph row] for each aligned pair, takes a rank-k'
// truncated SVD and keeps U (weighted by g(S) per `weighting`; the default
// drops the singular values). Throws Error("kprime-range") unless
// 1 <= k' <= min(|shared|, d_glove + d_graph).
MergedSpace build_merged_space(const EmbeddingTable& glove, const EmbeddingTable& graph_normalized,
                               const SharedVocabAlignment& alignment, std::size_t k_prime,
                               graph::SigmaWeight weighting = graph::SigmaWeight::none,
                               const numerics::SvdOptions& svd = {});

// Rows of `table` picked by the aligned graph ids, labelled with GloVe tokens.
EmbeddingTable aligned_graph_rows(const EmbeddingTable& graph, const EmbeddingTable& glove,
                                  const SharedVocabAlignment& alignment);

// Least-squares map from the GloVe rows of the aligned tokens to `targets`
// (row i of `targets` belongs to alignment.pairs[i]). Needs >= 2 pairs.
ProjectionModel learn_projection(const EmbeddingTable& glove, const EmbeddingTable& targets,
                                 const SharedVocabAlignment& alignment,
                                 const numerics::SgdOptions& sgd = {});

enum class SplicePolicy { projected_everywhere, keep_merged_on_shared };
SplicePolicy parse_splice_policy(std::string_view name);
std::string to_string(SplicePolicy policy);

// Output vocabulary is exactly the GloVe vocabulary. Every row is W * glove
// row, except that keep_merged_on_shared copies the merged rows of aligned
// tokens verbatim.
EmbeddingTable project_full_vocab(const EmbeddingTable& glove, const ProjectionModel& model,
                                  const EmbeddingTable& merged_shared,
                                  const SharedVocabAlignment& alignment,
                                  SplicePolicy splice = SplicePolicy::projected_everywhere);

enum class ProjectionTarget { merged, ppmi };
ProjectionTarget parse_projection_target(std::string_view name);
std::string to_string(ProjectionTarget target);

struct FuseOptions {
  MatchPolicy match;
  NormMode norm = NormMode::global_mean_l2;
  std::size_t k_prime = 300;
  graph::SigmaWeight sigma_weight = graph::SigmaWeight::none;
  ProjectionTarget target = ProjectionTarget::merged;
  SplicePolicy splice = SplicePolicy::projected_everywhere;
  numerics::SgdOptions sgd;
  numerics::SvdOptions svd;
};

// Provenance for one fuse run; serialized as fuse_report.json.
struct FuseReport {
  std::size_t glove_vocab = 0;
  std::size_t graph_vocab = 0;
  std::size_t shared = 0;
  double coverage = 0.0;
  double scale = 1.0;
  std::size_t k_prime = 0;
  double fit_mse = 0.0;
  std::size_t sgd_epochs = 0;
  std::size_t output_vocab = 0;
  FuseOptions options;

  nlohmann::json to_json() const;
};

struct FuseResult {
  EmbeddingTable fused;
  EmbeddingTable merged_shared;
  ProjectionModel projection;
  FuseReport report;
};

FuseResult fuse(const EmbeddingTable& glove, const EmbeddingTable& graph, const FuseOptions& options);

}  // namespace embfuse::fuse
