#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace embfuse::cli {

inline constexpr std::uint64_t kDefaultSeed = 20240917;

struct CorpusSection {
  std::vector<std::string> input;  // globs
  std::string tokenizer = "unicode-word-boundary";
  bool lowercase = true;
  std::string min_count = "auto";
  std::size_t window = 10;
  friend bool operator==(const CorpusSection&, const CorpusSection&) = default;
};

struct GloveSection {
  std::size_t dim = 300;
  double x_max = 100.0;
  double alpha = 0.75;
  double lr = 0.05;
  std::size_t iters = 100;
  std::string export_mode = "word+context";
  friend bool operator==(const GloveSection&, const GloveSection&) = default;
};

struct GraphSection {
  std::string dump;
  std::string mode = "single";
  std::vector<std::string> languages;
  std::size_t dim = 300;
  double cds = 0.75;
  std::string sigma_weight = "none";
  friend bool operator==(const GraphSection&, const GraphSection&) = default;
};

struct FuseSection {
  std::size_t kprime = 300;
  std::string norm = "global-mean-l2";
  std::string sigma_weight = "none";
  std::string target = "merged";
  std::string splice = "projected";
  std::string graph_language;  // empty: the single graph language, if any
  double sgd_lr = 0.5;
  std::string sgd_decay = "inv-sqrt";
  std::size_t sgd_epochs = 200;
  std::size_t sgd_batch = 64;
  friend bool operator==(const FuseSection&, const FuseSection&) = default;
};

struct EvalSection {
  double c = 1.0;
  std::string gamma = "scale";  // "scale" or a positive number
  std::string pairs;
  std::string classify;
  std::string nli;
  friend bool operator==(const EvalSection&, const EvalSection&) = default;
};

struct Config {
  std::uint64_t seed = kDefaultSeed;
  std::size_t threads = 1;
  std::string output = "out";
  CorpusSection corpus;
  GloveSection glove;
  GraphSection graph;
  FuseSection fuse;
  EvalSection eval;
  friend bool operator==(const Config&, const Config&) = default;

  // Throws Error("config") naming the offending key.
  void validate() const;
};

// Declarative YAML. Missing keys keep their defaults, unknown keys are
// rejected, and type errors name the dotted key path. Relative paths are
// resolved against `base_dir`.
Config parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);

// JSON is a YAML subset, so parse_config(to_json(c).dump()) == c.
nlohmann::json to_json(const Config& config);

// EMBFUSE_THREADS when set and valid, otherwise `fallback`.
std::size_t default_threads(std::size_t fallback = 1);

}  // namespace embfuse::cli
