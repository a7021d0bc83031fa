#include "config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "embfuse/corpus/tokenizer.hpp"
#include "embfuse/corpus/vocabulary.hpp"
#include "embfuse/error.hpp"
#include "embfuse/fuse/fuse.hpp"
#include "embfuse/graph/graph.hpp"

namespace embfuse::cli {

static_assert(std::is_same_v<std::uint64_t, unsigned long> && std::is_same_v<std::size_t, unsigned long>);

namespace {

[[noreturn]] void type_error(const std::string& key, const std::string& expected, const YAML::Node& node) {
  std::string got = node.IsScalar() ? "\"" + node.Scalar() + "\""
                    : node.IsSequence() ? "a list"
                    : node.IsMap()      ? "a mapping"
                                        : "null";
  throw Error("config", key + ": expected " + expected + ", got " + got);
}

void check_keys(const YAML::Node& node, const std::string& prefix, const std::set<std::string>& allowed) {
  if (!node.IsMap()) type_error(prefix.empty() ? "<root>" : prefix, "a mapping", node);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) {
      throw Error("config", "unknown key '" + (prefix.empty() ? key : prefix + "." + key) + "'");
    }
  }
}

class Reader {
 public:
  Reader(const YAML::Node& node, std::string prefix) : node_(node), prefix_(std::move(prefix)) {}

  void get(const char* key, std::string& out) const {
    if (auto n = scalar(key)) out = n->Scalar();
  }
  void get(const char* key, bool& out) const {
    if (auto n = scalar(key)) {
      try {
        out = n->as<bool>();
      } catch (const YAML::Exception&) {
        type_error(path(key), "a boolean", *n);
      }
    }
  }
  void get(const char* key, double& out) const {
    if (auto n = scalar(key)) {
      try {
        out = n->as<double>();
      } catch (const YAML::Exception&) {
        type_error(path(key), "a number", *n);
      }
    }
  }
  void get(const char* key, std::size_t& out) const {
    if (auto n = scalar(key)) out = static_cast<std::size_t>(unsigned_value(key, *n));
  }
  void get(const char* key, std::vector<std::string>& out) const {
    const auto n = node_[key];
    if (!n.IsDefined() || n.IsNull()) return;
    out.clear();
    if (n.IsScalar()) {
      out.push_back(n.Scalar());
      return;
    }
    if (!n.IsSequence()) type_error(path(key), "a list of strings", n);
    for (const auto& item : n) {
      if (!item.IsScalar()) type_error(path(key), "a list of strings", n);
      out.push_back(item.Scalar());
    }
  }

 private:
  std::string path(const char* key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  std::optional<YAML::Node> scalar(const char* key) const {
    const auto n = node_[key];
    if (!n.IsDefined() || n.IsNull()) return std::nullopt;
    if (!n.IsScalar()) type_error(path(key), "a scalar", n);
    return n;
  }

  std::uint64_t unsigned_value(const char* key, const YAML::Node& n) const {
    const auto& text = n.Scalar();
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) type_error(path(key), "a non-negative integer", n);
    return v;
  }

  const YAML::Node& node_;
  std::string prefix_;
};

std::string resolve(const std::string& value, const std::filesystem::path& base) {
  if (value.empty() || base.empty()) return value;
  std::filesystem::path p(value);
  if (p.is_absolute()) return value;
  return (base / p).lexically_normal().string();
}

template <typename Fn>
void checked(const std::string& key, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    throw Error("config", key + ": " + e.what());
  }
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw Error("config", key + ": " + what);
}

}  // namespace

void Config::validate() const {
  require(threads >= 1, "threads", "must be >= 1");
  checked("corpus.tokenizer", [&] { corpus::parse_token_scheme(corpus.tokenizer); });
  checked("corpus.min_count", [&] { corpus::MinCount::parse(corpus.min_count); });
  require(corpus.window >= 1, "corpus.window", "must be >= 1");
  require(glove.dim >= 1, "glove.dim", "must be >= 1");
  require(glove.x_max > 0.0, "glove.x_max", "must be positive");
  require(glove.alpha > 0.0, "glove.alpha", "must be positive");
  require(glove.lr >= 0.0, "glove.lr", "must be non-negative");
  require(glove.export_mode == "word" || glove.export_mode == "word+context", "glove.export",
          "must be word|word+context");
  require(graph.mode == "single" || graph.mode == "all", "graph.mode", "must be single|all");
  require(graph.dim >= 1, "graph.dim", "must be >= 1");
  require(graph.cds > 0.0 && graph.cds <= 1.0, "graph.cds", "must be in (0, 1]");
  checked("graph.sigma_weight", [&] { graph::parse_sigma_weight(graph.sigma_weight); });
  require(fuse.kprime >= 1, "fuse.kprime", "must be >= 1");
  checked("fuse.norm", [&] { fuse::parse_norm_mode(fuse.norm); });
  checked("fuse.sigma_weight", [&] { graph::parse_sigma_weight(fuse.sigma_weight); });
  checked("fuse.target", [&] { fuse::parse_projection_target(fuse.target); });
  checked("fuse.splice", [&] { fuse::parse_splice_policy(fuse.splice); });
  require(fuse.sgd_lr > 0.0, "fuse.sgd_lr", "must be positive");
  require(fuse.sgd_decay == "none" || fuse.sgd_decay == "inv-sqrt", "fuse.sgd_decay", "must be none|inv-sqrt");
  require(fuse.sgd_epochs >= 1, "fuse.sgd_epochs", "must be >= 1");
  require(fuse.sgd_batch >= 1, "fuse.sgd_batch", "must be >= 1");
  require(eval.c > 0.0, "eval.C", "must be positive");
  if (eval.gamma != "scale") {
    double g = 0.0;
    auto [ptr, ec] = std::from_chars(eval.gamma.data(), eval.gamma.data() + eval.gamma.size(), g);
    require(ec == std::errc() && ptr == eval.gamma.data() + eval.gamma.size() && g > 0.0, "eval.gamma",
            "must be 'scale' or a positive number");
  }
}

Config parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error("config", std::string("invalid YAML: ") + e.what());
  }
  Config c;
  if (root.IsNull() || !root.IsDefined()) return c;
  check_keys(root, "", {"seed", "threads", "output", "corpus", "glove", "graph", "fuse", "eval"});
  Reader top(root, "");
  top.get("seed", c.seed);
  top.get("threads", c.threads);
  top.get("output", c.output);

  auto section = [&](const char* name, const std::set<std::string>& keys) -> std::optional<YAML::Node> {
    const auto n = root[name];
    if (!n.IsDefined() || n.IsNull()) return std::nullopt;
    check_keys(n, name, keys);
    return n;
  };
  if (auto n = section("corpus", {"input", "tokenizer", "lowercase", "min_count", "window"})) {
    Reader r(*n, "corpus");
    r.get("input", c.corpus.input);
    r.get("tokenizer", c.corpus.tokenizer);
    r.get("lowercase", c.corpus.lowercase);
    r.get("min_count", c.corpus.min_count);
    r.get("window", c.corpus.window);
  }
  if (auto n = section("glove", {"dim", "x_max", "alpha", "lr", "iters", "export"})) {
    Reader r(*n, "glove");
    r.get("dim", c.glove.dim);
    r.get("x_max", c.glove.x_max);
    r.get("alpha", c.glove.alpha);
    r.get("lr", c.glove.lr);
    r.get("iters", c.glove.iters);
    r.get("export", c.glove.export_mode);
  }
  if (auto n = section("graph", {"dump", "mode", "languages", "dim", "cds", "sigma_weight"})) {
    Reader r(*n, "graph");
    r.get("dump", c.graph.dump);
    r.get("mode", c.graph.mode);
    r.get("languages", c.graph.languages);
    r.get("dim", c.graph.dim);
    r.get("cds", c.graph.cds);
    r.get("sigma_weight", c.graph.sigma_weight);
  }
  if (auto n = section("fuse", {"kprime", "norm", "sigma_weight", "target", "splice", "graph_language",
                                "sgd_lr", "sgd_decay", "sgd_epochs", "sgd_batch"})) {
    Reader r(*n, "fuse");
    r.get("kprime", c.fuse.kprime);
    r.get("norm", c.fuse.norm);
    r.get("sigma_weight", c.fuse.sigma_weight);
    r.get("target", c.fuse.target);
    r.get("splice", c.fuse.splice);
    r.get("graph_language", c.fuse.graph_language);
    r.get("sgd_lr", c.fuse.sgd_lr);
    r.get("sgd_decay", c.fuse.sgd_decay);
    r.get("sgd_epochs", c.fuse.sgd_epochs);
    r.get("sgd_batch", c.fuse.sgd_batch);
  }
  if (auto n = section("eval", {"C", "gamma", "pairs", "classify", "nli"})) {
    Reader r(*n, "eval");
    r.get("C", c.eval.c);
    r.get("gamma", c.eval.gamma);
    r.get("pairs", c.eval.pairs);
    r.get("classify", c.eval.classify);
    r.get("nli", c.eval.nli);
  }

  for (auto& g : c.corpus.input) g = resolve(g, base_dir);
  c.output = resolve(c.output, base_dir);
  c.graph.dump = resolve(c.graph.dump, base_dir);
  c.eval.pairs = resolve(c.eval.pairs, base_dir);
  c.eval.classify = resolve(c.eval.classify, base_dir);
  c.eval.nli = resolve(c.eval.nli, base_dir);
  c.validate();
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), std::filesystem::absolute(path).parent_path());
}

nlohmann::json to_json(const Config& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output"] = c.output;
  j["corpus"] = {{"input", c.corpus.input},
                 {"tokenizer", c.corpus.tokenizer},
                 {"lowercase", c.corpus.lowercase},
                 {"min_count", c.corpus.min_count},
                 {"window", c.corpus.window}};
  j["glove"] = {{"dim", c.glove.dim},     {"x_max", c.glove.x_max}, {"alpha", c.glove.alpha},
                {"lr", c.glove.lr},       {"iters", c.glove.iters}, {"export", c.glove.export_mode}};
  j["graph"] = {{"dump", c.graph.dump}, {"mode", c.graph.mode}, {"languages", c.graph.languages},
                {"dim", c.graph.dim},   {"cds", c.graph.cds},   {"sigma_weight", c.graph.sigma_weight}};
  j["fuse"] = {{"kprime", c.fuse.kprime},
               {"norm", c.fuse.norm},
               {"sigma_weight", c.fuse.sigma_weight},
               {"target", c.fuse.target},
               {"splice", c.fuse.splice},
               {"graph_language", c.fuse.graph_language},
               {"sgd_lr", c.fuse.sgd_lr},
               {"sgd_decay", c.fuse.sgd_decay},
               {"sgd_epochs", c.fuse.sgd_epochs},
               {"sgd_batch", c.fuse.sgd_batch}};
  j["eval"] = {{"C", c.eval.c},
               {"gamma", c.eval.gamma},
               {"pairs", c.eval.pairs},
               {"classify", c.eval.classify},
               {"nli", c.eval.nli}};
  return j;
}

std::size_t default_threads(std::size_t fallback) {
  const char* env = std::getenv("EMBFUSE_THREADS");
  if (!env || !*env) return fallback;
  std::size_t v = 0;
  const std::string_view text(env);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v == 0) return fallback;
  return v;
}

}  // namespace embfuse::cli
