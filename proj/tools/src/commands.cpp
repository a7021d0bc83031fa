#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include <CLI11.hpp>

#include "embfuse/corpus/cooccurrence.hpp"
#include "embfuse/corpus/tokenizer.hpp"
#include "embfuse/corpus/vocabulary.hpp"
#include "embfuse/error.hpp"
#include "embfuse/eval/eval.hpp"
#include "embfuse/fuse/fuse.hpp"
#include "embfuse/glove/glove.hpp"
#include "embfuse/graph/graph.hpp"
#include "embfuse/io.hpp"
#include "embfuse/random.hpp"
#include "manifest.hpp"

namespace embfuse::cli {

namespace {

// Stream ids for seeds derived from the run seed.
enum SeedStream : std::uint64_t { kGraphSvd = 1, kFuseSvd = 2, kFuseSgd = 3 };

fs::path manifest_for(const fs::path& output) {
  if (fs::is_directory(output)) return output / "manifest.json";
  return fs::path(output.string() + ".manifest.json");
}

corpus::TokenizerConfig tokenizer_config(const Config& c) {
  return {corpus::parse_token_scheme(c.corpus.tokenizer), c.corpus.lowercase};
}

std::vector<fs::path> corpus_files(const Config& c) {
  std::vector<fs::path> files;
  for (const auto& pattern : c.corpus.input) {
    auto matched = io::expand_glob(pattern);
    if (matched.empty()) throw Error("io", "corpus input '" + pattern + "' matches no file");
    files.insert(files.end(), matched.begin(), matched.end());
  }
  if (files.empty()) throw Error("config", "corpus.input: no corpus files given");
  return files;
}

std::set<std::string> graph_languages(const Config& c) {
  return {c.graph.languages.begin(), c.graph.languages.end()};
}

fuse::FuseOptions fuse_options(const Config& c) {
  fuse::FuseOptions o;
  if (!c.fuse.graph_language.empty()) {
    o.match.graph_language = c.fuse.graph_language;
  } else if (c.graph.languages.size() == 1) {
    o.match.graph_language = c.graph.languages.front();
  }
  o.norm = fuse::parse_norm_mode(c.fuse.norm);
  o.k_prime = c.fuse.kprime;
  o.sigma_weight = graph::parse_sigma_weight(c.fuse.sigma_weight);
  o.target = fuse::parse_projection_target(c.fuse.target);
  o.splice = fuse::parse_splice_policy(c.fuse.splice);
  o.sgd.lr = c.fuse.sgd_lr;
  o.sgd.decay = c.fuse.sgd_decay == "none" ? numerics::LearningRateDecay::none
                                           : numerics::LearningRateDecay::inv_sqrt;
  o.sgd.epochs = c.fuse.sgd_epochs;
  o.sgd.batch = c.fuse.sgd_batch;
  o.sgd.seed = Rng::derive(c.seed, kFuseSgd);
  o.svd.seed = Rng::derive(c.seed, kFuseSvd);
  return o;
}

eval::SvmConfig svm_config(const Config& c) {
  eval::SvmConfig s;
  s.c = c.eval.c;
  s.threads = c.threads;
  if (c.eval.gamma != "scale") {
    s.gamma_policy = eval::GammaPolicy::fixed;
    s.gamma = std::stod(c.eval.gamma);
  }
  return s;
}

void emit(const nlohmann::json& report, const std::optional<fs::path>& out, std::ostream& log) {
  log << report.dump(2) << '\n';
  if (out) {
    auto f = io::open_for_write(*out);
    f << report.dump(2) << '\n';
  }
}

}  // namespace

void cmd_vocab(const Config& c, const fs::path& out) {
  RunManifest manifest("vocab", to_json(c));
  const auto files = corpus_files(c);
  const auto min_count = corpus::MinCount::parse(c.corpus.min_count);
  const auto vocab = corpus::build_vocab_from_files(files, tokenizer_config(c), min_count);
  corpus::write_vocab_tsv(vocab, out);
  for (const auto& f : files) manifest.add_input(f);
  manifest.add_output(out);
  manifest.set("vocab_size", vocab.size());
  manifest.set("total_tokens", vocab.total_tokens());
  manifest.set("min_count_resolved", min_count.resolve(vocab.total_tokens()));
  manifest.write(manifest_for(out));
}

void cmd_cooccur(const Config& c, const fs::path& vocab_path, const fs::path& out_dir) {
  RunManifest manifest("cooccur", to_json(c));
  const auto files = corpus_files(c);
  const auto vocab = corpus::read_vocab_tsv(vocab_path);
  const auto store = corpus::count_cooccurrences_in_files(files, tokenizer_config(c), vocab,
                                                          c.corpus.window, c.threads);
  fs::create_directories(out_dir);
  for (const auto& e : fs::directory_iterator(out_dir)) {
    if (e.path().extension() == ".bin") fs::remove(e.path());
  }
  corpus::write_shards(store, out_dir);
  for (const auto& f : files) manifest.add_input(f);
  manifest.add_input(vocab_path);
  manifest.add_output(out_dir);
  manifest.set("nonzeros", store.size());
  manifest.set("distance_weighting", "1/d");
  manifest.write(out_dir / "manifest.json");
}

void cmd_glove(const Config& c, const fs::path& cooc, const fs::path& vocab_path, const fs::path& out) {
  RunManifest manifest("glove", to_json(c));
  const auto vocab = corpus::read_vocab_tsv(vocab_path);
  const auto store = corpus::read_shards(cooc);
  glove::GloveParams p;
  p.dim = c.glove.dim;
  p.x_max = c.glove.x_max;
  p.alpha = c.glove.alpha;
  p.lr = c.glove.lr;
  p.iterations = c.glove.iters;
  p.seed = c.seed;
  p.threads = c.threads;
  p.mode = c.threads > 1 ? glove::ExecutionMode::parallel : glove::ExecutionMode::deterministic;
  glove::TrainingReport report;
  const auto model = glove::train(store, vocab, p, &report);
  const auto table = glove::export_vectors(
      model, vocab, c.glove.export_mode == "word" ? glove::ExportMode::word : glove::ExportMode::word_plus_context);
  save_embeddings(table, out);
  manifest.add_input(cooc);
  manifest.add_input(vocab_path);
  manifest.add_output(out);
  manifest.set_seed("glove", p.seed);
  manifest.set("epoch_loss", report.epoch_loss);
  manifest.set("skipped_updates", report.skipped_updates);
  manifest.set("mode", c.threads > 1 ? "parallel" : "deterministic");
  manifest.write(manifest_for(out));
}

void cmd_graph(const Config& c, const fs::path& out) {
  RunManifest manifest("graph-ppmi", to_json(c));
  if (c.graph.dump.empty()) throw Error("config", "graph.dump: no assertion dump given");
  const bool single = c.graph.mode == "single";
  if (single && c.graph.languages.empty()) {
    throw Error("config", "graph.languages: single mode needs at least one language");
  }
  graph::ParseStats stats;
  const auto assertions = graph::parse_assertions_file(
      c.graph.dump, single ? std::optional(graph_languages(c)) : std::nullopt, &stats);
  graph::GraphEmbeddingOptions o;
  o.mode = single ? graph::GraphMode::single : graph::GraphMode::all;
  o.languages = graph_languages(c);
  o.dim = c.graph.dim;
  o.cds = c.graph.cds;
  o.sigma_weight = graph::parse_sigma_weight(c.graph.sigma_weight);
  o.svd.seed = Rng::derive(c.seed, kGraphSvd);
  const auto table = graph::graph_embeddings(assertions, o);
  save_embeddings(table, out);
  manifest.add_input(c.graph.dump);
  manifest.add_output(out);
  manifest.set_seed("graph_svd", o.svd.seed);
  manifest.set("parse", {{"records", stats.records},
                         {"kept", stats.kept},
                         {"filtered", stats.filtered},
                         {"non_term", stats.non_term},
                         {"malformed", stats.malformed}});
  manifest.set("terms", table.size());
  manifest.set("dim", table.dim());
  manifest.write(manifest_for(out));
}

void cmd_merge(const Config& c, const fs::path& glove_path, const fs::path& graph_path, const fs::path& out,
               const fs::path& report_path) {
  RunManifest manifest("merge", to_json(c));
  const auto glove = load_embeddings(glove_path);
  const auto graph = load_embeddings(graph_path);
  const auto options = fuse_options(c);
  const auto result = fuse::fuse(glove, graph, options);
  save_embeddings(result.fused, out);
  {
    auto f = io::open_for_write(report_path);
    f << result.report.to_json().dump(2) << '\n';
  }
  manifest.add_input(glove_path);
  manifest.add_input(graph_path);
  manifest.add_output(out);
  manifest.add_output(report_path);
  manifest.set_seed("fuse_svd", options.svd.seed);
  manifest.set_seed("fuse_sgd", options.sgd.seed);
  manifest.write(manifest_for(out));
}

void cmd_eval_sim(const Config& c, const fs::path& emb, const fs::path& pairs,
                  const std::optional<fs::path>& out, std::ostream& log) {
  (void)c;
  const auto table = load_embeddings(emb);
  const auto ds = eval::load_word_pairs(pairs);
  auto report = eval::eval_similarity(table, ds).to_json();
  report["embeddings"] = emb.string();
  report["dataset"] = ds.name;
  emit(report, out, log);
}

void cmd_eval_task(const Config& c, const fs::path& emb, const fs::path& data, bool nli,
                   const std::optional<fs::path>& out, std::ostream& log) {
  const auto table = load_embeddings(emb);
  const auto ds = eval::load_labeled_dataset(data);
  const auto svm = svm_config(c);
  auto report = eval::run_task(table, ds, nli ? eval::TaskKind::nli : eval::TaskKind::classify, svm,
                               tokenizer_config(c))
                    .to_json();
  report["embeddings"] = emb.string();
  report["dataset"] = data.string();
  report["config"] = {{"C", c.eval.c}, {"gamma", c.eval.gamma}, {"tokenizer", c.corpus.tokenizer}};
  emit(report, out, log);
}

void cmd_correlate(const std::string& reports_glob, const fs::path& deltas, const std::optional<fs::path>& out,
                   std::ostream& log) {
  std::map<std::string, double> delta;
  {
    io::LineReader reader(deltas);
    std::string line;
    while (reader.next(line)) {
      if (line.empty() || line.starts_with('#')) continue;
      const auto tab = line.find('\t');
      const std::string where = deltas.string() + ":" + std::to_string(reader.line_number());
      if (tab == std::string::npos) throw Error("dataset", where + ": expected name<TAB>delta");
      try {
        delta[line.substr(0, tab)] = std::stod(line.substr(tab + 1));
      } catch (const std::exception&) {
        if (reader.line_number() == 1) continue;  // header
        throw Error("dataset", where + ": delta is not a number");
      }
    }
  }
  std::vector<eval::ImprovementRecord> records;
  nlohmann::json points = nlohmann::json::array();
  for (const auto& path : io::expand_glob(reports_glob)) {
    const std::string name = path.parent_path().filename().string();
    auto it = delta.find(name);
    if (it == delta.end()) continue;
    std::ifstream in(path);
    const auto report = nlohmann::json::parse(in, nullptr, false);
    if (report.is_discarded() || !report.contains("shared")) {
      throw Error("dataset", path.string() + " is not a fuse report");
    }
    const double shared = report["shared"].get<double>();
    records.push_back({name, shared, it->second});
    points.push_back({{"name", name},
                      {"common_vocab", shared},
                      {"log_common_vocab", std::log10(shared)},
                      {"improvement", it->second}});
  }
  const auto r = eval::correlate_improvement(records);
  emit({{"pearson", r.pearson}, {"spearman", r.spearman}, {"n", r.n}, {"points", points}}, out, log);
}

void cmd_pipeline(const Config& c, std::ostream& log) {
  const fs::path dir = c.output;
  fs::create_directories(dir);
  RunManifest manifest("pipeline", to_json(c));
  const auto vocab = dir / "vocab.tsv";
  const auto cooc = dir / "cooc";
  const auto glove = dir / "glove.bin";
  const auto graph = dir / "graph.bin";
  const auto fused = dir / "fused.bin";
  const auto report = dir / "fuse_report.json";

  log << "vocab\n";
  cmd_vocab(c, vocab);
  log << "cooccur\n";
  cmd_cooccur(c, vocab, cooc);
  log << "glove\n";
  cmd_glove(c, cooc, vocab, glove);
  log << "graph-ppmi\n";
  cmd_graph(c, graph);
  log << "merge\n";
  cmd_merge(c, glove, graph, fused, report);

  std::ostringstream sink;
  nlohmann::json evals = nlohmann::json::object();
  auto both = [&](const std::string& name, auto&& run) {
    const auto g = dir / ("eval_" + name + "_glove.json");
    const auto f = dir / ("eval_" + name + "_fused.json");
    run(glove, g);
    run(fused, f);
    std::ifstream gi(g), fi(f);
    const auto gj = nlohmann::json::parse(gi);
    const auto fj = nlohmann::json::parse(fi);
    const char* key = name == "sim" ? "spearman" : "macro_f1";
    evals[name] = {{"glove", gj[key]}, {"fused", fj[key]}, {"delta", fj[key].get<double>() - gj[key].get<double>()}};
    manifest.add_output(g);
    manifest.add_output(f);
  };
  if (!c.eval.pairs.empty()) {
    log << "eval-sim\n";
    both("sim", [&](const fs::path& emb, const fs::path& out) { cmd_eval_sim(c, emb, c.eval.pairs, out, sink); });
  }
  if (!c.eval.classify.empty()) {
    log << "eval-classify\n";
    both("classify",
         [&](const fs::path& emb, const fs::path& out) { cmd_eval_task(c, emb, c.eval.classify, false, out, sink); });
  }
  if (!c.eval.nli.empty()) {
    log << "eval-nli\n";
    both("nli", [&](const fs::path& emb, const fs::path& out) { cmd_eval_task(c, emb, c.eval.nli, true, out, sink); });
  }
  {
    auto f = io::open_for_write(dir / "eval_report.json");
    f << evals.dump(2) << '\n';
  }
  log << evals.dump(2) << '\n';

  for (const auto& f : corpus_files(c)) manifest.add_input(f);
  manifest.add_input(c.graph.dump);
  for (const auto& p : {vocab, cooc, glove, graph, fused, report, dir / "eval_report.json"}) manifest.add_output(p);
  manifest.write(dir / "manifest.json");
}

// ---- command line ------------------------------------------------------------

namespace {

struct Common {
  std::optional<std::string> config;
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--config", common.config, "YAML config file (flags override its values)")
      ->check(CLI::ExistingFile);
  sub->add_option("--threads", common.threads, "Worker threads; 1 means deterministic mode (default: "
                                               "$EMBFUSE_THREADS, then the config, then 1)");
  sub->add_option("--seed", common.seed, "Run seed");
}

Config base_config(const Common& common) {
  Config c = common.config ? load_config(*common.config) : Config{};
  if (common.threads) c.threads = *common.threads;
  else c.threads = default_threads(c.threads);
  if (common.seed) c.seed = *common.seed;
  return c;
}

template <typename T>
void set_if(const std::optional<T>& value, T& target) {
  if (value) target = *value;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fuse GloVe word vectors with knowledge-graph PPMI vectors and evaluate them."};
  app.name("embfuse");
  app.require_subcommand(1);
  app.set_version_flag("--version", EMBFUSE_VERSION);

  Common common;
  // vocab / cooccur / glove
  std::vector<std::string> input;
  std::optional<std::string> min_count, tokenizer;
  std::optional<std::size_t> window;
  bool keep_case = false;
  std::string vocab_path, out_path, cooc_path;
  std::optional<std::size_t> dim, iters;
  std::optional<double> x_max, alpha, lr;
  std::optional<std::string> export_mode;
  // graph
  std::optional<std::string> dump, mode, sigma_weight;
  std::vector<std::string> langs;
  std::optional<double> cds;
  // merge
  std::string glove_path, graph_path;
  std::optional<std::string> report_path, norm, splice, target, graph_lang, merge_sigma;
  std::optional<std::size_t> kprime, sgd_epochs;
  std::optional<double> sgd_lr;
  // eval
  std::string emb_path, pairs_path, data_path;
  std::optional<std::string> eval_out, gamma;
  std::optional<double> c_value;
  std::string reports_glob, deltas_path;

  auto corpus_opts = [&](CLI::App* sub) {
    sub->add_option("--input", input, "Corpus files or globs, one sentence per line (plain or gzip)");
    sub->add_option("--tokenizer", tokenizer, "whitespace | unicode-word-boundary");
    sub->add_flag("--keep-case", keep_case, "Do not lowercase tokens");
  };

  auto* vocab = app.add_subcommand("vocab", "Count tokens and write the vocabulary TSV");
  add_common(vocab, common);
  corpus_opts(vocab);
  vocab->add_option("--min-count", min_count, "auto | N (auto: 5 above 1M tokens, else 2)");
  vocab->add_option("--out", out_path, "Output vocabulary TSV")->required();

  auto* cooccur = app.add_subcommand("cooccur", "Accumulate 1/d-weighted co-occurrence shards");
  add_common(cooccur, common);
  corpus_opts(cooccur);
  cooccur->add_option("--vocab", vocab_path, "Vocabulary TSV")->required();
  cooccur->add_option("--window", window, "Symmetric window size");
  cooccur->add_option("--out", out_path, "Output shard directory")->required();

  auto* glove = app.add_subcommand("glove", "Train GloVe vectors from co-occurrence shards");
  add_common(glove, common);
  glove->add_option("--cooc", cooc_path, "Shard file or directory")->required();
  glove->add_option("--vocab", vocab_path, "Vocabulary TSV")->required();
  glove->add_option("--dim", dim, "Vector size");
  glove->add_option("--x-max", x_max, "Weighting cutoff");
  glove->add_option("--alpha", alpha, "Weighting exponent");
  glove->add_option("--lr", lr, "AdaGrad learning rate");
  glove->add_option("--iters", iters, "Training epochs");
  glove->add_option("--export", export_mode, "word | word+context");
  glove->add_option("--out", out_path, "Output embeddings (.txt/.vec for text, else binary)")->required();

  auto* graph = app.add_subcommand("graph-ppmi", "Build PPMI graph vectors from an assertion dump");
  add_common(graph, common);
  graph->add_option("--dump", dump, "Assertion TSV dump (plain or gzip)");
  graph->add_option("--mode", mode, "single | all");
  graph->add_option("--lang", langs, "Language(s) kept in single mode");
  graph->add_option("--dim", dim, "Vector size");
  graph->add_option("--cds", cds, "Context smoothing exponent");
  graph->add_option("--sigma-weight", sigma_weight, "none | sqrt | full");
  graph->add_option("--out", out_path, "Output embeddings")->required();

  auto* merge = app.add_subcommand("merge", "Fuse GloVe and graph vectors into one table");
  add_common(merge, common);
  merge->add_option("--glove", glove_path, "GloVe embeddings")->required();
  merge->add_option("--graph", graph_path, "Graph embeddings")->required();
  merge->add_option("--kprime", kprime, "Merged space size");
  merge->add_option("--norm", norm, "global-mean-l2 | per-vector-l2");
  merge->add_option("--sigma-weight", merge_sigma, "none | sqrt | full");
  merge->add_option("--target", target, "merged | ppmi");
  merge->add_option("--splice", splice, "projected | keep-merged");
  merge->add_option("--graph-lang", graph_lang, "Match graph keys /c/<lang>/<term> by <term>");
  merge->add_option("--sgd-lr", sgd_lr, "Relative SGD step size");
  merge->add_option("--sgd-epochs", sgd_epochs, "SGD epochs");
  merge->add_option("--out", out_path, "Output fused embeddings")->required();
  merge->add_option("--report", report_path, "fuse_report.json path (default: beside --out)");

  auto* sim = app.add_subcommand("eval-sim", "Spearman correlation on a word-pair dataset");
  add_common(sim, common);
  sim->add_option("--emb", emb_path, "Embeddings")->required();
  sim->add_option("--pairs", pairs_path, "Word pairs CSV/TSV")->required();
  sim->add_option("--out", eval_out, "Report JSON");

  auto task_opts = [&](CLI::App* sub) {
    add_common(sub, common);
    sub->add_option("--emb", emb_path, "Embeddings")->required();
    sub->add_option("--data", data_path, "Dataset directory with split files")->required();
    sub->add_option("--C", c_value, "SVM regularization");
    sub->add_option("--gamma", gamma, "scale | <positive number>");
    sub->add_option("--tokenizer", tokenizer, "whitespace | unicode-word-boundary");
    sub->add_option("--out", eval_out, "Report JSON");
  };
  auto* classify = app.add_subcommand("eval-classify", "RBF-SVM classification over summed vectors");
  task_opts(classify);
  auto* nli = app.add_subcommand("eval-nli", "RBF-SVM NLI over premise/hypothesis concatenation");
  task_opts(nli);

  auto* correlate = app.add_subcommand("correlate", "Correlate shared vocabulary size with gains");
  correlate->add_option("--reports", reports_glob, "Glob of fuse_report.json files (runs/*/fuse_report.json)")
      ->required();
  correlate->add_option("--metric-deltas", deltas_path, "TSV of <run name>\\t<improvement>")->required();
  correlate->add_option("--out", eval_out, "Report JSON");

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage from a config file");
  add_common(pipeline, common);
  pipeline->add_option("--out", out_path, "Output directory (overrides config output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "embfuse: " << e.what() << '\n';
    err << "Run with --help for usage.\n";
    return 2;
  }

  try {
    Config c = base_config(common);
    set_if(tokenizer, c.corpus.tokenizer);
    if (keep_case) c.corpus.lowercase = false;
    if (!input.empty()) c.corpus.input = input;
    set_if(min_count, c.corpus.min_count);
    set_if(window, c.corpus.window);

    if (vocab->parsed()) {
      c.validate();
      cmd_vocab(c, out_path);
    } else if (cooccur->parsed()) {
      c.validate();
      cmd_cooccur(c, vocab_path, out_path);
    } else if (glove->parsed()) {
      set_if(dim, c.glove.dim);
      set_if(x_max, c.glove.x_max);
      set_if(alpha, c.glove.alpha);
      set_if(lr, c.glove.lr);
      set_if(iters, c.glove.iters);
      set_if(export_mode, c.glove.export_mode);
      c.validate();
      cmd_glove(c, cooc_path, vocab_path, out_path);
    } else if (graph->parsed()) {
      set_if(dump, c.graph.dump);
      set_if(mode, c.graph.mode);
      if (!langs.empty()) c.graph.languages = langs;
      set_if(dim, c.graph.dim);
      set_if(cds, c.graph.cds);
      set_if(sigma_weight, c.graph.sigma_weight);
      c.validate();
      cmd_graph(c, out_path);
    } else if (merge->parsed()) {
      set_if(kprime, c.fuse.kprime);
      set_if(norm, c.fuse.norm);
      set_if(merge_sigma, c.fuse.sigma_weight);
      set_if(target, c.fuse.target);
      set_if(splice, c.fuse.splice);
      set_if(graph_lang, c.fuse.graph_language);
      set_if(sgd_lr, c.fuse.sgd_lr);
      set_if(sgd_epochs, c.fuse.sgd_epochs);
      c.validate();
      const fs::path report =
          report_path ? fs::path(*report_path) : fs::path(out_path).parent_path() / "fuse_report.json";
      cmd_merge(c, glove_path, graph_path, out_path, report);
    } else if (sim->parsed()) {
      c.validate();
      cmd_eval_sim(c, emb_path, pairs_path, eval_out ? std::optional<fs::path>(*eval_out) : std::nullopt, out);
    } else if (classify->parsed() || nli->parsed()) {
      set_if(c_value, c.eval.c);
      set_if(gamma, c.eval.gamma);
      c.validate();
      cmd_eval_task(c, emb_path, data_path, nli->parsed(),
                    eval_out ? std::optional<fs::path>(*eval_out) : std::nullopt, out);
    } else if (correlate->parsed()) {
      cmd_correlate(reports_glob, deltas_path, eval_out ? std::optional<fs::path>(*eval_out) : std::nullopt, out);
    } else if (pipeline->parsed()) {
      if (!out_path.empty()) c.output = out_path;
      c.validate();
      cmd_pipeline(c, out);
    }
  } catch (const Error& e) {
    err << "embfuse: error: " << e.what() << '\n';
    return e.code() == "config" ? 2 : 1;
  } catch (const std::exception& e) {
    err << "embfuse: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace embfuse::cli
