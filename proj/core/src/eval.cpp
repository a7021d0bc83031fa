#include "embfuse/eval/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "embfuse/error.hpp"
#include "embfuse/io.hpp"
#include "embfuse/numerics/stats.hpp"

namespace embfuse::eval {

namespace {

std::optional<double> parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '"')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '"')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

// Splits one delimited line; double quotes group fields and "" escapes a quote.
std::vector<std::string> split_fields(std::string_view line, char sep) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (ch == '"' && sep == ',') {
      if (quoted && k + 1 < line.size() && line[k + 1] == '"') {
        fields.back().push_back('"');
        ++k;
      } else {
        quoted = !quoted;
      }
    } else if (ch == sep && !quoted) {
      fields.emplace_back();
    } else {
      fields.back().push_back(ch);
    }
  }
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::string lower_ascii(std::string s) {
  for (char& ch : s)
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  return s;
}

std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                       std::initializer_list<std::string_view> names) {
  for (auto name : names) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (lower_ascii(trim(header[c])) == name) return c;
    }
  }
  return std::nullopt;
}

std::optional<std::span<const double>> lookup_word(const EmbeddingTable& table, const std::string& word) {
  if (auto row = table.find(word)) return row;
  const auto lowered = corpus::to_lower_utf8(word);
  if (lowered != word) return table.find(lowered);
  return std::nullopt;
}

struct RawExample {
  std::string text;
  std::optional<std::string> text2;
  std::string label;
};

std::vector<RawExample> read_tsv_split(const std::filesystem::path& path) {
  io::LineReader reader(path);
  std::string line;
  if (!reader.next(line)) throw Error("dataset", path.string() + " is empty");
  const auto header = split_fields(line, '\t');
  const auto text = find_column(header, {"text", "sentence", "premise", "sentence1"});
  const auto text2 = find_column(header, {"text2", "hypothesis", "sentence2"});
  const auto label = find_column(header, {"label", "category"});
  if (!text || !label) {
    throw Error("dataset", path.string() + ": header needs a text column and a label column");
  }
  std::vector<RawExample> out;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto fields = split_fields(line, '\t');
    const std::size_t need = std::max({*text, *label, text2.value_or(0)}) + 1;
    if (fields.size() < need) {
      throw Error("dataset", path.string() + ":" + std::to_string(reader.line_number()) +
                                 ": expected at least " + std::to_string(need) + " columns");
    }
    RawExample ex{fields[*text], std::nullopt, trim(fields[*label])};
    if (text2) ex.text2 = fields[*text2];
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<RawExample> read_jsonl_split(const std::filesystem::path& path) {
  io::LineReader reader(path);
  std::string line;
  std::vector<RawExample> out;
  auto pick = [](const nlohmann::json& j, std::initializer_list<const char*> keys) -> const nlohmann::json* {
    for (const char* k : keys) {
      if (auto it = j.find(k); it != j.end()) return &*it;
    }
    return nullptr;
  };
  auto as_text = [](const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  };
  while (reader.next(line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    const std::string where = path.string() + ":" + std::to_string(reader.line_number());
    if (j.is_discarded() || !j.is_object()) throw Error("dataset", where + ": not a JSON object");
    const auto* text = pick(j, {"text", "sentence", "premise", "sentence1"});
    const auto* text2 = pick(j, {"text2", "hypothesis", "sentence2"});
    const auto* label = pick(j, {"label", "category"});
    if (!text || !label) throw Error("dataset", where + ": needs text and label fields");
    RawExample ex{as_text(*text), std::nullopt, as_text(*label)};
    if (text2) ex.text2 = as_text(*text2);
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<std::vector<double>> featurize(const std::vector<LabeledExample>& split, TaskKind task,
                                           const EmbeddingTable& table,
                                           const corpus::TokenizerConfig& tokenizer, OovPolicy policy,
                                           OovStats& stats) {
  std::vector<std::vector<double>> rows;
  rows.reserve(split.size());
  for (const auto& ex : split) {
    const auto a = corpus::tokenize(ex.text, tokenizer);
    if (task == TaskKind::nli) {
      const auto b = corpus::tokenize(ex.text2.value_or(""), tokenizer);
      rows.push_back(embed_pair(a, b, table, policy, &stats));
    } else {
      rows.push_back(embed_sentence(a, table, policy, &stats));
    }
  }
  return rows;
}

DenseMatrix to_matrix(const std::vector<std::vector<double>>& rows, std::size_t width) {
  DenseMatrix m(rows.size(), width);
  for (std::size_t r = 0; r < rows.size(); ++r) std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  return m;
}

}  // namespace

F1Scores f1_scores(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> gold,
                   std::size_t n_classes, bool include_absent) {
  if (pred.size() != gold.size() || pred.empty()) {
    throw Error("shape", "prediction and gold label lists must have the same nonzero length");
  }
  std::vector<std::size_t> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
  for (std::size_t k = 0; k < pred.size(); ++k) {
    if (pred[k] >= n_classes || gold[k] >= n_classes) throw Error("shape", "label out of range");
    if (pred[k] == gold[k]) {
      ++tp[pred[k]];
    } else {
      ++fp[pred[k]];
      ++fn[gold[k]];
    }
  }
  F1Scores out;
  out.per_class.assign(n_classes, 0.0);
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    const std::size_t denom = 2 * tp[c] + fp[c] + fn[c];
    if (denom == 0) {
      if (include_absent) ++counted;
      continue;
    }
    out.per_class[c] = 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
    sum += out.per_class[c];
    ++counted;
  }
  out.macro = counted ? sum / static_cast<double>(counted) : 0.0;
  return out;
}

double macro_f1(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> gold,
                std::size_t n_classes, bool include_absent) {
  return f1_scores(pred, gold, n_classes, include_absent).macro;
}

WordPairDataset load_word_pairs(const std::filesystem::path& path) {
  WordPairDataset ds;
  ds.name = path.stem().string();
  io::LineReader reader(path);
  std::string line;
  std::size_t w1 = 0, w2 = 1, sc = 2;
  bool first = true;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const char sep = line.find('\t') != std::string::npos ? '\t' : ',';
    const auto fields = split_fields(line, sep);
    if (first) {
      first = false;
      const bool numeric = fields.size() > sc && parse_double(fields[sc]).has_value();
      if (!numeric) {
        w1 = find_column(fields, {"word1", "word 1", "word_1", "w1"}).value_or(0);
        w2 = find_column(fields, {"word2", "word 2", "word_2", "w2"}).value_or(1);
        sc = find_column(fields, {"score", "average score", "average_score", "gold", "similarity",
                                  "sim", "mean"})
                 .value_or(2);
        continue;
      }
    }
    const std::string where = path.string() + ":" + std::to_string(reader.line_number());
    if (fields.size() <= std::max({w1, w2, sc})) throw Error("dataset", where + ": too few columns");
    const auto score = parse_double(fields[sc]);
    if (!score || !std::isfinite(*score)) throw Error("dataset", where + ": score is not a finite number");
    ds.entries.push_back({trim(fields[w1]), trim(fields[w2]), *score});
  }
  if (ds.entries.size() < 2) throw Error("dataset", path.string() + ": needs at least 2 word pairs");
  return ds;
}

const std::vector<LabeledExample>& LabeledTextDataset::split(const std::string& name) const {
  auto it = splits.find(name);
  if (it == splits.end() || it->second.empty()) throw Error("dataset", "split '" + name + "' is missing or empty");
  return it->second;
}

LabeledTextDataset load_labeled_dataset(const std::filesystem::path& dir) {
  std::map<std::string, std::vector<RawExample>> raw;
  for (const char* name : {"train", "validation", "dev", "test"}) {
    const std::string key = std::string(name) == "dev" ? "validation" : name;
    for (const char* ext : {".tsv", ".jsonl", ".tsv.gz", ".jsonl.gz"}) {
      const auto path = dir / (std::string(name) + ext);
      if (!std::filesystem::exists(path) || raw.contains(key)) continue;
      raw[key] = std::string(ext).starts_with(".tsv") ? read_tsv_split(path) : read_jsonl_split(path);
    }
  }
  if (raw.empty()) throw Error("dataset", dir.string() + " holds no train/validation/test file");

  std::set<std::string> names;
  for (const auto& [_, examples] : raw)
    for (const auto& ex : examples) names.insert(ex.label);
  LabeledTextDataset ds;
  ds.label_names.assign(names.begin(), names.end());
  const bool numeric = std::all_of(names.begin(), names.end(), [](const std::string& s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size();
  });
  if (numeric) {
    std::sort(ds.label_names.begin(), ds.label_names.end(),
              [](const std::string& a, const std::string& b) { return std::stoll(a) < std::stoll(b); });
  }
  std::map<std::string, std::uint32_t> id;
  for (std::size_t k = 0; k < ds.label_names.size(); ++k) id[ds.label_names[k]] = static_cast<std::uint32_t>(k);
  for (auto& [split, examples] : raw) {
    auto& out = ds.splits[split];
    for (auto& ex : examples) out.push_back({std::move(ex.text), std::move(ex.text2), id.at(ex.label)});
  }
  return ds;
}

std::vector<double> embed_sentence(std::span<const std::string> tokens, const EmbeddingTable& table,
                                   OovPolicy policy, OovStats* stats) {
  std::vector<double> out(table.dim(), 0.0);
  std::size_t known = 0;
  for (const auto& tok : tokens) {
    auto row = table.find(tok);
    if (!row) continue;
    ++known;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += (*row)[k];
  }
  if (stats) {
    stats->tokens += tokens.size();
    stats->oov_tokens += tokens.size() - known;
    ++stats->sentences;
    if (known == 0 && policy == OovPolicy::zero_if_all_oov) ++stats->all_oov_sentences;
  }
  return out;
}

std::vector<double> embed_pair(std::span<const std::string> premise,
                               std::span<const std::string> hypothesis, const EmbeddingTable& table,
                               OovPolicy policy, OovStats* stats) {
  auto out = embed_sentence(premise, table, policy, stats);
  const auto second = embed_sentence(hypothesis, table, policy, stats);
  out.insert(out.end(), second.begin(), second.end());
  return out;
}

nlohmann::json SimilarityResult::to_json() const {
  return {{"spearman", spearman}, {"pairs", pairs}, {"retained", retained}, {"dropped_oov", dropped_oov}};
}

SimilarityResult eval_similarity(const EmbeddingTable& table, const WordPairDataset& ds) {
  SimilarityResult out;
  out.pairs = ds.entries.size();
  std::vector<double> gold;
  for (const auto& p : ds.entries) {
    auto a = lookup_word(table, p.word1);
    auto b = lookup_word(table, p.word2);
    if (!a || !b) {
      ++out.dropped_oov;
      continue;
    }
    out.predicted.push_back(numerics::cosine(*a, *b));
    gold.push_back(p.score);
  }
  out.retained = gold.size();
  if (out.retained < 2) {
    throw Error("too-few-pairs", std::to_string(out.retained) + " of " + std::to_string(out.pairs) +
                                     " pairs are fully in vocabulary");
  }
  out.spearman = numerics::spearman(out.predicted, gold);
  return out;
}

nlohmann::json TaskReport::to_json() const {
  nlohmann::json j;
  j["task"] = task == TaskKind::classify ? "classify" : "nli";
  j["train_split"] = train_split;
  j["test_split"] = test_split;
  j["train_size"] = train_size;
  j["test_size"] = test_size;
  j["macro_f1"] = macro_f1;
  nlohmann::json per_class = nlohmann::json::object();
  for (std::size_t c = 0; c < label_names.size(); ++c) per_class[label_names[c]] = per_class_f1[c];
  j["per_class_f1"] = per_class;
  j["oov"] = {{"tokens", oov.tokens},
              {"oov_tokens", oov.oov_tokens},
              {"oov_rate", oov.oov_rate()},
              {"sentences", oov.sentences},
              {"all_oov_sentences", oov.all_oov_sentences}};
  j["coverage"] = coverage;
  j["svm"] = {{"C", c}, {"gamma", gamma}, {"converged", svm_converged}};
  return j;
}

TaskReport run_task(const EmbeddingTable& table, const LabeledTextDataset& ds, TaskKind task,
                    const SvmConfig& svm, const corpus::TokenizerConfig& tokenizer, OovPolicy policy) {
  TaskReport report;
  report.task = task;
  report.train_split = task == TaskKind::classify ? "train" : "validation";
  report.test_split = "test";
  const auto& train = ds.split(report.train_split);
  const auto& test = ds.split(report.test_split);
  const std::size_t width = task == TaskKind::nli ? 2 * table.dim() : table.dim();

  const auto x_train = to_matrix(featurize(train, task, table, tokenizer, policy, report.oov), width);
  const auto x_test = to_matrix(featurize(test, task, table, tokenizer, policy, report.oov), width);
  std::vector<std::uint32_t> y_train, y_test;
  for (const auto& ex : train) y_train.push_back(ex.label);
  for (const auto& ex : test) y_test.push_back(ex.label);

  const auto model = svm_train(x_train, y_train, ds.label_names.size(), svm);
  const auto pred = svm_predict(model, x_test, svm.threads);
  const auto f1 = f1_scores(pred, y_test, ds.label_names.size());

  report.train_size = train.size();
  report.test_size = test.size();
  report.macro_f1 = f1.macro;
  report.per_class_f1 = f1.per_class;
  report.label_names = ds.label_names;
  report.coverage = report.oov.tokens ? 1.0 - report.oov.oov_rate() : 0.0;
  report.gamma = model.gamma;
  report.c = model.c;
  report.svm_converged = model.converged();
  return report;
}

CorrelationResult correlate_improvement(std::span<const ImprovementRecord> records) {
  if (records.size() < 3) throw Error("shape", "correlation needs at least 3 records");
  std::vector<double> counts, gains;
  for (const auto& r : records) {
    counts.push_back(r.common_vocab);
    gains.push_back(r.improvement);
  }
  return {numerics::pearson(counts, gains), numerics::spearman(counts, gains), records.size()};
}

}  // namespace embfuse::eval
