#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "embfuse/eval/eval.hpp"
#include "embfuse/eval/svm.hpp"
#include "embfuse/random.hpp"
#include "expect_error.hpp"

namespace fs = std::filesystem;
using namespace embfuse;
using namespace embfuse::eval;
using corpus::Vocabulary;

namespace {

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("embfuse_eval_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

EmbeddingTable table(const std::vector<std::string>& words, std::vector<double> values, std::size_t dim) {
  std::vector<std::pair<std::string, std::uint64_t>> e;
  for (const auto& w : words) e.push_back({w, 1});
  return {Vocabulary::from_entries(e), DenseMatrix(words.size(), dim, std::move(values))};
}

std::vector<std::string> toks(std::initializer_list<const char*> list) { return {list.begin(), list.end()}; }

// Two Gaussian blobs centred at (-c, -c) and (c, c).
void blobs(std::size_t n, double c, Rng& rng, DenseMatrix& x, std::vector<std::uint32_t>& y) {
  x = DenseMatrix(n, 2);
  y.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = i % 2;
    const double centre = y[i] ? c : -c;
    x(i, 0) = centre + 0.3 * rng.normal();
    x(i, 1) = centre + 0.3 * rng.normal();
  }
}

double accuracy(const std::vector<std::uint32_t>& a, std::span<const std::uint32_t> b) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
  return static_cast<double>(hit) / a.size();
}

// Labelled sentences over a marker word per class plus shared noise words.
LabeledTextDataset marker_task(Rng& rng, std::size_t train, std::size_t test) {
  LabeledTextDataset ds;
  ds.label_names = {"neg", "pos"};
  const std::vector<std::string> noise{"the", "a", "of", "and", "to", "it"};
  for (auto [split, n] : {std::pair{"train", train}, std::pair{"test", test}}) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::uint32_t label = k % 2;
      std::string text;
      for (int w = 0; w < 4; ++w) text += noise[rng.below(noise.size())] + " ";
      text += label ? "great" : "awful";
      ds.splits[split].push_back({text, std::nullopt, label});
    }
  }
  return ds;
}

EmbeddingTable marker_table(Rng& rng) {
  std::vector<std::string> words{"the", "a", "of", "and", "to", "it", "great", "awful"};
  std::vector<double> v;
  for (std::size_t i = 0; i < 6 * 4; ++i) v.push_back(0.2 * rng.normal());
  for (double x : {3.0, 0.0, 0.0, 1.0, 0.0, 3.0, 1.0, 0.0}) v.push_back(x);
  return table(words, v, 4);
}

}  // namespace

TEST(F1, Examples) {
  const std::vector<std::uint32_t> gold{0, 0, 1, 1}, pred{0, 1, 0, 1};
  const auto s = f1_scores(pred, gold, 2);
  EXPECT_NEAR(s.per_class[0], 0.5, 1e-12);
  EXPECT_NEAR(s.per_class[1], 0.5, 1e-12);
  EXPECT_NEAR(s.macro, 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(macro_f1(gold, gold, 2), 1.0);

  const std::vector<std::uint32_t> zeros{0, 0, 0};
  EXPECT_NEAR(macro_f1(zeros, zeros, 2), 0.5, 1e-12);
  EXPECT_NEAR(macro_f1(zeros, zeros, 2, false), 1.0, 1e-12);
  EXPECT_ERROR_CODE(macro_f1(zeros, std::vector<std::uint32_t>{0, 0, 2}, 2), "shape");
}

TEST(F1, PerfectPredictionProperty) {
  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 2 + rng.below(6);
    std::vector<std::uint32_t> p;
    for (std::uint32_t c = 0; c < k; ++c) p.push_back(c);
    for (std::size_t i = 0; i < 20; ++i) p.push_back(static_cast<std::uint32_t>(rng.below(k)));
    EXPECT_DOUBLE_EQ(macro_f1(p, p, k), 1.0);
  }
}

TEST(WordPairs, CsvWithHeaderAndTsvWithout) {
  const auto dir = temp_dir("pairs");
  std::ofstream(dir / "a.csv") << "Word 1,Word 2,POS,Average Score\nold,new,A,1.5\ncat,dog,N,3\n";
  const auto a = load_word_pairs(dir / "a.csv");
  ASSERT_EQ(a.entries.size(), 2u);
  EXPECT_EQ(a.entries[1].word1, "cat");
  EXPECT_EQ(a.entries[1].score, 3.0);
  std::ofstream(dir / "b.tsv") << "x\ty\t0.5\nu\tv\t2\n";
  const auto b = load_word_pairs(dir / "b.tsv");
  EXPECT_EQ(b.entries[0].score, 0.5);
  std::ofstream(dir / "c.tsv") << "x\ty\t0.5\n";
  EXPECT_ERROR_CODE(load_word_pairs(dir / "c.tsv"), "dataset");
}

TEST(LabeledDataset, TsvJsonlAndDev) {
  const auto dir = temp_dir("labeled");
  std::ofstream(dir / "train.tsv") << "sentence\tcategory\nhello world\t10\nbye\t2\n";
  std::ofstream(dir / "dev.jsonl") << R"({"premise": "p", "hypothesis": "h", "label": 2})" << '\n';
  std::ofstream(dir / "test.jsonl") << R"({"text": "t", "label": "10"})" << '\n';
  const auto ds = load_labeled_dataset(dir);
  EXPECT_EQ(ds.label_names, (std::vector<std::string>{"2", "10"}));
  EXPECT_EQ(ds.split("train")[0].label, 1u);
  EXPECT_EQ(ds.split("validation")[0].text2.value(), "h");
  EXPECT_EQ(ds.split("test")[0].text, "t");
}

TEST(Features, SumsRows) {
  const auto t = table({"a", "b"}, {1, 0, 0, 2}, 2);
  EXPECT_EQ(embed_sentence(toks({"a", "b"}), t), (std::vector<double>{1, 2}));
  EXPECT_EQ(embed_sentence(toks({"a", "a"}), t), (std::vector<double>{2, 0}));
  OovStats stats;
  EXPECT_EQ(embed_sentence(toks({"x", "y"}), t, OovPolicy::zero_if_all_oov, &stats), (std::vector<double>{0, 0}));
  EXPECT_EQ(stats.all_oov_sentences, 1u);
  EXPECT_EQ(stats.oov_tokens, 2u);
  EXPECT_EQ(embed_pair(toks({"a"}), toks({"b"}), t), (std::vector<double>{1, 0, 0, 2}));
  EXPECT_EQ(embed_pair(toks({"b"}), toks({"a"}), t), (std::vector<double>{0, 2, 1, 0}));
}

TEST(Features, PermutationInvariant) {
  Rng rng(2);
  std::vector<std::string> words;
  std::vector<double> v;
  for (int i = 0; i < 10; ++i) {
    words.push_back("w" + std::to_string(i));
    for (int k = 0; k < 3; ++k) v.push_back(std::round(rng.normal() * 8) / 8);  // exact sums
  }
  const auto t = table(words, v, 3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> s;
    for (int k = 0; k < 8; ++k) s.push_back("w" + std::to_string(rng.below(12)));
    auto shuffled = s;
    rng.shuffle(std::span<std::string>(shuffled));
    EXPECT_EQ(embed_sentence(s, t), embed_sentence(shuffled, t));
  }
}

TEST(Similarity, ConstructedRanking) {
  const auto t = table({"a", "b", "c", "d"}, {1, 0, 1, 0, 0, 1, 0.6, 0.8}, 2);
  WordPairDataset ds{"toy", {{"a", "b", 1.0}, {"a", "c", 0.0}, {"a", "d", 0.5}, {"A", "zz", 0.3}}};
  const auto r = eval_similarity(t, ds);
  EXPECT_NEAR(r.spearman, 1.0, 1e-12);
  EXPECT_EQ(r.retained, 3u);
  EXPECT_EQ(r.dropped_oov, 1u);

  WordPairDataset flat{"flat", {{"a", "b", 1.0}, {"b", "a", 0.0}}};
  EXPECT_ERROR_CODE(eval_similarity(t, flat), "degenerate-ranks");
  WordPairDataset few{"few", {{"a", "b", 1.0}, {"a", "zz", 0.0}}};
  EXPECT_ERROR_CODE(eval_similarity(t, few), "too-few-pairs");
}

TEST(Similarity, ScaleInvariant) {
  Rng rng(3);
  std::vector<std::string> words;
  std::vector<double> v;
  for (int i = 0; i < 20; ++i) {
    words.push_back("w" + std::to_string(i));
    for (int k = 0; k < 5; ++k) v.push_back(rng.normal());
  }
  auto scaled = v;
  for (double& x : scaled) x *= 7.5;
  WordPairDataset ds{"r", {}};
  // Distinct words only: self-pairs have cosine 1 up to round-off, which
  // makes their tie pattern depend on the scale.
  for (int k = 0; k < 30; ++k) {
    const auto a = rng.below(20);
    const auto b = (a + 1 + rng.below(19)) % 20;
    ds.entries.push_back({words[a], words[b], rng.uniform()});
  }
  EXPECT_NEAR(eval_similarity(table(words, v, 5), ds).spearman, eval_similarity(table(words, scaled, 5), ds).spearman, 1e-12);
}

TEST(Svm, Xor) {
  const DenseMatrix x(4, 2, {0, 0, 1, 1, 0, 1, 1, 0});
  const std::vector<std::uint32_t> y{0, 0, 1, 1};
  const auto model = svm_train(x, y, 2);
  EXPECT_EQ(svm_predict(model, x), y);
  for (std::size_t m = 0; m < 2; ++m) EXPECT_LE(kkt_max_violation(model, m, x, y), 1e-3);
}

TEST(Svm, SeparableBlobs) {
  Rng rng(4);
  DenseMatrix x, xt;
  std::vector<std::uint32_t> y, yt;
  blobs(40, 3.0, rng, x, y);
  blobs(40, 3.0, rng, xt, yt);
  const auto model = svm_train(x, y, 2);
  EXPECT_DOUBLE_EQ(accuracy(svm_predict(model, xt), yt), 1.0);
  for (std::size_t m = 0; m < 2; ++m) EXPECT_LE(kkt_max_violation(model, m, x, y), 1e-3);
  EXPECT_TRUE(model.converged());
}

TEST(Svm, LargeCFitsTrainingSet) {
  Rng rng(5);
  DenseMatrix x(60, 3);
  std::vector<std::uint32_t> y(60);
  for (std::size_t i = 0; i < 60; ++i) {
    for (std::size_t k = 0; k < 3; ++k) x(i, k) = rng.normal();
    y[i] = x(i, 0) * x(i, 1) > 0 ? 1 : (x(i, 2) > 0.5 ? 2 : 0);
  }
  SvmConfig c;
  c.c = 1e4;
  const auto model = svm_train(x, y, 3, c);
  EXPECT_DOUBLE_EQ(accuracy(svm_predict(model, x), y), 1.0);
  for (std::size_t m = 0; m < 3; ++m) EXPECT_LE(kkt_max_violation(model, m, x, y), 1e-3);
}

TEST(Svm, PredictionProperties) {
  Rng rng(6);
  DenseMatrix x, xt;
  std::vector<std::uint32_t> y, yt;
  blobs(30, 2.0, rng, x, y);
  blobs(10, 2.0, rng, xt, yt);
  const auto model = svm_train(x, y, 2);
  for (std::size_t s = 0; s < model.support_rows.size(); ++s) {
    const auto r = model.support_rows[s];
    const DenseMatrix one(1, 2, std::vector<double>{x(r, 0), x(r, 1)});
    EXPECT_EQ(svm_predict(model, one)[0], y[r]);
  }
  DenseMatrix twice(2, 2, std::vector<double>{xt(0, 0), xt(0, 1), xt(0, 0), xt(0, 1)});
  const auto p = svm_predict(model, twice);
  EXPECT_EQ(p[0], p[1]);
  DenseMatrix reversed(xt.rows(), 2);
  for (std::size_t i = 0; i < xt.rows(); ++i)
    for (std::size_t k = 0; k < 2; ++k) reversed(i, k) = xt(xt.rows() - 1 - i, k);
  const auto fwd = decision_values(model, xt);
  const auto rev = decision_values(model, reversed, 3);
  for (std::size_t i = 0; i < xt.rows(); ++i)
    for (std::size_t m = 0; m < 2; ++m) EXPECT_EQ(fwd(i, m), rev(xt.rows() - 1 - i, m));
}

TEST(Svm, AbsentClassScoresMinusOneAndTiesGoLow) {
  const DenseMatrix x(4, 1, {0, 0.1, 5, 5.1});
  const std::vector<std::uint32_t> y{0, 0, 2, 2};
  const auto model = svm_train(x, y, 3);
  EXPECT_FALSE(model.machines[1].trained);
  EXPECT_EQ(decision_values(model, x)(0, 1), -1.0);
  EXPECT_EQ(svm_predict(model, x), y);
}

TEST(Svm, GammaScaleAndInputErrors) {
  const DenseMatrix x(2, 2, {0, 2, 0, 2});  // entries 0,2,0,2: var 1
  EXPECT_DOUBLE_EQ(scale_gamma(x), 0.5);
  EXPECT_DOUBLE_EQ(scale_gamma(DenseMatrix(3, 2, 1.0)), 1.0);
  EXPECT_EQ(parse_gamma_policy("scale"), GammaPolicy::scale);
  const std::vector<std::uint32_t> one{0, 0};
  EXPECT_ERROR_CODE(svm_train(x, one, 2), "svm-input");
  SvmConfig bad;
  bad.c = 0;
  EXPECT_ERROR_CODE(svm_train(x, std::vector<std::uint32_t>{0, 1}, 2, bad), "svm-input");
  EXPECT_ERROR_CODE(svm_train(DenseMatrix(2, 1, std::vector<double>{0, NAN}), std::vector<std::uint32_t>{0, 1}, 2), "svm-input");
}

TEST(Svm, CachedKernelMatchesFullKernel) {
  Rng rng(7);
  DenseMatrix x, xt;
  std::vector<std::uint32_t> y, yt;
  blobs(80, 1.0, rng, x, y);
  blobs(20, 1.0, rng, xt, yt);
  SvmConfig small;
  small.cache_mb = 0;
  const auto a = svm_train(x, y, 2);
  const auto b = svm_train(x, y, 2, small);
  EXPECT_EQ(svm_predict(a, xt), svm_predict(b, xt));
  const auto da = decision_values(a, xt), db = decision_values(b, xt);
  for (std::size_t i = 0; i < da.values().size(); ++i) EXPECT_NEAR(da.values()[i], db.values()[i], 1e-9);
}

TEST(Task, MarkerWordIsLearned) {
  Rng rng(8);
  const auto ds = marker_task(rng, 40, 40);
  const auto r = run_task(marker_table(rng), ds, TaskKind::classify);
  EXPECT_GE(r.macro_f1, 0.95);
  EXPECT_EQ(r.train_size, 40u);
  EXPECT_EQ(r.test_split, "test");
  EXPECT_TRUE(r.to_json().contains("per_class_f1"));
}

TEST(Task, ConstantFeaturesGiveBaseline) {
  Rng rng(9);
  const auto ds = marker_task(rng, 20, 20);
  const auto zero = table({"great", "awful"}, {0, 0, 0, 0}, 2);
  EXPECT_NEAR(run_task(zero, ds, TaskKind::classify).macro_f1, 1.0 / 3.0, 1e-12);
}

TEST(Task, CoverageMatchesRecount) {
  Rng rng(10);
  const auto ds = marker_task(rng, 20, 10);
  const auto t = table({"great", "the", "a"}, {1, 0, 0, 1, 1, 1}, 2);
  const auto r = run_task(t, ds, TaskKind::classify);
  std::size_t tokens = 0, known = 0;
  for (const char* split : {"train", "test"})
    for (const auto& ex : ds.split(split))
      for (const auto& tok : corpus::tokenize(ex.text)) {
        ++tokens;
        known += t.vocab().contains(tok);
      }
  EXPECT_EQ(r.oov.tokens, tokens);
  EXPECT_NEAR(r.coverage, static_cast<double>(known) / tokens, 1e-12);
}

TEST(Task, LabelNamesDoNotMatter) {
  Rng rng(11);
  auto ds = marker_task(rng, 30, 30);
  const auto t = marker_table(rng);
  const double base = run_task(t, ds, TaskKind::classify).macro_f1;
  for (auto& [name, split] : ds.splits)
    for (auto& ex : split) ex.label = 1 - ex.label;
  std::swap(ds.label_names[0], ds.label_names[1]);
  EXPECT_NEAR(run_task(t, ds, TaskKind::classify).macro_f1, base, 1e-12);
}

TEST(Task, NliUsesValidationAsTraining) {
  Rng rng(12);
  LabeledTextDataset ds;
  ds.label_names = {"entailment", "contradiction"};
  for (auto [split, n] : {std::pair{"validation", 40}, std::pair{"test", 20}})
    for (int k = 0; k < n; ++k) {
      const std::uint32_t label = k % 2;
      ds.splits[split].push_back({"the great", std::string(label ? "awful" : "great"), label});
    }
  ds.splits["train"] = {};
  const auto r = run_task(marker_table(rng), ds, TaskKind::nli);
  EXPECT_EQ(r.train_split, "validation");
  EXPECT_EQ(r.train_size, 40u);
  EXPECT_GE(r.macro_f1, 0.95);
}

TEST(Correlate, LinearAndConvex) {
  std::vector<ImprovementRecord> lin, cubic;
  for (int i = 1; i <= 6; ++i) {
    lin.push_back({"l" + std::to_string(i), 100.0 * i, 0.5 * i + 1});
    cubic.push_back({"c" + std::to_string(i), 1.0 * i, std::pow(i, 3.0)});
  }
  const auto a = correlate_improvement(lin);
  EXPECT_NEAR(a.pearson, 1.0, 1e-12);
  EXPECT_NEAR(a.spearman, 1.0, 1e-12);
  const auto b = correlate_improvement(cubic);
  EXPECT_NEAR(b.spearman, 1.0, 1e-12);
  EXPECT_LT(b.pearson, 1.0 - 1e-3);
  EXPECT_ERROR_CODE(correlate_improvement(std::span(lin).first(2)), "shape");
}
