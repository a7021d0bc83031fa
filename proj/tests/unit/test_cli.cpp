#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "embfuse/error.hpp"
#include "embfuse/glove/embedding_table.hpp"
#include "expect_error.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using namespace embfuse;
using namespace embfuse::cli;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "embfuse");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("embfuse_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

const fs::path kToy = EMBFUSE_TOY_CONFIG;

}  // namespace

TEST(Config, EmptyGivesDefaults) {
  const auto c = parse_config("");
  EXPECT_EQ(c, Config{});
  EXPECT_EQ(c.glove.dim, 300u);
  EXPECT_EQ(c.glove.x_max, 100.0);
  EXPECT_EQ(c.glove.alpha, 0.75);
  EXPECT_EQ(c.corpus.window, 10u);
  EXPECT_EQ(c.corpus.min_count, "auto");
  EXPECT_EQ(c.graph.cds, 0.75);
  EXPECT_EQ(c.eval.c, 1.0);
}

TEST(Config, TypeErrorNamesKey) {
  try {
    parse_config("glove:\n  alpha: \"x\"\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "config");
    EXPECT_NE(std::string(e.what()).find("alpha"), std::string::npos) << e.what();
  }
}

TEST(Config, UnknownKeyRejected) {
  try {
    parse_config("glove:\n  dimension: 3\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("glove.dimension"), std::string::npos) << e.what();
  }
  EXPECT_ERROR_CODE(parse_config("fuse:\n  kprime: 0\n"), "config");
}

TEST(Config, RelativePathsAndJsonRoundTrip) {
  const auto c = parse_config("corpus:\n  input: [\"data/*.txt\"]\ngraph:\n  dump: g.tsv\n  languages: [sw]\n", "/base");
  EXPECT_EQ(c.corpus.input, (std::vector<std::string>{"/base/data/*.txt"}));
  EXPECT_EQ(c.graph.dump, "/base/g.tsv");
  EXPECT_EQ(parse_config(to_json(c).dump()), c);
  const auto toy = load_config(kToy);
  EXPECT_EQ(parse_config(to_json(toy).dump()), toy);
}

TEST(Config, ThreadsFromEnvironment) {
  ::setenv("EMBFUSE_THREADS", "3", 1);
  EXPECT_EQ(default_threads(1), 3u);
  ::setenv("EMBFUSE_THREADS", "nonsense", 1);
  EXPECT_EQ(default_threads(2), 2u);
  ::unsetenv("EMBFUSE_THREADS");
  EXPECT_EQ(default_threads(5), 5u);
}

TEST(Cli, HelpAndUsageErrors) {
  const auto help = invoke({"glove", "--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE((help.out + help.err).find("--vocab"), std::string::npos);

  const auto missing = invoke({"glove", "--cooc", "x", "--out", "y"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("--vocab"), std::string::npos) << missing.err;

  EXPECT_EQ(invoke({"no-such-command"}).code, 2);
  EXPECT_EQ(invoke({}).code, 2);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const auto dir = temp_dir("badcfg");
  std::ofstream(dir / "bad.yaml") << "glove:\n  alpha: \"x\"\n";
  const auto r = invoke({"vocab", "--config", (dir / "bad.yaml").string(), "--out", (dir / "v.tsv").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("glove.alpha"), std::string::npos) << r.err;
}

TEST(Cli, RuntimeErrorsExitOne) {
  const auto dir = temp_dir("runtime");
  const auto r = invoke({"eval-sim", "--emb", (dir / "missing.bin").string(), "--pairs", (dir / "p.tsv").string()});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, ThreadPrecedenceAndManifestReparse) {
  const auto dir = temp_dir("manifest");
  const auto out = dir / "vocab.tsv";
  ::setenv("EMBFUSE_THREADS", "2", 1);
  ASSERT_EQ(invoke({"vocab", "--config", kToy.string(), "--out", out.string()}).code, 0);
  auto m = read_json(dir / "vocab.tsv.manifest.json");
  EXPECT_EQ(m["config"]["threads"].get<std::size_t>(), 2u);
  ASSERT_EQ(invoke({"vocab", "--config", kToy.string(), "--threads", "3", "--out", out.string()}).code, 0);
  m = read_json(dir / "vocab.tsv.manifest.json");
  EXPECT_EQ(m["config"]["threads"].get<std::size_t>(), 3u);
  ::unsetenv("EMBFUSE_THREADS");

  auto expected = load_config(kToy);
  expected.threads = 3;
  EXPECT_EQ(parse_config(m["config"].dump()), expected);
  EXPECT_EQ(m["command"], "vocab");
  ASSERT_FALSE(m["inputs"].empty());
  EXPECT_EQ(m["outputs"][0]["sha256"].get<std::string>().size(), 64u);
  EXPECT_TRUE(m.contains("seeds"));
  EXPECT_TRUE(m.contains("tool_version"));
}

TEST(Manifest, Sha256KnownVector) {
  const auto dir = temp_dir("sha");
  std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
  EXPECT_EQ(sha256_file(dir / "abc.txt"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, PipelineMatchesStageByStage) {
  const auto dir = temp_dir("pipeline");
  const auto toy = kToy.string();
  const auto r = invoke({"pipeline", "--config", toy, "--threads", "1", "--out", (dir / "p").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"vocab.tsv", "glove.bin", "graph.bin", "fused.bin", "fuse_report.json", "eval_report.json",
                        "manifest.json"})
    EXPECT_TRUE(fs::exists(dir / "p" / f)) << f;
  const auto report = read_json(dir / "p" / "eval_report.json");
  for (const char* task : {"sim", "classify", "nli"}) {
    ASSERT_TRUE(report.contains(task)) << task;
    EXPECT_TRUE(report[task].contains("delta"));
  }
  const auto fused = load_embeddings(dir / "p" / "fused.bin");
  EXPECT_EQ(fused.size(), load_embeddings(dir / "p" / "glove.bin").size());

  const auto s = dir / "s";
  auto step = [&](std::vector<std::string> args) {
    args.insert(args.begin() + 1, {"--config", toy, "--threads", "1"});
    const auto o = invoke(args);
    ASSERT_EQ(o.code, 0) << args[0] << ": " << o.err;
  };
  step({"vocab", "--out", (s / "vocab.tsv").string()});
  step({"cooccur", "--vocab", (s / "vocab.tsv").string(), "--out", (s / "cooc").string()});
  step({"glove", "--cooc", (s / "cooc").string(), "--vocab", (s / "vocab.tsv").string(), "--out", (s / "glove.bin").string()});
  step({"graph-ppmi", "--out", (s / "graph.bin").string()});
  step({"merge", "--glove", (s / "glove.bin").string(), "--graph", (s / "graph.bin").string(), "--out",
        (s / "fused.bin").string(), "--report", (s / "fuse_report.json").string()});
  for (const char* f : {"vocab.tsv", "glove.bin", "graph.bin", "fused.bin"})
    EXPECT_EQ(slurp(dir / "p" / f), slurp(s / f)) << f;

  const auto sim = invoke({"eval-sim", "--emb", (s / "fused.bin").string(), "--pairs",
                        (kToy.parent_path() / "toy" / "pairs.tsv").string()});
  ASSERT_EQ(sim.code, 0) << sim.err;
  EXPECT_EQ(nlohmann::json::parse(sim.out)["spearman"], report["sim"]["fused"]);
}
