#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"

namespace embfuse::cli {

namespace fs = std::filesystem;

// One function per stage. Each writes its outputs and a RunManifest beside
// them; `pipeline` chains the same functions through the same files.
void cmd_vocab(const Config& c, const fs::path& out);
void cmd_cooccur(const Config& c, const fs::path& vocab, const fs::path& out_dir);
void cmd_glove(const Config& c, const fs::path& cooc, const fs::path& vocab, const fs::path& out);
void cmd_graph(const Config& c, const fs::path& out);
void cmd_merge(const Config& c, const fs::path& glove, const fs::path& graph, const fs::path& out,
               const fs::path& report);
// The eval commands print their JSON report and write it to `out` when set.
void cmd_eval_sim(const Config& c, const fs::path& emb, const fs::path& pairs,
                  const std::optional<fs::path>& out, std::ostream& log);
void cmd_eval_task(const Config& c, const fs::path& emb, const fs::path& data, bool nli,
                   const std::optional<fs::path>& out, std::ostream& log);
void cmd_correlate(const std::string& reports_glob, const fs::path& deltas,
                   const std::optional<fs::path>& out, std::ostream& log);
// corpus -> vocab -> cooccur -> glove -> graph -> merge -> eval, inside c.output.
void cmd_pipeline(const Config& c, std::ostream& log);

// Full command-line entry point. Returns the process exit code: 0 on
// success, 2 for usage and configuration errors, 1 for anything else.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace embfuse::cli
