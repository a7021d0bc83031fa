#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace embfuse::cli {

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct FileDigest {
  std::string path;
  std::uintmax_t bytes = 0;
  std::string sha256;
};

// Directories expand to every regular file inside them, sorted by name.
std::vector<FileDigest> digest_paths(const std::vector<std::filesystem::path>& paths);

// Provenance written beside the outputs of every artifact-producing command.
class RunManifest {
 public:
  RunManifest(std::string command, nlohmann::json config);

  void add_input(const std::filesystem::path& path) { inputs_.push_back(path); }
  void add_output(const std::filesystem::path& path) { outputs_.push_back(path); }
  void set_seed(const std::string& name, std::uint64_t seed) { seeds_[name] = seed; }
  void set(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }

  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::string command_;
  nlohmann::json config_;
  nlohmann::json seeds_ = nlohmann::json::object();
  nlohmann::json extra_ = nlohmann::json::object();
  std::vector<std::filesystem::path> inputs_;
  std::vector<std::filesystem::path> outputs_;
  std::chrono::system_clock::time_point started_;
  std::chrono::steady_clock::time_point clock_;
};

}  // namespace embfuse::cli
