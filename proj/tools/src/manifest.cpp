#include "manifest.hpp"

#include <algorithm>
#include <array>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "embfuse/error.hpp"
#include "embfuse/io.hpp"

#ifndef EMBFUSE_VERSION
#define EMBFUSE_VERSION "unknown"
#endif

namespace embfuse::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buffer{};
  while (in) {
    in.read(buffer.data(), buffer.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx, digest.data(), &length);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int k = 0; k < length; ++k) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
  }
  return hex.str();
}

std::vector<FileDigest> digest_paths(const std::vector<std::filesystem::path>& paths) {
  std::vector<FileDigest> out;
  for (const auto& p : paths) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(p)) {
      for (const auto& e : std::filesystem::directory_iterator(p)) {
        if (e.is_regular_file()) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(p);
    }
    for (const auto& f : files) {
      out.push_back({f.string(), std::filesystem::file_size(f), sha256_file(f)});
    }
  }
  return out;
}

RunManifest::RunManifest(std::string command, nlohmann::json config)
    : command_(std::move(command)),
      config_(std::move(config)),
      started_(std::chrono::system_clock::now()),
      clock_(std::chrono::steady_clock::now()) {}

nlohmann::json RunManifest::to_json() const {
  auto files = [](const std::vector<std::filesystem::path>& paths) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : digest_paths(paths)) {
      arr.push_back({{"path", d.path}, {"bytes", d.bytes}, {"sha256", d.sha256}});
    }
    return arr;
  };
  const std::time_t t = std::chrono::system_clock::to_time_t(started_);
  std::tm utc{};
  gmtime_r(&t, &utc);
  std::ostringstream when;
  when << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_).count();

  nlohmann::json j;
  j["command"] = command_;
  j["tool_version"] = EMBFUSE_VERSION;
  j["started_at"] = when.str();
  j["wall_seconds"] = seconds;
  j["config"] = config_;
  j["seeds"] = seeds_;
  j["inputs"] = files(inputs_);
  j["outputs"] = files(outputs_);
  for (const auto& [k, v] : extra_.items()) j[k] = v;
  return j;
}

void RunManifest::write(const std::filesystem::path& path) const {
  auto out = io::open_for_write(path);
  out << to_json().dump(2) << '\n';
}

}  // namespace embfuse::cli
