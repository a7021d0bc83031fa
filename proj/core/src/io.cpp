#include "embfuse/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>

#include "embfuse/error.hpp"

namespace embfuse::io {

namespace fs = std::filesystem;

LineReader::LineReader(const fs::path& path) : buffer_(1 << 16) {
  handle_ = gzopen(path.c_str(), "rb");
  if (handle_ == nullptr) {
    throw Error("io", "cannot open " + path.string());
  }
}

LineReader::~LineReader() { gzclose(static_cast<gzFile>(handle_)); }

bool LineReader::next(std::string& line) {
  line.clear();
  auto* file = static_cast<gzFile>(handle_);
  bool any = false;
  while (gzgets(file, buffer_.data(), static_cast<int>(buffer_.size())) != nullptr) {
    any = true;
    line.append(buffer_.data());
    if (!line.empty() && line.back() == '\n') break;
  }
  if (!any) {
    int err = 0;
    const char* msg = gzerror(file, &err);
    if (err != Z_OK && err != Z_STREAM_END) throw Error("io", msg);
    return false;
  }
  if (!line.empty() && line.back() == '\n') line.pop_back();
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++line_number_;
  return true;
}

std::vector<std::string> read_lines(const fs::path& path) {
  LineReader reader(path);
  std::vector<std::string> lines;
  std::string line;
  while (reader.next(line)) lines.push_back(line);
  return lines;
}

namespace {

bool glob_match(std::string_view pattern, std::string_view name) {
  std::size_t p = 0, n = 0, star = std::string_view::npos, mark = 0;
  while (n < name.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
      ++p;
      ++n;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = n;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      n = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

}  // namespace

std::vector<fs::path> expand_glob(const std::string& pattern) {
  fs::path as_path(pattern);
  std::string leaf = as_path.filename().string();
  if (leaf.find_first_of("*?") == std::string::npos) {
    if (!fs::exists(as_path)) throw Error("io", "no such file: " + pattern);
    return {as_path};
  }
  fs::path dir = as_path.has_parent_path() ? as_path.parent_path() : fs::path(".");
  std::vector<fs::path> out;
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && glob_match(leaf, entry.path().filename().string())) {
        out.push_back(entry.path());
      }
    }
  }
  if (out.empty()) throw Error("io", "pattern matched no files: " + pattern);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little,
                "binary formats assume a little-endian host");
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.write(bytes, sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  char bytes[sizeof(T)];
  if (!in.read(bytes, sizeof(T))) throw Error("io", "unexpected end of binary stream");
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_u32(std::ostream& out, std::uint32_t v) { write_le(out, v); }
void write_u64(std::ostream& out, std::uint64_t v) { write_le(out, v); }
void write_f32(std::ostream& out, float v) { write_le(out, v); }
void write_f64(std::ostream& out, double v) { write_le(out, v); }
std::uint32_t read_u32(std::istream& in) { return read_le<std::uint32_t>(in); }
std::uint64_t read_u64(std::istream& in) { return read_le<std::uint64_t>(in); }
float read_f32(std::istream& in) { return read_le<float>(in); }
double read_f64(std::istream& in) { return read_le<double>(in); }

std::ofstream open_for_write(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io", "cannot write " + path.string());
  return out;
}

std::ifstream open_for_read(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + path.string());
  return in;
}

}  // namespace embfuse::io
