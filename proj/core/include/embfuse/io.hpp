#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace embfuse::io {

// Reads text line by line from a plain or gzip-compressed file. Compression
// is detected from the stream contents, not the file name.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path);
  ~LineReader();
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  // Strips the trailing "\n" / "\r\n". Returns false at end of input.
  bool next(std::string& line);

  std::uint64_t line_number() const noexcept { return line_number_; }

 private:
  void* handle_;
  std::vector<char> buffer_;
  std::uint64_t line_number_ = 0;
};

std::vector<std::string> read_lines(const std::filesystem::path& path);

// Expands a simple glob ("dir/*.txt", "a.txt") into a sorted file list.
// Only the final path component may contain '*' or '?'.
std::vector<std::filesystem::path> expand_glob(const std::string& pattern);

// Little-endian primitive encoding shared by the binary formats.
void write_u32(std::ostream& out, std::uint32_t value);
void write_u64(std::ostream& out, std::uint64_t value);
void write_f32(std::ostream& out, float value);
void write_f64(std::ostream& out, double value);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
float read_f32(std::istream& in);
double read_f64(std::istream& in);

std::ofstream open_for_write(const std::filesystem::path& path);
std::ifstream open_for_read(const std::filesystem::path& path);

}  // namespace embfuse::io
