#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace embfuse::corpus {

enum class TokenScheme {
  whitespace,     // split on Unicode white space, keep everything else
  word_boundary,  // simplified Unicode word segmentation; drops punctuation
};

struct TokenizerConfig {
  TokenScheme scheme = TokenScheme::word_boundary;
  bool lowercase = true;
};

TokenScheme parse_token_scheme(std::string_view name);
std::string to_string(TokenScheme scheme);

// Throws Error("malformed-encoding") naming the byte offset of the first
// invalid UTF-8 sequence.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config = {});

// Validates UTF-8 and decodes it to code points.
std::u32string decode_utf8(std::string_view text);
void append_utf8(std::string& out, char32_t cp);

// Simple one-to-one lowercase mapping for Latin, Greek, Cyrillic and
// Armenian scripts; other code points map to themselves.
char32_t to_lower(char32_t cp) noexcept;
std::string to_lower_utf8(std::string_view text);

}  // namespace embfuse::corpus
