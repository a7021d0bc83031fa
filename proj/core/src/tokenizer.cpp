#include "embfuse/corpus/tokenizer.hpp"

#include "embfuse/error.hpp"

namespace embfuse::corpus {

namespace {

enum class CharClass { space, letter, digit, mid_letter, mid_num, mid_both, other };

bool in(char32_t cp, char32_t lo, char32_t hi) noexcept { return cp >= lo && cp <= hi; }

bool is_space(char32_t cp) noexcept {
  return cp == ' ' || in(cp, 0x09, 0x0D) || cp == 0x85 || cp == 0xA0 || cp == 0x1680 ||
         in(cp, 0x2000, 0x200A) || cp == 0x2028 || cp == 0x2029 || cp == 0x202F ||
         cp == 0x205F || cp == 0x3000 || cp == 0xFEFF;
}

bool is_digit(char32_t cp) noexcept {
  return in(cp, '0', '9') || in(cp, 0x0660, 0x0669) || in(cp, 0x06F0, 0x06F9) ||
         in(cp, 0x0966, 0x096F) || in(cp, 0x09E6, 0x09EF) || in(cp, 0xFF10, 0xFF19);
}

// Punctuation, symbols, and controls: never part of a word.
bool is_non_word(char32_t cp) noexcept {
  if (cp < 0x80) {
    return !((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9') ||
             cp == '_');
  }
  if (in(cp, 0x80, 0xBF)) {
    return !(cp == 0xAA || cp == 0xB5 || cp == 0xBA || cp == 0xB2 || cp == 0xB3 || cp == 0xB9 ||
             in(cp, 0xBC, 0xBE));
  }
  return cp == 0xD7 || cp == 0xF7 || cp == 0x037E || cp == 0x0387 || cp == 0x0589 ||
         cp == 0x05BE || cp == 0x05C0 || cp == 0x05C3 || cp == 0x05C6 || cp == 0x060C ||
         cp == 0x061B || cp == 0x061F || in(cp, 0x066A, 0x066D) || cp == 0x06D4 ||
         cp == 0x0964 || cp == 0x0965 || cp == 0x0E4F || cp == 0x0E5A || cp == 0x0E5B ||
         cp == 0x10FB || in(cp, 0x1361, 0x1368) || cp == 0x166D || cp == 0x166E ||
         in(cp, 0x2000, 0x206F) || in(cp, 0x20A0, 0x20CF) || in(cp, 0x2190, 0x2BFF) ||
         in(cp, 0x3000, 0x303F) || in(cp, 0xFE30, 0xFE4F) || in(cp, 0xFE50, 0xFE6F) ||
         in(cp, 0xFF01, 0xFF0F) || in(cp, 0xFF1A, 0xFF20) || in(cp, 0xFF3B, 0xFF40) ||
         in(cp, 0xFF5B, 0xFF65) || in(cp, 0x1F000, 0x1FAFF);
}

CharClass classify(char32_t cp) noexcept {
  if (is_space(cp)) return CharClass::space;
  // Characters that may sit inside a word when flanked by word characters.
  switch (cp) {
    case '\'':
    case 0x2019:  // right single quotation mark
    case '.':
    case 0x2024:
    case 0xFF0E:
      return CharClass::mid_both;
    case 0xB7:
    case 0x05F4:  // Hebrew gershayim
    case 0x2027:
      return CharClass::mid_letter;
    case ',':
    case ';':
    case 0x066C:
      return CharClass::mid_num;
    default:
      break;
  }
  if (is_digit(cp)) return CharClass::digit;
  if (is_non_word(cp)) return CharClass::other;
  return CharClass::letter;
}

bool is_word(CharClass c) noexcept { return c == CharClass::letter || c == CharClass::digit; }

bool joins(CharClass mid, CharClass before, CharClass after) noexcept {
  switch (mid) {
    case CharClass::mid_both:
      return (before == CharClass::letter && after == CharClass::letter) ||
             (before == CharClass::digit && after == CharClass::digit);
    case CharClass::mid_letter:
      return before == CharClass::letter && after == CharClass::letter;
    case CharClass::mid_num:
      return before == CharClass::digit && after == CharClass::digit;
    default:
      return false;
  }
}

}  // namespace

TokenScheme parse_token_scheme(std::string_view name) {
  if (name == "whitespace") return TokenScheme::whitespace;
  if (name == "unicode-word-boundary" || name == "word-boundary") return TokenScheme::word_boundary;
  throw Error("config", "unknown tokenizer scheme '" + std::string(name) + "'");
}

std::string to_string(TokenScheme scheme) {
  return scheme == TokenScheme::whitespace ? "whitespace" : "unicode-word-boundary";
}

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  const auto* bytes = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  std::size_t i = 0;
  auto fail = [&](std::size_t at) -> void {
    throw Error("malformed-encoding", "invalid UTF-8 at byte offset " + std::to_string(at));
  };
  while (i < n) {
    const unsigned char b0 = bytes[i];
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    std::size_t len;
    char32_t cp;
    char32_t min;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2, cp = b0 & 0x1F, min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3, cp = b0 & 0x0F, min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4, cp = b0 & 0x07, min = 0x10000;
    } else {
      fail(i);
      return out;
    }
    if (i + len > n) fail(i);
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char b = bytes[i + k];
      if ((b & 0xC0) != 0x80) fail(i);
      cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || in(cp, 0xD800, 0xDFFF)) fail(i);
    out.push_back(cp);
    i += len;
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

char32_t to_lower(char32_t cp) noexcept {
  if (in(cp, 'A', 'Z')) return cp + 32;
  if (cp < 0xC0) return cp;
  if (in(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 32;
  if (in(cp, 0x100, 0x137) || in(cp, 0x14A, 0x177)) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp == 0x130) return 'i';
  if (in(cp, 0x139, 0x148) || in(cp, 0x179, 0x17E)) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp == 0x178) return 0xFF;
  if (in(cp, 0x391, 0x3AB) && cp != 0x3A2) return cp + 32;
  if (cp == 0x386) return 0x3AC;
  if (in(cp, 0x388, 0x38A)) return cp + 37;
  if (cp == 0x38C) return 0x3CC;
  if (cp == 0x38E || cp == 0x38F) return cp + 63;
  if (in(cp, 0x400, 0x40F)) return cp + 80;
  if (in(cp, 0x410, 0x42F)) return cp + 32;
  if (in(cp, 0x460, 0x481) || in(cp, 0x48A, 0x4BF) || in(cp, 0x4D0, 0x52F))
    return (cp % 2 == 0) ? cp + 1 : cp;
  if (in(cp, 0x531, 0x556)) return cp + 48;
  if (in(cp, 0x1E00, 0x1E95) || in(cp, 0x1EA0, 0x1EFF)) return (cp % 2 == 0) ? cp + 1 : cp;
  return cp;
}

std::string to_lower_utf8(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : decode_utf8(text)) append_utf8(out, to_lower(cp));
  return out;
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
  const std::u32string cps = decode_utf8(text);
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  auto emit = [&](char32_t cp) { append_utf8(current, config.lowercase ? to_lower(cp) : cp); };

  if (config.scheme == TokenScheme::whitespace) {
    for (char32_t cp : cps) {
      if (is_space(cp)) {
        flush();
      } else {
        emit(cp);
      }
    }
    flush();
    return tokens;
  }

  CharClass prev = CharClass::space;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const CharClass cls = classify(cps[i]);
    if (is_word(cls)) {
      emit(cps[i]);
      prev = cls;
      continue;
    }
    const CharClass next = i + 1 < cps.size() ? classify(cps[i + 1]) : CharClass::space;
    if (!current.empty() && joins(cls, prev, next)) {
      emit(cps[i]);
      continue;
    }
    flush();
    prev = cls;
  }
  flush();
  return tokens;
}

}  // namespace embfuse::corpus
