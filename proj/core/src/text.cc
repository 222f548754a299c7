#include "fofelink/text.h"

#include <unicode/unistr.h>

#include <algorithm>
#include <numeric>

namespace fofelink {

namespace {

// Decodes one code point starting at `pos`, advancing it. Malformed input
// yields U+FFFD and consumes a single byte.
char32_t decode_one(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) {
    return static_cast<unsigned char>(s[i]);
  };
  const unsigned char lead = byte(pos);
  std::size_t extra = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++pos;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
  } else {
    ++pos;
    return U'\uFFFD';
  }
  for (std::size_t i = 1; i <= extra; ++i) {
    if (pos + i >= s.size() || (byte(pos + i) & 0xC0) != 0x80) {
      ++pos;
      return U'\uFFFD';
    }
    cp = (cp << 6) | (byte(pos + i) & 0x3F);
  }
  pos += extra + 1;
  return cp;
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

bool is_word_char(char32_t cp) {
  if (cp >= 0x80) {
    // CJK and other scripts count as word characters; a few common
    // punctuation blocks do not.
    return !(cp >= 0x2000 && cp <= 0x206F) && !(cp >= 0x3000 && cp <= 0x303F) &&
           !(cp >= 0xFF00 && cp <= 0xFF0F) && cp != 0xA0;
  }
  return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
         (cp >= 'A' && cp <= 'Z');
}

bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == 0xA0 ||
         cp == 0x3000;
}

}  // namespace

std::string fold_case(std::string_view utf8) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  u.foldCase();
  std::string out;
  u.toUTF8String(out);
  return out;
}

std::u32string to_code_points(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  for (std::size_t pos = 0; pos < utf8.size();) out.push_back(decode_one(utf8, pos));
  return out;
}

std::string to_utf8(std::u32string_view code_points) {
  std::string out;
  out.reserve(code_points.size());
  for (char32_t cp : code_points) append_utf8(out, cp);
  return out;
}

std::size_t code_point_length(std::string_view utf8) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < utf8.size(); ++n) decode_one(utf8, pos);
  return n;
}

std::size_t byte_offset(std::string_view utf8, std::size_t cp_index) {
  std::size_t pos = 0;
  for (std::size_t i = 0; i < cp_index && pos < utf8.size(); ++i) {
    decode_one(utf8, pos);
  }
  return pos;
}

std::string_view slice_code_points(std::string_view utf8, std::size_t begin,
                                   std::size_t end) {
  const std::size_t b = byte_offset(utf8, begin);
  const std::size_t e = byte_offset(utf8, end);
  return utf8.substr(b, e - b);
}

std::vector<std::string> split_code_points(std::string_view utf8) {
  std::vector<std::string> out;
  for (std::size_t pos = 0; pos < utf8.size();) {
    const std::size_t start = pos;
    decode_one(utf8, pos);
    out.emplace_back(utf8.substr(start, pos - start));
  }
  return out;
}

std::vector<Token> tokenize(std::string_view utf8) {
  const std::u32string cps = to_code_points(utf8);
  std::vector<Token> tokens;
  std::size_t sentence = 0;
  std::size_t i = 0;
  while (i < cps.size()) {
    const char32_t cp = cps[i];
    if (is_word_char(cp)) {
      std::size_t j = i;
      while (j < cps.size() && is_word_char(cps[j])) ++j;
      Token token;
      token.text = fold_case(to_utf8(std::u32string_view(cps).substr(i, j - i)));
      token.begin = i;
      token.end = j;
      token.sentence = sentence;
      tokens.push_back(std::move(token));
      i = j;
      continue;
    }
    const bool terminal = cp == '.' || cp == '!' || cp == '?' || cp == 0x3002;
    if (terminal) {
      const bool at_boundary = i + 1 >= cps.size() || is_space(cps[i + 1]) ||
                               cp == 0x3002;
      const bool abbreviation = cp == '.' && !tokens.empty() &&
                                tokens.back().end == i &&
                                tokens.back().end - tokens.back().begin == 1;
      if (at_boundary && !abbreviation && !tokens.empty() &&
          tokens.back().sentence == sentence) {
        ++sentence;
      }
    }
    ++i;
  }
  return tokens;
}

std::vector<std::string> tokenize_words(std::string_view utf8) {
  std::vector<std::string> out;
  for (Token& t : tokenize(utf8)) out.push_back(std::move(t.text));
  return out;
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
      diag = up;
    }
  }
  return row[b.size()];
}

double edit_similarity(std::u32string_view a, std::u32string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) /
                   static_cast<double>(longest);
}

}  // namespace fofelink
