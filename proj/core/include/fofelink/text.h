#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fofelink {

// Full Unicode case folding of a UTF-8 string (e.g. "Straße" -> "strasse").
// Invalid UTF-8 sequences are replaced with U+FFFD.
std::string fold_case(std::string_view utf8);

std::u32string to_code_points(std::string_view utf8);
std::string to_utf8(std::u32string_view code_points);

// Number of code points in a UTF-8 string.
std::size_t code_point_length(std::string_view utf8);

// Byte offset of the `cp_index`-th code point (or text.size() at the end).
std::size_t byte_offset(std::string_view utf8, std::size_t cp_index);

// Substring by code point offsets [begin, end).
std::string_view slice_code_points(std::string_view utf8, std::size_t begin,
                                   std::size_t end);

// Splits a UTF-8 string into one string per code point.
std::vector<std::string> split_code_points(std::string_view utf8);

struct Token {
  std::string text;       // case-folded
  std::size_t begin = 0;  // code point offsets into the source text
  std::size_t end = 0;
  std::size_t sentence = 0;
};

// Word tokenizer: a token is a maximal run of letters or digits (any non-ASCII
// code point counts as a letter). Sentence boundaries are '.', '!', '?' or
// U+3002 followed by whitespace or end of text; a '.' directly after a
// single-character token is treated as an abbreviation ("F.C.").
std::vector<Token> tokenize(std::string_view utf8);

// Case-folded token strings only.
std::vector<std::string> tokenize_words(std::string_view utf8);

std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

// 1 - levenshtein / max(|a|, |b|); two empty strings have similarity 1.
double edit_similarity(std::u32string_view a, std::u32string_view b);

}  // namespace fofelink
