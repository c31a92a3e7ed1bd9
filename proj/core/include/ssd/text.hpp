#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Unicode helpers over UTF-8 strings. Offsets exposed to callers are code
// point indices unless a name says "byte".
namespace ssd::text {

struct CodePoint {
    char32_t value;
    std::size_t byte_offset;
    std::size_t byte_length;
};

// Throws DataError on malformed UTF-8.
std::vector<CodePoint> decode(std::string_view utf8);
bool is_valid_utf8(std::string_view utf8);

void append_utf8(std::string& out, char32_t cp);
std::string encode(const std::u32string& cps);

bool is_letter(char32_t cp);
bool is_alnum(char32_t cp);
bool is_space(char32_t cp);
// Unicode punctuation plus ASCII symbol characters, the WordPiece convention.
bool is_punct(char32_t cp);
bool is_combining_mark(char32_t cp);

char32_t to_lower(char32_t cp);
std::string to_lower(std::string_view utf8);

// Lowercase and strip diacritics (NFD, drop nonspacing marks). The result
// holds zero or more code points per input code point.
std::u32string fold_uncased(char32_t cp);

std::string_view trim(std::string_view s);
std::size_t length(std::string_view utf8);

}  // namespace ssd::text
