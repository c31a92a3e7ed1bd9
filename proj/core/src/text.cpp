#include "ssd/text.hpp"

#include "ssd/error.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace ssd::text {

std::vector<CodePoint> decode(std::string_view utf8) {
    std::vector<CodePoint> out;
    out.reserve(utf8.size());
    const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
    const auto n = static_cast<int32_t>(utf8.size());
    int32_t i = 0;
    while (i < n) {
        const int32_t start = i;
        UChar32 c;
        U8_NEXT(s, i, n, c);
        if (c < 0) {
            throw DataError("invalid UTF-8 at byte " + std::to_string(start));
        }
        out.push_back({static_cast<char32_t>(c), static_cast<std::size_t>(start),
                       static_cast<std::size_t>(i - start)});
    }
    return out;
}

bool is_valid_utf8(std::string_view utf8) {
    const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
    const auto n = static_cast<int32_t>(utf8.size());
    int32_t i = 0;
    while (i < n) {
        UChar32 c;
        U8_NEXT(s, i, n, c);
        if (c < 0) return false;
    }
    return true;
}

void append_utf8(std::string& out, char32_t cp) {
    char buf[U8_MAX_LENGTH];
    int32_t len = 0;
    UBool error = false;
    U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH, static_cast<UChar32>(cp), error);
    if (!error) out.append(buf, static_cast<std::size_t>(len));
}

std::string encode(const std::u32string& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t c : cps) append_utf8(out, c);
    return out;
}

bool is_letter(char32_t cp) { return u_isalpha(static_cast<UChar32>(cp)); }

bool is_alnum(char32_t cp) {
    return u_isalpha(static_cast<UChar32>(cp)) || u_isdigit(static_cast<UChar32>(cp));
}

bool is_space(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)); }

bool is_punct(char32_t cp) {
    if ((cp >= 33 && cp <= 47) || (cp >= 58 && cp <= 64) || (cp >= 91 && cp <= 96) ||
        (cp >= 123 && cp <= 126)) {
        return true;
    }
    return u_ispunct(static_cast<UChar32>(cp));
}

bool is_combining_mark(char32_t cp) {
    return u_charType(static_cast<UChar32>(cp)) == U_NON_SPACING_MARK;
}

char32_t to_lower(char32_t cp) { return static_cast<char32_t>(u_tolower(static_cast<UChar32>(cp))); }

std::string to_lower(std::string_view utf8) {
    std::string out;
    out.reserve(utf8.size());
    for (const auto& c : decode(utf8)) append_utf8(out, to_lower(c.value));
    return out;
}

std::u32string fold_uncased(char32_t cp) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfd = icu::Normalizer2::getNFDInstance(status);
    std::u32string out;
    const char32_t lower = to_lower(cp);
    if (U_FAILURE(status)) {
        out.push_back(lower);
        return out;
    }
    icu::UnicodeString decomposed;
    nfd->normalize(icu::UnicodeString(static_cast<UChar32>(lower)), decomposed, status);
    for (int32_t i = 0; i < decomposed.length();) {
        const UChar32 c = decomposed.char32At(i);
        if (!is_combining_mark(static_cast<char32_t>(c))) out.push_back(static_cast<char32_t>(c));
        i += U16_LENGTH(c);
    }
    return out;
}

std::string_view trim(std::string_view s) {
    // Trim by code point so non-ASCII spaces (NBSP, ideographic) count.
    const auto cps = decode(s);
    std::size_t first = 0;
    while (first < cps.size() && is_space(cps[first].value)) ++first;
    if (first == cps.size()) return {};
    std::size_t last = cps.size();
    while (last > first && is_space(cps[last - 1].value)) --last;
    const std::size_t b = cps[first].byte_offset;
    const std::size_t e = cps[last - 1].byte_offset + cps[last - 1].byte_length;
    return s.substr(b, e - b);
}

std::size_t length(std::string_view utf8) { return decode(utf8).size(); }

}  // namespace ssd::text
