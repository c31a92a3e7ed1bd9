#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ssd {

struct VocabularyOptions {
    std::string continuation_marker = "##";
    bool cased = true;
    std::string unk_token = "[UNK]";
};

// Immutable subword vocabulary; ids are dense line numbers.
class Vocabulary {
public:
    // Throws ValidationError on duplicate or empty entries, or a missing unk token.
    Vocabulary(std::vector<std::string> entries, VocabularyOptions options = {});

    // One subword per line; options come from a JSON sidecar next to the file
    // (`vocab.txt` -> `vocab.json`) and fall back to the defaults when absent.
    static Vocabulary load(const std::filesystem::path& vocab_file);
    void save(const std::filesystem::path& vocab_file) const;

    std::optional<int> id(const std::string& piece) const;
    bool contains(const std::string& piece) const { return index_.count(piece) != 0; }
    const std::string& piece(int id) const { return entries_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const noexcept { return entries_.size(); }
    const VocabularyOptions& options() const noexcept { return options_; }
    int unk_id() const noexcept { return unk_id_; }

private:
    std::vector<std::string> entries_;
    std::unordered_map<std::string, int> index_;
    VocabularyOptions options_;
    int unk_id_ = 0;
};

struct TokenSpan {
    std::string token;
    std::size_t char_start = 0;  // code point offsets into the tokenized text
    std::size_t char_end = 0;
    bool is_continuation = false;
    int id = 0;
    std::size_t byte_start = 0;
    std::size_t byte_end = 0;

    bool operator==(const TokenSpan&) const = default;
};

// A pre-token: a maximal run of non-space, non-punctuation characters, or a
// single punctuation character.
struct WordSpan {
    std::size_t char_start = 0;
    std::size_t char_end = 0;
    std::size_t byte_start = 0;
    std::size_t byte_end = 0;
    bool is_punct = false;
};

std::vector<WordSpan> split_words(std::string_view text);

// Greedy longest-match-first WordPiece over whitespace/punctuation pre-tokens.
// Words with no full decomposition become a single unk span.
std::vector<TokenSpan> tokenize(std::string_view text, const Vocabulary& vocab);
std::size_t count_tokens(std::string_view text, const Vocabulary& vocab);

// Token count per pre-token, aligned with split_words(text).
std::vector<std::size_t> count_tokens_per_word(std::string_view text, const Vocabulary& vocab);

inline constexpr std::size_t kMaxCharsPerWord = 100;

}  // namespace ssd
