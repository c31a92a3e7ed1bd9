#pragma once

#include "ssd/tokenizer.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ssd {

enum class Period { old_period, new_period };

std::string to_string(Period p);
Period parse_period(const std::string& s);  // "old" | "new"

struct Document {
    std::string id;
    std::string source;
    int year = 0;
    std::string text;
    std::optional<double> ocr_word_confidence;
    // Fields not modelled above, written back unchanged.
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
};

struct Chunk {
    std::string doc_id;
    std::size_t chunk_index = 0;
    std::string text;
    std::size_t token_count = 0;
    Period period = Period::old_period;
    int year = 0;
    std::string source;
};

struct CleaningConfig {
    double min_confidence = 0.5;  // rows must be strictly above
    std::size_t min_tokens = 5;   // rows with fewer tokens are dropped
    double max_nonalpha = 0.5;    // rows with a larger non-letter share are dropped
    std::optional<int> year_min;
    std::optional<int> year_max;

    void validate() const;  // throws ValidationError
};

struct RowError {
    std::size_t line = 0;  // 1-based; 0 when not read from a file
    std::string message;
};

struct CleaningReport {
    std::size_t rows_in = 0;
    std::size_t removed_malformed = 0;
    std::size_t removed_low_confidence = 0;
    std::size_t removed_empty = 0;
    std::size_t removed_duplicates = 0;
    std::size_t removed_nonalpha = 0;
    std::size_t removed_short = 0;
    std::size_t rows_out = 0;
    std::vector<RowError> errors;

    std::size_t total_removed() const {
        return removed_malformed + removed_low_confidence + removed_empty + removed_duplicates +
               removed_nonalpha + removed_short;
    }
};

nlohmann::ordered_json to_json(const CleaningReport& r);

// Share of code points that are not letters; spaces count as non-letters.
double nonalpha_ratio(std::string_view text);

struct CleanResult {
    std::vector<Document> documents;
    CleaningReport report;
};

// Filters in order: OCR confidence (when present), empty/duplicate text
// (compared after trimming), non-alphabetic share, token count.
CleanResult clean(std::vector<Document> documents, const CleaningConfig& config, const Vocabulary& vocab);

struct ChunkLogEntry {
    std::string doc_id;
    std::string message;
};

struct ChunkResult {
    std::vector<Chunk> chunks;
    std::vector<ChunkLogEntry> log;  // hard splits inside a single word
};

inline constexpr std::size_t kDefaultMaxChunkTokens = 256;
inline constexpr std::size_t kMinChunkBudget = 16;

// Splits each document into chunks of at most max_tokens tokens, preferring
// to cut after a sentence separator (. ; : ? ! or a newline).
ChunkResult chunk(const std::vector<Document>& documents, std::size_t max_tokens, Period period,
                  const Vocabulary& vocab);

// JSON Lines I/O. Malformed rows are reported, not thrown.
struct DocumentReadResult {
    std::vector<Document> documents;
    std::vector<RowError> errors;
};

DocumentReadResult read_documents(std::istream& in);
DocumentReadResult read_documents_file(const std::string& path);
Document document_from_json(const nlohmann::ordered_json& j);  // throws DataError
nlohmann::ordered_json to_json(const Document& d);
void write_documents(std::ostream& out, const std::vector<Document>& docs);

nlohmann::ordered_json to_json(const Chunk& c);
Chunk chunk_from_json(const nlohmann::ordered_json& j);  // throws DataError
void write_chunks(std::ostream& out, const std::vector<Chunk>& chunks);
std::vector<Chunk> read_chunks(std::istream& in);  // throws DataError with line number
std::vector<Chunk> read_chunks_file(const std::string& path);

}  // namespace ssd
