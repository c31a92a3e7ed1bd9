#pragma once

#include "ssd/corpus.hpp"
#include "ssd/tokenizer.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace ssd {

struct TargetWord {
    std::string lemma;
    std::vector<std::string> surface_forms;  // historical spellings, in search order
    std::size_t min_occurrences_per_period = 10;

    void validate() const;  // throws ValidationError
};

enum class MatchKind { exact, surface, subword_prefix };

std::string to_string(MatchKind k);
MatchKind parse_match_kind(const std::string& s);

struct PlanEntry {
    std::string form;
    MatchKind kind;
    bool operator==(const PlanEntry&) const = default;
};

struct SearchPlan {
    std::vector<PlanEntry> entries;
    std::vector<std::string> warnings;
};

inline constexpr std::size_t kMinPrefixLength = 3;

// Lemma, then surface forms, then the first subword piece of the lemma and
// of each surface form as word-start prefixes.
SearchPlan build_search_plan(const TargetWord& target, const Vocabulary& vocab);

struct Occurrence {
    std::string id;
    std::string word;  // target lemma
    std::string doc_id;
    std::size_t chunk_index = 0;
    Period period = Period::old_period;
    std::size_t char_start = 0;  // code points into the chunk text; spans the whole matched word
    std::size_t char_end = 0;
    std::string matched_form;  // chunk text in [char_start, char_end), original casing
    std::string plan_form;     // the winning plan entry
    MatchKind match_kind = MatchKind::exact;

    bool operator==(const Occurrence&) const = default;
};

struct MatchOptions {
    bool case_insensitive = true;
};

std::string occurrence_id(const std::string& word, const std::string& doc_id, std::size_t chunk_index,
                          std::size_t char_start);

// Words are whitespace-delimited tokens with leading and trailing
// non-alphanumeric characters trimmed. First matching plan entry wins.
std::vector<Occurrence> find_occurrences(const std::vector<Chunk>& chunks, const TargetWord& target,
                                         const Vocabulary& vocab, const MatchOptions& options = {});
std::vector<Occurrence> find_occurrences(const std::vector<Chunk>& chunks, const TargetWord& target,
                                         const SearchPlan& plan, const MatchOptions& options = {});

struct Census {
    std::size_t old_count = 0;
    std::size_t new_count = 0;
    bool sufficient = false;
};

Census occurrence_census(const std::vector<Occurrence>& occurrences, std::size_t min_per_period);

// Targets file: JSON array of {"lemma", "surface_forms", optional "min_occurrences_per_period"}.
std::vector<TargetWord> read_targets_file(const std::string& path);
std::vector<TargetWord> targets_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const Occurrence& o);
Occurrence occurrence_from_json(const nlohmann::json& j);
void write_occurrences(std::ostream& out, const std::vector<Occurrence>& occs);
std::vector<Occurrence> read_occurrences(std::istream& in);
std::vector<Occurrence> read_occurrences_file(const std::string& path);

}  // namespace ssd
