#include "ssd/occurrences.hpp"

#include "ssd/error.hpp"
#include "ssd/text.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace ssd {

void TargetWord::validate() const {
    if (lemma.empty()) throw ValidationError("target lemma is empty");
    std::unordered_set<std::string> seen;
    for (const auto& f : surface_forms) {
        if (f.empty()) throw ValidationError("target '" + lemma + "' has an empty surface form");
        if (f == lemma) throw ValidationError("target '" + lemma + "' lists its lemma as a surface form");
        if (!seen.insert(f).second) throw ValidationError("target '" + lemma + "' repeats surface form '" + f + "'");
    }
}

std::string to_string(MatchKind k) {
    switch (k) {
        case MatchKind::exact: return "exact";
        case MatchKind::surface: return "surface";
        case MatchKind::subword_prefix: return "subword_prefix";
    }
    return "exact";
}

MatchKind parse_match_kind(const std::string& s) {
    if (s == "exact") return MatchKind::exact;
    if (s == "surface") return MatchKind::surface;
    if (s == "subword_prefix") return MatchKind::subword_prefix;
    throw DataError("unknown match kind '" + s + "'");
}

namespace {

std::string fold(std::string_view s, bool case_insensitive) {
    return case_insensitive ? text::to_lower(s) : std::string(s);
}

// First subword piece, marker stripped; empty when the form is unk.
std::string first_piece(const std::string& form, const Vocabulary& vocab) {
    const auto spans = tokenize(form, vocab);
    if (spans.empty() || spans.front().id == vocab.unk_id()) return {};
    return spans.front().token;
}

}  // namespace

SearchPlan build_search_plan(const TargetWord& target, const Vocabulary& vocab) {
    target.validate();
    SearchPlan plan;
    std::unordered_set<std::string> seen;
    auto add = [&](const std::string& form, MatchKind kind) {
        if (seen.insert(text::to_lower(form)).second) plan.entries.push_back({form, kind});
    };
    add(target.lemma, MatchKind::exact);
    for (const auto& f : target.surface_forms) add(f, MatchKind::surface);

    const std::string lemma_piece = first_piece(target.lemma, vocab);
    if (lemma_piece.empty()) {
        plan.warnings.push_back("lemma '" + target.lemma + "' tokenizes to unk only; no subword fallback");
        return plan;
    }
    auto add_prefix = [&](const std::string& piece) {
        if (!piece.empty() && text::length(piece) >= kMinPrefixLength) add(piece, MatchKind::subword_prefix);
    };
    add_prefix(lemma_piece);
    for (const auto& f : target.surface_forms) add_prefix(first_piece(f, vocab));
    return plan;
}

std::string occurrence_id(const std::string& word, const std::string& doc_id, std::size_t chunk_index,
                          std::size_t char_start) {
    return word + "@" + doc_id + "#" + std::to_string(chunk_index) + ":" + std::to_string(char_start);
}

std::vector<Occurrence> find_occurrences(const std::vector<Chunk>& chunks, const TargetWord& target,
                                         const Vocabulary& vocab, const MatchOptions& options) {
    return find_occurrences(chunks, target, build_search_plan(target, vocab), options);
}

std::vector<Occurrence> find_occurrences(const std::vector<Chunk>& chunks, const TargetWord& target,
                                         const SearchPlan& plan, const MatchOptions& options) {
    std::vector<std::string> folded;
    folded.reserve(plan.entries.size());
    for (const auto& e : plan.entries) folded.push_back(fold(e.form, options.case_insensitive));

    std::vector<Occurrence> out;
    for (const auto& chunk : chunks) {
        const auto cps = text::decode(chunk.text);
        std::size_t i = 0;
        while (i < cps.size()) {
            if (text::is_space(cps[i].value)) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < cps.size() && !text::is_space(cps[j].value)) ++j;
            std::size_t s = i;
            std::size_t e = j;
            while (s < e && !text::is_alnum(cps[s].value)) ++s;
            while (e > s && !text::is_alnum(cps[e - 1].value)) --e;
            if (s < e) {
                const std::size_t b0 = cps[s].byte_offset;
                const std::size_t b1 = cps[e - 1].byte_offset + cps[e - 1].byte_length;
                const std::string_view word(chunk.text.data() + b0, b1 - b0);
                const std::string key = fold(word, options.case_insensitive);
                for (std::size_t p = 0; p < plan.entries.size(); ++p) {
                    const auto& entry = plan.entries[p];
                    const bool hit = entry.kind == MatchKind::subword_prefix ? key.starts_with(folded[p])
                                                                             : key == folded[p];
                    if (!hit) continue;
                    Occurrence o;
                    o.word = target.lemma;
                    o.doc_id = chunk.doc_id;
                    o.chunk_index = chunk.chunk_index;
                    o.period = chunk.period;
                    o.char_start = s;
                    o.char_end = e;
                    o.matched_form = std::string(word);
                    o.plan_form = entry.form;
                    o.match_kind = entry.kind;
                    o.id = occurrence_id(o.word, o.doc_id, o.chunk_index, o.char_start);
                    out.push_back(std::move(o));
                    break;
                }
            }
            i = j;
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Occurrence& a, const Occurrence& b) {
        return std::tie(a.doc_id, a.chunk_index, a.char_start) < std::tie(b.doc_id, b.chunk_index, b.char_start);
    });
    return out;
}

Census occurrence_census(const std::vector<Occurrence>& occurrences, std::size_t min_per_period) {
    Census c;
    for (const auto& o : occurrences) {
        if (o.period == Period::old_period) {
            ++c.old_count;
        } else {
            ++c.new_count;
        }
    }
    c.sufficient = c.old_count >= min_per_period && c.new_count >= min_per_period;
    return c;
}

std::vector<TargetWord> targets_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ValidationError("targets file must hold a JSON array");
    std::vector<TargetWord> targets;
    std::unordered_set<std::string> lemmas;
    for (const auto& item : j) {
        TargetWord t;
        try {
            t.lemma = item.at("lemma").get<std::string>();
            t.surface_forms = item.value("surface_forms", std::vector<std::string>{});
            t.min_occurrences_per_period = item.value("min_occurrences_per_period", t.min_occurrences_per_period);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("malformed target entry: ") + e.what());
        }
        t.validate();
        if (!lemmas.insert(t.lemma).second) throw ValidationError("duplicate target lemma '" + t.lemma + "'");
        targets.push_back(std::move(t));
    }
    return targets;
}

std::vector<TargetWord> read_targets_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open targets file " + path);
    try {
        return targets_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("targets file " + path + ": " + e.what());
    }
}

nlohmann::ordered_json to_json(const Occurrence& o) {
    nlohmann::ordered_json j;
    j["id"] = o.id;
    j["word"] = o.word;
    j["doc_id"] = o.doc_id;
    j["chunk_index"] = o.chunk_index;
    j["period"] = to_string(o.period);
    j["char_start"] = o.char_start;
    j["char_end"] = o.char_end;
    j["matched_form"] = o.matched_form;
    j["plan_form"] = o.plan_form;
    j["match_kind"] = to_string(o.match_kind);
    return j;
}

Occurrence occurrence_from_json(const nlohmann::json& j) {
    try {
        Occurrence o;
        o.id = j.at("id").get<std::string>();
        o.word = j.at("word").get<std::string>();
        o.doc_id = j.at("doc_id").get<std::string>();
        o.chunk_index = j.at("chunk_index").get<std::size_t>();
        o.period = parse_period(j.at("period").get<std::string>());
        o.char_start = j.at("char_start").get<std::size_t>();
        o.char_end = j.at("char_end").get<std::size_t>();
        o.matched_form = j.at("matched_form").get<std::string>();
        o.plan_form = j.value("plan_form", o.matched_form);
        o.match_kind = parse_match_kind(j.at("match_kind").get<std::string>());
        if (o.char_start >= o.char_end) throw DataError("occurrence '" + o.id + "' has an empty span");
        return o;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed occurrence row: ") + e.what());
    } catch (const ValidationError& e) {
        throw DataError(std::string("malformed occurrence row: ") + e.what());
    }
}

void write_occurrences(std::ostream& out, const std::vector<Occurrence>& occs) {
    for (const auto& o : occs) out << to_json(o).dump() << '\n';
}

std::vector<Occurrence> read_occurrences(std::istream& in) {
    std::vector<Occurrence> out;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            auto o = occurrence_from_json(nlohmann::json::parse(line));
            if (!ids.insert(o.id).second) throw DataError("duplicate occurrence id '" + o.id + "'");
            out.push_back(std::move(o));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("occurrences line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
        } catch (const DataError& e) {
            throw DataError("occurrences line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Occurrence> read_occurrences_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open occurrences file " + path);
    return read_occurrences(in);
}

}  // namespace ssd
