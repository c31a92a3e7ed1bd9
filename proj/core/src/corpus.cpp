#include "ssd/corpus.hpp"

#include "ssd/error.hpp"
#include "ssd/text.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace ssd {

std::string to_string(Period p) { return p == Period::old_period ? "old" : "new"; }

Period parse_period(const std::string& s) {
    if (s == "old") return Period::old_period;
    if (s == "new") return Period::new_period;
    throw ValidationError("period must be 'old' or 'new', got '" + s + "'");
}

void CleaningConfig::validate() const {
    std::string problems;
    if (!(min_confidence >= 0.0 && min_confidence <= 1.0)) problems += " min_confidence must be in [0,1];";
    if (!(max_nonalpha >= 0.0 && max_nonalpha <= 1.0)) problems += " max_nonalpha must be in [0,1];";
    if (year_min && year_max && *year_min > *year_max) problems += " year_min exceeds year_max;";
    if (!problems.empty()) throw ValidationError("invalid cleaning config:" + problems);
}

nlohmann::ordered_json to_json(const CleaningReport& r) {
    nlohmann::ordered_json j;
    j["rows_in"] = r.rows_in;
    j["removed_malformed"] = r.removed_malformed;
    j["removed_low_confidence"] = r.removed_low_confidence;
    j["removed_empty"] = r.removed_empty;
    j["removed_duplicates"] = r.removed_duplicates;
    j["removed_nonalpha"] = r.removed_nonalpha;
    j["removed_short"] = r.removed_short;
    j["rows_out"] = r.rows_out;
    auto errors = nlohmann::ordered_json::array();
    for (const auto& e : r.errors) errors.push_back({{"line", e.line}, {"message", e.message}});
    j["errors"] = std::move(errors);
    return j;
}

double nonalpha_ratio(std::string_view text) {
    const auto cps = text::decode(text);
    if (cps.empty()) return 0.0;
    std::size_t nonalpha = 0;
    for (const auto& c : cps) {
        if (!text::is_letter(c.value)) ++nonalpha;
    }
    return static_cast<double>(nonalpha) / static_cast<double>(cps.size());
}

CleanResult clean(std::vector<Document> documents, const CleaningConfig& config, const Vocabulary& vocab) {
    config.validate();
    CleanResult result;
    auto& report = result.report;
    report.rows_in = documents.size();

    std::unordered_set<std::string> seen_ids;
    std::unordered_set<std::string> seen_texts;
    for (std::size_t row = 0; row < documents.size(); ++row) {
        auto& doc = documents[row];
        auto malformed = [&](const std::string& why) {
            ++report.removed_malformed;
            report.errors.push_back({0, "document '" + doc.id + "' (row " + std::to_string(row) + "): " + why});
        };
        if (doc.id.empty()) {
            malformed("empty id");
            continue;
        }
        if (!seen_ids.insert(doc.id).second) {
            malformed("duplicate id");
            continue;
        }
        if (!text::is_valid_utf8(doc.text)) {
            malformed("text is not valid UTF-8");
            continue;
        }
        if ((config.year_min && doc.year < *config.year_min) || (config.year_max && doc.year > *config.year_max)) {
            malformed("year " + std::to_string(doc.year) + " outside corpus range");
            continue;
        }

        if (doc.ocr_word_confidence && !(*doc.ocr_word_confidence > config.min_confidence)) {
            ++report.removed_low_confidence;
            continue;
        }
        const std::string trimmed(text::trim(doc.text));
        if (trimmed.empty()) {
            ++report.removed_empty;
            continue;
        }
        if (!seen_texts.insert(trimmed).second) {
            ++report.removed_duplicates;
            continue;
        }
        if (nonalpha_ratio(doc.text) > config.max_nonalpha) {
            ++report.removed_nonalpha;
            continue;
        }
        if (count_tokens(doc.text, vocab) < config.min_tokens) {
            ++report.removed_short;
            continue;
        }
        result.documents.push_back(std::move(doc));
    }
    report.rows_out = result.documents.size();
    return result;
}

namespace {

bool is_separator(char32_t c) { return c == '.' || c == ';' || c == ':' || c == '?' || c == '!'; }

struct DocumentChunker {
    const Document& doc;
    const Vocabulary& vocab;
    std::size_t max_tokens;
    Period period;
    ChunkResult& result;
    std::size_t next_index = 0;

    void emit(std::size_t byte_start, std::size_t byte_end, std::size_t tokens) {
        Chunk c;
        c.doc_id = doc.id;
        c.chunk_index = next_index++;
        c.text = doc.text.substr(byte_start, byte_end - byte_start);
        c.token_count = tokens;
        c.period = period;
        c.year = doc.year;
        c.source = doc.source;
        result.chunks.push_back(std::move(c));
    }

    // A single pre-token with more pieces than the budget: cut between pieces,
    // shrinking each piece group until its re-tokenized count fits.
    void split_oversized_word(const WordSpan& w) {
        const std::string_view word(doc.text.data() + w.byte_start, w.byte_end - w.byte_start);
        const auto pieces = tokenize(word, vocab);
        std::size_t p = 0;
        while (p < pieces.size()) {
            std::size_t q = std::min(p + max_tokens, pieces.size());
            std::size_t tokens = 0;
            for (;;) {
                const auto sub = word.substr(pieces[p].byte_start, pieces[q - 1].byte_end - pieces[p].byte_start);
                tokens = count_tokens(sub, vocab);
                if (tokens <= max_tokens || q == p + 1) break;
                --q;
            }
            emit(w.byte_start + pieces[p].byte_start, w.byte_start + pieces[q - 1].byte_end, tokens);
            p = q;
        }
        result.log.push_back({doc.id, "word of " + std::to_string(pieces.size()) +
                                          " tokens exceeds budget; split inside the word"});
    }

    void run() {
        const auto cps = text::decode(doc.text);
        const auto words = split_words(doc.text);
        const auto counts = count_tokens_per_word(doc.text, vocab);
        std::size_t total = 0;
        for (auto c : counts) total += c;
        if (total <= max_tokens) {
            if (total > 0) emit(0, doc.text.size(), total);
            return;
        }

        auto boundary_after = [&](std::size_t j) {
            if (words[j].is_punct && is_separator(cps[words[j].char_start].value)) return true;
            const std::size_t gap_end = j + 1 < words.size() ? words[j + 1].char_start : cps.size();
            for (std::size_t k = words[j].char_end; k < gap_end; ++k) {
                if (cps[k].value == '\n' || cps[k].value == 0x2029) return true;
            }
            return false;
        };

        std::size_t i = 0;
        while (i < words.size()) {
            if (counts[i] > max_tokens) {
                split_oversized_word(words[i]);
                ++i;
                continue;
            }
            std::size_t j = i;
            std::size_t acc = 0;
            std::size_t acc_at_boundary = 0;
            std::optional<std::size_t> last_boundary;
            while (j < words.size() && acc + counts[j] <= max_tokens) {
                acc += counts[j];
                if (boundary_after(j)) {
                    last_boundary = j;
                    acc_at_boundary = acc;
                }
                ++j;
            }
            std::size_t end = j;
            std::size_t tokens = acc;
            if (j < words.size() && last_boundary) {
                end = *last_boundary + 1;
                tokens = acc_at_boundary;
            }
            emit(words[i].byte_start, words[end - 1].byte_end, tokens);
            i = end;
        }
    }
};

}  // namespace

ChunkResult chunk(const std::vector<Document>& documents, std::size_t max_tokens, Period period,
                  const Vocabulary& vocab) {
    if (max_tokens < kMinChunkBudget) {
        throw ValidationError("max_tokens must be at least " + std::to_string(kMinChunkBudget));
    }
    ChunkResult result;
    for (const auto& doc : documents) {
        DocumentChunker{doc, vocab, max_tokens, period, result}.run();
    }
    return result;
}

// ---- JSON Lines ----

Document document_from_json(const nlohmann::ordered_json& j) {
    if (!j.is_object()) throw DataError("row is not a JSON object");
    Document d;
    auto require_string = [&](const char* key) -> std::string {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) throw DataError(std::string("missing or non-string field '") + key + "'");
        return it->get<std::string>();
    };
    d.id = require_string("id");
    if (d.id.empty()) throw DataError("field 'id' is empty");
    d.text = require_string("text");
    if (!text::is_valid_utf8(d.text)) throw DataError("field 'text' is not valid UTF-8");
    auto year = j.find("year");
    if (year == j.end() || !year->is_number_integer()) throw DataError("missing or non-integer field 'year'");
    d.year = year->get<int>();
    if (auto src = j.find("source"); src != j.end()) {
        if (!src->is_string()) throw DataError("field 'source' is not a string");
        d.source = src->get<std::string>();
    }
    if (auto conf = j.find("ocr_word_confidence"); conf != j.end() && !conf->is_null()) {
        if (!conf->is_number()) throw DataError("field 'ocr_word_confidence' is not a number");
        const double v = conf->get<double>();
        if (!(v >= 0.0 && v <= 1.0)) throw DataError("field 'ocr_word_confidence' outside [0,1]");
        d.ocr_word_confidence = v;
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        if (k != "id" && k != "text" && k != "year" && k != "source" && k != "ocr_word_confidence") {
            d.extra[k] = it.value();
        }
    }
    return d;
}

nlohmann::ordered_json to_json(const Document& d) {
    nlohmann::ordered_json j;
    j["id"] = d.id;
    j["source"] = d.source;
    j["year"] = d.year;
    j["text"] = d.text;
    if (d.ocr_word_confidence) j["ocr_word_confidence"] = *d.ocr_word_confidence;
    for (auto it = d.extra.begin(); it != d.extra.end(); ++it) j[it.key()] = it.value();
    return j;
}

DocumentReadResult read_documents(std::istream& in) {
    DocumentReadResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            result.documents.push_back(document_from_json(nlohmann::ordered_json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            result.errors.push_back({line_no, std::string("invalid JSON: ") + e.what()});
        } catch (const DataError& e) {
            result.errors.push_back({line_no, e.what()});
        }
    }
    return result;
}

DocumentReadResult read_documents_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file " + path);
    return read_documents(in);
}

void write_documents(std::ostream& out, const std::vector<Document>& docs) {
    for (const auto& d : docs) out << to_json(d).dump() << '\n';
}

nlohmann::ordered_json to_json(const Chunk& c) {
    nlohmann::ordered_json j;
    j["doc_id"] = c.doc_id;
    j["chunk_index"] = c.chunk_index;
    j["period"] = to_string(c.period);
    j["year"] = c.year;
    j["source"] = c.source;
    j["token_count"] = c.token_count;
    j["text"] = c.text;
    return j;
}

Chunk chunk_from_json(const nlohmann::ordered_json& j) {
    try {
        Chunk c;
        c.doc_id = j.at("doc_id").get<std::string>();
        c.chunk_index = j.at("chunk_index").get<std::size_t>();
        c.period = parse_period(j.at("period").get<std::string>());
        c.year = j.value("year", 0);
        c.source = j.value("source", std::string{});
        c.text = j.at("text").get<std::string>();
        c.token_count = j.value("token_count", std::size_t{0});
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed chunk row: ") + e.what());
    } catch (const ValidationError& e) {
        throw DataError(std::string("malformed chunk row: ") + e.what());
    }
}

void write_chunks(std::ostream& out, const std::vector<Chunk>& chunks) {
    for (const auto& c : chunks) out << to_json(c).dump() << '\n';
}

std::vector<Chunk> read_chunks(std::istream& in) {
    std::vector<Chunk> chunks;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            chunks.push_back(chunk_from_json(nlohmann::ordered_json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("chunks line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
        } catch (const DataError& e) {
            throw DataError("chunks line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return chunks;
}

std::vector<Chunk> read_chunks_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open chunks file " + path);
    return read_chunks(in);
}

}  // namespace ssd
