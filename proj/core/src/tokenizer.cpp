#include "ssd/tokenizer.hpp"

#include "ssd/error.hpp"
#include "ssd/text.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace ssd {

Vocabulary::Vocabulary(std::vector<std::string> entries, VocabularyOptions options)
    : entries_(std::move(entries)), options_(std::move(options)) {
    if (options_.continuation_marker.empty()) {
        throw ValidationError("vocabulary continuation marker must be non-empty");
    }
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].empty()) {
            throw ValidationError("vocabulary entry " + std::to_string(i) + " is empty");
        }
        if (!text::is_valid_utf8(entries_[i])) {
            throw ValidationError("vocabulary entry " + std::to_string(i) + " is not valid UTF-8");
        }
        auto [it, inserted] = index_.emplace(entries_[i], static_cast<int>(i));
        if (!inserted) {
            throw ValidationError("duplicate vocabulary entry '" + entries_[i] + "' at ids " +
                                  std::to_string(it->second) + " and " + std::to_string(i));
        }
    }
    auto unk = index_.find(options_.unk_token);
    if (unk == index_.end()) {
        throw ValidationError("unk token '" + options_.unk_token + "' not in vocabulary");
    }
    unk_id_ = unk->second;
}

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& vocab_file) {
    auto p = vocab_file;
    p.replace_extension(".json");
    return p;
}

}  // namespace

Vocabulary Vocabulary::load(const std::filesystem::path& vocab_file) {
    std::ifstream in(vocab_file);
    if (!in) throw ValidationError("cannot open vocabulary file " + vocab_file.string());
    std::vector<std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        entries.push_back(line);
    }
    // A trailing newline yields no extra entry; an interior blank line is an error.
    VocabularyOptions options;
    const auto sidecar = sidecar_path(vocab_file);
    if (sidecar != vocab_file && std::filesystem::exists(sidecar)) {
        std::ifstream js(sidecar);
        nlohmann::json j;
        try {
            js >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("vocabulary sidecar " + sidecar.string() + ": " + e.what());
        }
        options.continuation_marker = j.value("continuation_marker", options.continuation_marker);
        options.cased = j.value("cased", options.cased);
        options.unk_token = j.value("unk_token", options.unk_token);
    }
    return Vocabulary(std::move(entries), std::move(options));
}

void Vocabulary::save(const std::filesystem::path& vocab_file) const {
    std::ofstream out(vocab_file);
    for (const auto& e : entries_) out << e << '\n';
    std::ofstream js(sidecar_path(vocab_file));
    js << nlohmann::json{{"continuation_marker", options_.continuation_marker},
                         {"cased", options_.cased},
                         {"unk_token", options_.unk_token}}
              .dump(2)
       << '\n';
}

std::optional<int> Vocabulary::id(const std::string& piece) const {
    auto it = index_.find(piece);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

namespace {

std::vector<WordSpan> split_words(const std::vector<text::CodePoint>& cps) {
    std::vector<WordSpan> words;
    std::size_t i = 0;
    const std::size_t n = cps.size();
    auto byte_end = [&](std::size_t k) { return cps[k].byte_offset + cps[k].byte_length; };
    while (i < n) {
        if (text::is_space(cps[i].value)) {
            ++i;
            continue;
        }
        if (text::is_punct(cps[i].value)) {
            words.push_back({i, i + 1, cps[i].byte_offset, byte_end(i), true});
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && !text::is_space(cps[j].value) && !text::is_punct(cps[j].value)) ++j;
        words.push_back({i, j, cps[i].byte_offset, byte_end(j - 1), false});
        i = j;
    }
    return words;
}

void tokenize_word(const std::vector<text::CodePoint>& cps, const WordSpan& w, const Vocabulary& vocab,
                   std::vector<TokenSpan>& out) {
    const auto& opts = vocab.options();
    // Normalized code points, each remembering the source code point it came from.
    std::u32string norm;
    std::vector<std::size_t> origin;
    for (std::size_t k = w.char_start; k < w.char_end; ++k) {
        if (opts.cased) {
            norm.push_back(cps[k].value);
            origin.push_back(k);
        } else {
            for (char32_t c : text::fold_uncased(cps[k].value)) {
                norm.push_back(c);
                origin.push_back(k);
            }
        }
    }
    auto byte_at = [&](std::size_t cp_index) {
        return cp_index < cps.size() ? cps[cp_index].byte_offset : w.byte_end;
    };
    auto push_unk = [&] {
        out.push_back({opts.unk_token, w.char_start, w.char_end, false, vocab.unk_id(), w.byte_start, w.byte_end});
    };
    if (norm.empty() || norm.size() > kMaxCharsPerWord) {
        push_unk();
        return;
    }

    const std::size_t first_out = out.size();
    std::size_t start = 0;
    while (start < norm.size()) {
        std::size_t end = norm.size();
        std::optional<int> found;
        std::string candidate;
        while (end > start) {
            candidate = start > 0 ? opts.continuation_marker : std::string{};
            candidate += text::encode(norm.substr(start, end - start));
            found = vocab.id(candidate);
            if (found) break;
            --end;
        }
        if (!found) {
            out.resize(first_out);
            push_unk();
            return;
        }
        const std::size_t cs = start == 0 ? w.char_start : origin[start];
        const std::size_t ce = end == norm.size() ? w.char_end : origin[end];
        out.push_back({std::move(candidate), cs, ce, start > 0, *found, byte_at(cs),
                       ce == w.char_end ? w.byte_end : byte_at(ce)});
        start = end;
    }
}

}  // namespace

std::vector<WordSpan> split_words(std::string_view text) { return split_words(text::decode(text)); }

std::vector<TokenSpan> tokenize(std::string_view text, const Vocabulary& vocab) {
    const auto cps = text::decode(text);
    std::vector<TokenSpan> out;
    for (const auto& w : split_words(cps)) tokenize_word(cps, w, vocab, out);
    return out;
}

std::size_t count_tokens(std::string_view text, const Vocabulary& vocab) {
    return tokenize(text, vocab).size();
}

std::vector<std::size_t> count_tokens_per_word(std::string_view text, const Vocabulary& vocab) {
    const auto cps = text::decode(text);
    const auto words = split_words(cps);
    std::vector<std::size_t> counts;
    counts.reserve(words.size());
    std::vector<TokenSpan> scratch;
    for (const auto& w : words) {
        scratch.clear();
        tokenize_word(cps, w, vocab, scratch);
        counts.push_back(scratch.size());
    }
    return counts;
}

}  // namespace ssd
