#include "ssd/synthetic.hpp"

#include "ssd/error.hpp"
#include "ssd/text.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>

namespace ssd::synthetic {

std::uint64_t Rng::next() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
}

std::size_t Rng::index(std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(uniform() * n)); }

namespace {

const std::vector<std::string> kFunction = {"el", "la", "los", "las", "de", "en", "con", "por", "un", "una",
                                            "que", "del", "al", "y", "se", "muy", "pero", "sobre", "entre", "su"};
const std::vector<std::string> kNouns = {"pueblo", "plaza", "casa",  "camino", "noche",  "ciudad",
                                         "campo",  "iglesia", "mar", "tierra", "cielo",  "palacio",
                                         "calle",  "mercado", "puerto", "libro", "carta", "tiempo",
                                         "hombre", "mujer", "guerra", "fiesta", "viento", "río"};
const std::vector<std::string> kVerbs = {"veía", "hablaba", "miraba", "llegó", "dijo", "tenía",
                                         "esperaba", "buscaba", "cantaba", "guardaba", "pedía", "traía"};
const std::vector<std::string> kAdjectives = {"grande", "antiguo", "nuevo", "claro", "oscuro", "alto",
                                              "pobre", "rico", "triste", "alegre", "viejo", "largo"};
const std::vector<std::string> kSubwords = {"luc", "luz", "##es", "servidor", "gent", "jent", "##e"};
const std::vector<std::string> kWholeTargets = {"rey", "sublime"};
const std::string kPunct = ".,;:!?¡¿()\"'-";

struct SensePlan {
    std::string lemma;
    std::vector<std::string> surface_forms;
    // Rows per sense and period; index 0 old, 1 new.
    std::vector<std::array<std::size_t, 2>> rows;
    std::vector<double> drift;  // new-period displacement per sense
};

std::vector<SensePlan> sense_plans(std::size_t per_word) {
    const std::size_t third = per_word / 3;
    const std::size_t half = per_word / 2;
    return {
        {"rey", {}, {{per_word, per_word}}, {0.05}},
        {"luces", {"luzes"}, {{half, half}, {per_word - half, per_word - half}}, {0.08, 0.10}},
        {"servidores", {}, {{per_word, per_word - third}, {0, third}}, {0.20, 0.0}},
        {"sublime", {}, {{per_word - third, per_word}, {third, 0}}, {0.06, 0.0}},
        {"gente", {"jente"}, {{per_word - 16 * per_word / 36, per_word - 16 * per_word / 36},
                              {16 * per_word / 36, 16 * per_word / 36}},
         {0.05, 1.2}},
    };
}

std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
    return v[rng.index(v.size())];
}

std::string filler_sentence(Rng& rng) {
    std::string s = capitalize(pick(rng, kFunction)) + " " + pick(rng, kNouns) + " " + pick(rng, kAdjectives) + " " +
                    pick(rng, kVerbs) + " " + pick(rng, kFunction) + " " + pick(rng, kNouns);
    if (rng.uniform() < 0.3) s += ", " + pick(rng, kFunction) + " " + pick(rng, kNouns);
    return s + (rng.uniform() < 0.15 ? ";" : ".");
}

// A sentence holding `form` once; returns the sentence and the form's
// code-point offset inside it.
std::pair<std::string, std::size_t> target_sentence(Rng& rng, const std::string& form, bool sentence_initial) {
    std::string prefix;
    std::string f = form;
    if (sentence_initial) {
        f = capitalize(f);
    } else {
        prefix = capitalize(pick(rng, kFunction)) + " " + pick(rng, kNouns) + " " + pick(rng, kVerbs) + " " +
                 pick(rng, kFunction) + " ";
    }
    std::string s = prefix + f + " " + pick(rng, kAdjectives) + " " + pick(rng, kFunction) + " " + pick(rng, kNouns);
    s += rng.uniform() < 0.2 ? "!" : ".";
    return {s, text::length(prefix)};
}

Eigen::VectorXd basis(std::size_t d, std::size_t axis, double scale) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    v(static_cast<Eigen::Index>(axis % d)) = scale;
    return v;
}

std::vector<float> sample_vector(Rng& rng, const Eigen::VectorXd& center, double noise) {
    std::vector<float> out(static_cast<std::size_t>(center.size()));
    for (Eigen::Index i = 0; i < center.size(); ++i) {
        out[static_cast<std::size_t>(i)] = static_cast<float>(center(i) + noise * rng.normal());
    }
    return out;
}

struct Planted {
    std::string lemma;
    int sense;
};

}  // namespace

Vocabulary fixture_vocabulary() {
    std::vector<std::string> entries = {"[UNK]"};
    std::set<std::string> seen(entries.begin(), entries.end());
    // The vocabulary is uncased, so entries are stored folded.
    auto add = [&](const std::string& raw) {
        std::string e;
        for (const auto& cp : text::decode(raw)) {
            for (char32_t f : text::fold_uncased(cp.value)) text::append_utf8(e, f);
        }
        if (!e.empty() && e != "##" && seen.insert(e).second) entries.push_back(e);
    };
    for (const auto* list : {&kFunction, &kNouns, &kVerbs, &kAdjectives, &kSubwords, &kWholeTargets}) {
        for (const auto& w : *list) add(w);
    }
    for (char c = 'a'; c <= 'z'; ++c) {
        add(std::string(1, c));
        add("##" + std::string(1, c));
    }
    for (const auto& cp : text::decode(kPunct)) {
        std::string s;
        text::append_utf8(s, cp.value);
        add(s);
    }
    for (char c = '0'; c <= '9'; ++c) {
        add(std::string(1, c));
        add("##" + std::string(1, c));
    }
    VocabularyOptions options;
    options.cased = false;
    return Vocabulary(std::move(entries), options);
}

Fixture make_fixture(const FixtureOptions& options) {
    if (options.rows_per_period < 60) throw ValidationError("fixture needs at least 60 rows per period");
    if (options.dimension < 12) throw ValidationError("fixture needs dimension >= 12");
    Rng rng(options.seed);
    Fixture fx{fixture_vocabulary(), {}, {}, {}, EmbeddingStore(options.dimension, "synthetic"), {}, {}};

    const std::size_t noisy = options.rows_per_period / 10;
    const std::size_t per_word = (options.rows_per_period - noisy) / 5;
    const auto plans = sense_plans(per_word);
    for (const auto& p : plans) fx.targets.push_back({p.lemma, p.surface_forms, 10});

    // Sense s of word w sits on its own axis; the new period adds a drift
    // along a shared axis.
    const std::size_t d = options.dimension;
    auto center = [&](std::size_t w, std::size_t s, int period) {
        Eigen::VectorXd c = basis(d, 2 * w + s, 4.0);
        if (period == 1) c += basis(d, d - 1, 4.0 * plans[w].drift[s]);
        return c;
    };

    std::map<std::string, Planted> planted_docs;
    for (int period = 0; period < 2; ++period) {
        auto& docs = period == 0 ? fx.old_docs : fx.new_docs;
        const std::string tag = period == 0 ? "old" : "new";
        const int year_base = period == 0 ? 1850 : 1990;
        std::vector<std::pair<std::size_t, std::size_t>> slots;  // (word, sense)
        for (std::size_t w = 0; w < plans.size(); ++w) {
            for (std::size_t s = 0; s < plans[w].rows.size(); ++s) {
                for (std::size_t k = 0; k < plans[w].rows[s][static_cast<std::size_t>(period)]; ++k) {
                    slots.emplace_back(w, s);
                }
            }
        }
        for (std::size_t i = slots.size(); i > 1; --i) std::swap(slots[i - 1], slots[rng.index(i)]);

        std::size_t row = 0;
        auto next_id = [&] {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%s-%04zu", tag.c_str(), ++row);
            return std::string(buf);
        };
        for (const auto& [w, s] : slots) {
            const auto& plan = plans[w];
            std::string form = plan.lemma;
            if (period == 0 && !plan.surface_forms.empty() && rng.uniform() < 0.35) form = plan.surface_forms[0];
            Document doc;
            doc.id = next_id();
            doc.source = period == 0 ? "archivo-historico" : "prensa-moderna";
            doc.year = year_base + static_cast<int>(rng.index(40));
            doc.ocr_word_confidence = period == 0 ? 0.6 + 0.4 * rng.uniform() : 0.99;
            std::string body;
            const std::size_t before = rng.index(3);
            // Every twelfth row is long enough to need several chunks.
            const std::size_t after = row % 12 == 0 ? 45 : rng.index(3);
            for (std::size_t k = 0; k < before; ++k) body += filler_sentence(rng) + " ";
            body += target_sentence(rng, form, rng.uniform() < 0.3).first;
            for (std::size_t k = 0; k < after; ++k) body += (k % 9 == 8 ? "\n" : " ") + filler_sentence(rng);
            doc.text = body;
            planted_docs[doc.id] = {plan.lemma, static_cast<int>(s)};
            docs.push_back(std::move(doc));
        }

        // Rows the cleaner must drop.
        const std::size_t base_rows = docs.size();
        for (std::size_t k = 0; k < noisy; ++k) {
            Document doc;
            doc.id = next_id();
            doc.source = "ruido";
            doc.year = year_base;
            switch (k % 5) {
                case 0:
                    doc.text = filler_sentence(rng) + " " + filler_sentence(rng);
                    doc.ocr_word_confidence = 0.2 + 0.2 * rng.uniform();
                    break;
                case 1: doc.text = "12 34 -- 56 ## 78 %% 90 || " + std::to_string(k) + " 22 33 el"; break;
                case 2: doc.text = "el " + pick(rng, kNouns) + " " + std::to_string(k) + "."; break;
                case 3: doc.text = docs[rng.index(base_rows)].text; break;
                default: doc.text = "   "; break;
            }
            docs.push_back(std::move(doc));
        }
    }

    // Occurrence ids follow from the default cleaning, chunking and search.
    for (int period = 0; period < 2; ++period) {
        const auto& docs = period == 0 ? fx.old_docs : fx.new_docs;
        const auto cleaned = clean(docs, CleaningConfig{}, fx.vocab);
        const auto chunks = chunk(cleaned.documents, kDefaultMaxChunkTokens,
                                  period == 0 ? Period::old_period : Period::new_period, fx.vocab);
        for (std::size_t w = 0; w < plans.size(); ++w) {
            for (const auto& occ : find_occurrences(chunks.chunks, fx.targets[w], fx.vocab)) {
                const auto& planted = planted_docs.at(occ.doc_id);
                if (planted.lemma != occ.word) continue;
                const auto s = static_cast<std::size_t>(planted.sense);
                fx.store.add(occ.id, sample_vector(rng, center(w, s, period), options.noise));
                fx.planted_sense[occ.id] = planted.sense;
            }
        }
    }

    // Annotated pairs: rating 1-2 within one sense, 3-4 across senses.
    std::size_t pair_no = 0;
    for (std::size_t w = 0; w < plans.size(); ++w) {
        const auto& plan = plans[w];
        const std::size_t senses = plan.rows.size();
        for (int k = 0; k < 8; ++k) {
            const std::size_t sa = rng.index(senses);
            const bool differ = senses > 1 && k % 2 == 1;
            const std::size_t sb = differ ? (sa + 1) % senses : sa;
            AnnotatedPair p;
            p.id = "pair-" + std::to_string(++pair_no);
            p.word = plan.lemma;
            const auto [ta, oa] = target_sentence(rng, plan.lemma, false);
            const auto [tb, ob] = target_sentence(rng, plan.lemma, false);
            p.sentence_a = ta;
            p.sentence_b = tb;
            const std::size_t len = text::length(plan.lemma);
            p.span_a = {oa, oa + len};
            p.span_b = {ob, ob + len};
            p.rating = differ ? 3 + static_cast<int>(rng.index(2)) : 1 + static_cast<int>(rng.index(2));
            auto centroid = [&](std::size_t s) {
                Eigen::VectorXd c = center(w, s, 0);
                if (plan.rows[s][0] && plan.rows[s][1]) c = 0.5 * (c + center(w, s, 1));
                else if (plan.rows[s][1]) c = center(w, s, 1);
                return c;
            };
            fx.store.add(p.id + "/a", sample_vector(rng, centroid(sa), 0.1));
            fx.store.add(p.id + "/b", sample_vector(rng, centroid(sb), 0.1));
            fx.planted_sense[p.id + "/a"] = static_cast<int>(sa);
            fx.planted_sense[p.id + "/b"] = static_cast<int>(sb);
            fx.pairs.push_back(std::move(p));
        }
    }
    return fx;
}

void write_fixture(const Fixture& fixture, const std::filesystem::path& dir, std::uint64_t seed) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
    fixture.vocab.save(dir / "vocab.txt");
    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw DataError("cannot write " + (dir / name).string());
        return out;
    };
    {
        auto out = open("old.jsonl");
        write_documents(out, fixture.old_docs);
    }
    {
        auto out = open("new.jsonl");
        write_documents(out, fixture.new_docs);
    }
    {
        auto out = open("targets.json");
        auto arr = nlohmann::ordered_json::array();
        for (const auto& t : fixture.targets) {
            arr.push_back({{"lemma", t.lemma},
                           {"surface_forms", t.surface_forms},
                           {"min_occurrences_per_period", t.min_occurrences_per_period}});
        }
        out << arr.dump(2) << '\n';
    }
    write_store(fixture.store, dir / "store.ssde");
    {
        auto out = open("pairs.jsonl");
        for (const auto& p : fixture.pairs) out << to_json(p).dump() << '\n';
    }
    {
        auto out = open("pipeline.yaml");
        out << "seed: " << seed << "\n"
            << "workers: 2\n"
            << "paths:\n"
            << "  old_corpus: old.jsonl\n"
            << "  new_corpus: new.jsonl\n"
            << "  vocab: vocab.txt\n"
            << "  targets: targets.json\n"
            << "  store: store.ssde\n"
            << "  output_dir: out\n"
            << "embed:\n"
            << "  backend: file\n"
            << "clustering:\n"
            << "  algorithm: ap\n"
            << "projection:\n"
            << "  method: tsne\n"
            << "  perplexity: 50\n";
    }
}

}  // namespace ssd::synthetic
