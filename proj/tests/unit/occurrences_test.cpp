#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "ssd/error.hpp"
#include "ssd/occurrences.hpp"
#include "ssd/text.hpp"

namespace {

using ssd::MatchKind;
using ssd::PlanEntry;
using ssd::TargetWord;

ssd::Vocabulary vocab() {
    return ssd::Vocabulary({"[UNK]", "gent", "##e", "##es", "jent", "la", "canta", "y", "más", "luc", "luz",
                            "rey", "g", "##ente", "pura", "gen"});
}

TargetWord target(std::string lemma, std::vector<std::string> forms) {
    TargetWord t;
    t.lemma = std::move(lemma);
    t.surface_forms = std::move(forms);
    return t;
}

ssd::Chunk chunk(std::string text, ssd::Period p = ssd::Period::old_period, std::string doc = "d1") {
    ssd::Chunk c;
    c.doc_id = std::move(doc);
    c.text = std::move(text);
    c.period = p;
    return c;
}

TEST(SearchPlan, GenteFollowsLemmaSurfaceThenPrefixes) {
    const auto plan = ssd::build_search_plan(target("gente", {"jente"}), vocab());
    const std::vector<PlanEntry> expected = {{"gente", MatchKind::exact},
                                             {"jente", MatchKind::surface},
                                             {"gent", MatchKind::subword_prefix},
                                             {"jent", MatchKind::subword_prefix}};
    EXPECT_EQ(plan.entries, expected);
    EXPECT_TRUE(plan.warnings.empty());
}

TEST(SearchPlan, SinglePieceLemmaWithoutFormsIsExactOnly) {
    const auto plan = ssd::build_search_plan(target("rey", {}), vocab());
    ASSERT_EQ(plan.entries.size(), 1u);
    EXPECT_EQ(plan.entries[0], (PlanEntry{"rey", MatchKind::exact}));
}

TEST(SearchPlan, LuzesComesBeforeAnyPrefix) {
    const auto plan = ssd::build_search_plan(target("luces", {"luzes"}), vocab());
    ASSERT_GE(plan.entries.size(), 2u);
    EXPECT_EQ(plan.entries[1], (PlanEntry{"luzes", MatchKind::surface}));
    for (std::size_t i = 2; i < plan.entries.size(); ++i) EXPECT_EQ(plan.entries[i].kind, MatchKind::subword_prefix);
}

TEST(SearchPlan, ShortPrefixesDropped) {
    ssd::Vocabulary v({"[UNK]", "g", "##ente"});
    const auto plan = ssd::build_search_plan(target("gente", {}), v);
    ASSERT_EQ(plan.entries.size(), 1u);
}

TEST(SearchPlan, UnkLemmaWarnsAndKeepsExactStages) {
    const auto plan = ssd::build_search_plan(target("zzzq", {"zzzx"}), vocab());
    ASSERT_EQ(plan.entries.size(), 2u);
    EXPECT_EQ(plan.warnings.size(), 1u);
}

TEST(SearchPlan, InvalidTargetsRejected) {
    EXPECT_THROW(ssd::build_search_plan(target("", {}), vocab()), ssd::ValidationError);
    EXPECT_THROW(ssd::build_search_plan(target("gente", {"gente"}), vocab()), ssd::ValidationError);
    EXPECT_THROW(ssd::build_search_plan(target("gente", {"jente", "jente"}), vocab()), ssd::ValidationError);
}

TEST(FindOccurrences, JenteIsASurfaceMatch) {
    const auto occ = ssd::find_occurrences({chunk("la jente canta")}, target("gente", {"jente"}), vocab());
    ASSERT_EQ(occ.size(), 1u);
    EXPECT_EQ(occ[0].matched_form, "jente");
    EXPECT_EQ(occ[0].match_kind, MatchKind::surface);
    EXPECT_EQ(occ[0].char_start, 3u);
    EXPECT_EQ(occ[0].char_end, 8u);
}

TEST(FindOccurrences, GenerosidadIsNotMatched) {
    const auto occ = ssd::find_occurrences({chunk("generosidad pura")}, target("gente", {"jente"}), vocab());
    EXPECT_TRUE(occ.empty());
}

TEST(FindOccurrences, RepeatedExactMatches) {
    const auto occ = ssd::find_occurrences({chunk("gente y más gente")}, target("gente", {"jente"}), vocab());
    ASSERT_EQ(occ.size(), 2u);
    EXPECT_EQ(occ[0].match_kind, MatchKind::exact);
    EXPECT_EQ(occ[1].match_kind, MatchKind::exact);
    EXPECT_EQ(occ[1].char_start, 12u);
    EXPECT_NE(occ[0].id, occ[1].id);
}

TEST(FindOccurrences, PrefixMatchesInflectedWords) {
    const auto occ = ssd::find_occurrences({chunk("las gentes, jentío")}, target("gente", {"jente"}), vocab());
    ASSERT_EQ(occ.size(), 2u);
    EXPECT_EQ(occ[0].matched_form, "gentes");
    EXPECT_EQ(occ[0].plan_form, "gent");
    EXPECT_EQ(occ[1].matched_form, "jentío");
    EXPECT_EQ(occ[1].plan_form, "jent");
}

TEST(FindOccurrences, CasePolicyPreservesOriginalCasing) {
    const auto occ = ssd::find_occurrences({chunk("¡GENTE! y Jente.")}, target("gente", {"jente"}), vocab());
    ASSERT_EQ(occ.size(), 2u);
    EXPECT_EQ(occ[0].matched_form, "GENTE");
    EXPECT_EQ(occ[0].char_start, 1u);
    EXPECT_EQ(occ[1].matched_form, "Jente");
    ssd::MatchOptions exact;
    exact.case_insensitive = false;
    EXPECT_TRUE(ssd::find_occurrences({chunk("GENTE")}, target("gente", {}), vocab(), exact).empty());
}

std::string slice(const std::string& s, std::size_t a, std::size_t b) {
    std::u32string cps;
    for (const auto& cp : ssd::text::decode(s)) cps.push_back(cp.value);
    return ssd::text::encode(cps.substr(a, b - a));
}

TEST(FindOccurrencesProperty, SpansReextractAndSurfaceFormsAreMonotone) {
    std::mt19937_64 rng(3);
    static const std::vector<std::string> words = {"gente", "jente", "Gentes", "(gente)", "jentío", "la", "más",
                                                   "generosidad", "ágente", "gent", "y", "«jente»", "luzes"};
    std::vector<ssd::Chunk> chunks;
    for (int i = 0; i < 200; ++i) {
        std::string text;
        for (int k = 0; k < 15; ++k) text += words[rng() % words.size()] + " ";
        auto c = chunk(text, i % 2 ? ssd::Period::new_period : ssd::Period::old_period, "d" + std::to_string(i));
        chunks.push_back(c);
    }
    const auto without = ssd::find_occurrences(chunks, target("gente", {}), vocab());
    const auto with = ssd::find_occurrences(chunks, target("gente", {"jente"}), vocab());
    std::set<std::string> with_ids;
    for (const auto& o : with) {
        with_ids.insert(o.id);
        const auto& c = *std::find_if(chunks.begin(), chunks.end(), [&](const auto& ch) { return ch.doc_id == o.doc_id; });
        EXPECT_EQ(slice(c.text, o.char_start, o.char_end), o.matched_form);
    }
    EXPECT_EQ(with_ids.size(), with.size());
    for (const auto& o : without) EXPECT_TRUE(with_ids.count(o.id)) << o.id;
    EXPECT_GT(with.size(), without.size());
    EXPECT_EQ(ssd::find_occurrences(chunks, target("gente", {"jente"}), vocab()), with);
}

TEST(Census, EmptyPeriodIsInsufficient) {
    std::vector<ssd::Occurrence> occ(50);
    const auto c = ssd::occurrence_census(occ, 10);
    EXPECT_EQ(c.old_count, 50u);
    EXPECT_EQ(c.new_count, 0u);
    EXPECT_FALSE(c.sufficient);
}

TEST(Census, BoundaryIsInclusiveAndCountsSum) {
    std::vector<ssd::Occurrence> occ(22);
    for (std::size_t i = 12; i < 22; ++i) occ[i].period = ssd::Period::new_period;
    const auto c = ssd::occurrence_census(occ, 10);
    EXPECT_EQ(c.old_count, 12u);
    EXPECT_EQ(c.new_count, 10u);
    EXPECT_TRUE(c.sufficient);
    EXPECT_EQ(c.old_count + c.new_count, occ.size());
}

TEST(Targets, ParsesArrayAndRejectsDuplicates) {
    const auto t = ssd::targets_from_json(nlohmann::json::parse(
        R"([{"lemma":"gente","surface_forms":["jente"]},{"lemma":"rey","min_occurrences_per_period":3}])"));
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[0].surface_forms, std::vector<std::string>{"jente"});
    EXPECT_EQ(t[1].min_occurrences_per_period, 3u);
    EXPECT_EQ(t[0].min_occurrences_per_period, 10u);
    EXPECT_THROW(ssd::targets_from_json(nlohmann::json::parse(R"([{"lemma":"a"},{"lemma":"a"}])")),
                 ssd::ValidationError);
    EXPECT_THROW(ssd::targets_from_json(nlohmann::json::parse(R"({"lemma":"a"})")), ssd::ValidationError);
}

TEST(OccurrenceIo, JsonLinesRoundTrip) {
    const auto occ = ssd::find_occurrences({chunk("la jente y gente", ssd::Period::new_period)},
                                           target("gente", {"jente"}), vocab());
    std::ostringstream out;
    ssd::write_occurrences(out, occ);
    std::istringstream in(out.str());
    EXPECT_EQ(ssd::read_occurrences(in), occ);
}

}  // namespace
