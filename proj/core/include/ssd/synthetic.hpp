#pragma once

#include "ssd/corpus.hpp"
#include "ssd/embeddings.hpp"
#include "ssd/eval.hpp"
#include "ssd/occurrences.hpp"
#include "ssd/tokenizer.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ssd::synthetic {

// Portable seeded draws (no dependence on the standard library's
// distribution implementations).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    double uniform();  // [0, 1)
    double normal();
    std::size_t index(std::size_t n);

private:
    std::uint64_t state_;
};

struct FixtureOptions {
    std::uint64_t seed = 7;
    std::size_t rows_per_period = 200;
    std::size_t dimension = 16;
    double noise = 0.25;
};

// A small two-period Spanish-like corpus with five target words whose
// usage embeddings follow a planted sense geometry:
//   rey         one continuous sense
//   luces       two continuous senses (old spelling "luzes")
//   servidores  gains a sense in the new period
//   sublime     loses a sense in the new period
//   gente       two senses, one drifting (old spelling "jente")
struct Fixture {
    Vocabulary vocab;
    std::vector<Document> old_docs;
    std::vector<Document> new_docs;
    std::vector<TargetWord> targets;
    EmbeddingStore store;                     // occurrence ids and pair usage ids
    std::vector<AnnotatedPair> pairs;
    std::map<std::string, int> planted_sense;  // occurrence id -> sense
};

Vocabulary fixture_vocabulary();
Fixture make_fixture(const FixtureOptions& options = {});

// Writes vocab.txt (+ vocab.json), old.jsonl, new.jsonl, targets.json,
// store.ssde, pairs.jsonl and pipeline.yaml into dir.
void write_fixture(const Fixture& fixture, const std::filesystem::path& dir, std::uint64_t seed = 7);

}  // namespace ssd::synthetic
