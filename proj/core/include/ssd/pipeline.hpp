#pragma once

#include "ssd/clustering.hpp"
#include "ssd/corpus.hpp"
#include "ssd/embeddings.hpp"
#include "ssd/projection.hpp"
#include "ssd/shift.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ssd {

struct PipelineConfig {
    struct Paths {
        std::filesystem::path old_corpus;
        std::filesystem::path new_corpus;
        std::filesystem::path vocab;
        std::filesystem::path targets;
        std::filesystem::path store;
        std::filesystem::path output_dir;
    } paths;
    // "file" serves paths.store; "http:<url>" or "http://..." queries a service.
    std::string backend = "file";
    CleaningConfig cleaning;
    std::size_t max_chunk_tokens = kDefaultMaxChunkTokens;
    FetchOptions fetch;
    std::size_t max_per_period = 0;  // 0 keeps every occurrence
    ClusteringConfig clustering;
    FrequencyRule frequency;
    double change_threshold = kDefaultChangeThreshold;
    ProjectionMethod projection = ProjectionMethod::tsne;
    TsneOptions tsne;
    std::optional<std::uint64_t> seed;
    int workers = 1;

    // Throws ValidationError listing every problem, one per line, each
    // prefixed with the offending field (e.g. "paths.vocab").
    void validate() const;
    std::string backend_spec() const;
};

// Relative paths are resolved against the config file's directory.
PipelineConfig load_pipeline_config(const std::filesystem::path& file);
PipelineConfig parse_pipeline_config(const std::string& yaml, const std::filesystem::path& base_dir);
nlohmann::ordered_json to_json(const PipelineConfig& config);

struct ArtifactRecord {
    std::string path;  // relative to the output directory
    std::string sha256;
};

struct StageRecord {
    std::string name;
    std::vector<ArtifactRecord> artifacts;
};

struct PipelineRun {
    std::vector<StageRecord> stages;
    std::vector<std::pair<std::string, std::string>> skipped_words;  // word, reason
    std::filesystem::path manifest_path;
};

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

// Runs clean, chunk, find, embed, cluster, shift and dwug, then writes
// manifest.json into the output directory. A stage failure is rethrown with
// the stage name prefixed; the exception keeps its kind.
PipelineRun run_pipeline(const PipelineConfig& config);

}  // namespace ssd
