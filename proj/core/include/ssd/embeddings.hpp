#pragma once

#include "ssd/corpus.hpp"
#include "ssd/occurrences.hpp"

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace ssd {

// Per-occurrence embedding vectors of one shared dimension, kept in
// insertion order.
class EmbeddingStore {
public:
    // dimension 0 means "taken from the first record added".
    explicit EmbeddingStore(std::size_t dimension = 0, std::string model_tag = {});

    // Throws DataError on dimension mismatch, NaN/Inf, or a duplicate id.
    void add(const std::string& occurrence_id, std::span<const float> vector);

    bool contains(const std::string& occurrence_id) const { return index_.count(occurrence_id) != 0; }
    // Throws DataError for an unknown id.
    std::span<const float> at(const std::string& occurrence_id) const;
    std::span<const float> row(std::size_t i) const {
        return {values_.data() + i * dimension_, dimension_};
    }

    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }
    std::size_t dimension() const noexcept { return dimension_; }
    const std::string& model_tag() const noexcept { return model_tag_; }
    void set_model_tag(std::string tag) { model_tag_ = std::move(tag); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }

    bool operator==(const EmbeddingStore& other) const;

private:
    std::size_t dimension_;
    std::string model_tag_;
    std::vector<std::string> ids_;
    std::vector<float> values_;
    std::unordered_map<std::string, std::size_t> index_;
};

// SSDE binary store, little-endian:
//   "SSDE" | u32 version=1 | u32 dimension | u64 count | u32 len + model_tag
//   then per record: u32 len + id | dimension x f32
inline constexpr std::uint32_t kStoreVersion = 1;

std::vector<std::uint8_t> serialize_store(const EmbeddingStore& store);    // throws ValidationError if empty
EmbeddingStore parse_store(std::span<const std::uint8_t> bytes);          // throws DataError with byte offset
void write_store(const EmbeddingStore& store, const std::filesystem::path& path);
EmbeddingStore read_store(const std::filesystem::path& path);

struct EmbedRequest {
    std::string occurrence_id;
    std::string text;  // chunk text
    std::size_t char_start = 0;
    std::size_t char_end = 0;
};

// Produces one vector per request. A nullopt entry means the backend has no
// vector for that request; transport failures throw BackendError.
class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::string model_tag() const = 0;
    virtual bool needs_text() const { return true; }
    virtual std::vector<std::optional<std::vector<float>>> embed(std::span<const EmbedRequest> batch) = 0;
};

// Serves vectors from a precomputed store, keyed by occurrence id.
class FileBackend final : public EmbeddingBackend {
public:
    explicit FileBackend(EmbeddingStore store) : store_(std::move(store)) {}
    std::string model_tag() const override { return store_.model_tag(); }
    bool needs_text() const override { return false; }
    std::vector<std::optional<std::vector<float>>> embed(std::span<const EmbedRequest> batch) override;

private:
    EmbeddingStore store_;
};

struct HttpBackendOptions {
    std::chrono::milliseconds timeout{30000};
};

// POST <url>/embed {"texts": [...], "spans": [[start, end], ...]}
//   -> {"dimension": d, "vectors": [[...], ...]}
class HttpBackend final : public EmbeddingBackend {
public:
    explicit HttpBackend(std::string url, HttpBackendOptions options = {});
    std::string model_tag() const override { return "http:" + url_; }
    std::vector<std::optional<std::vector<float>>> embed(std::span<const EmbedRequest> batch) override;

    // Validates a decoded /embed reply against the batch size.
    static std::vector<std::optional<std::vector<float>>> decode_reply(const nlohmann::json& reply,
                                                                       std::size_t expected);

private:
    std::string url_;
    std::string scheme_host_port_;
    std::string path_;
    HttpBackendOptions options_;
};

// "file:<store.ssde>" or "http:<url>"; throws ValidationError otherwise.
std::unique_ptr<EmbeddingBackend> make_backend(const std::string& spec);

struct FetchOptions {
    std::size_t batch_size = 32;
    int max_retries = 2;
};

struct FetchResult {
    EmbeddingStore store;
    std::vector<std::string> missing;           // ids without a vector, in occurrence order
    std::vector<std::string> backend_failures;  // one message per batch that exhausted its retries
};

using ChunkKey = std::pair<std::string, std::size_t>;
std::map<ChunkKey, const Chunk*> index_chunks(const std::vector<Chunk>& chunks);

// Batches requests through the backend with per-batch retries. Entries of a
// batch that exhausted its retries stay nullopt and its last error is
// appended to failures.
std::vector<std::optional<std::vector<float>>> embed_requests(std::span<const EmbedRequest> requests,
                                                              EmbeddingBackend& backend, const FetchOptions& options,
                                                              std::vector<std::string>& failures);

FetchResult fetch_embeddings(const std::vector<Occurrence>& occurrences,
                             const std::map<ChunkKey, const Chunk*>& chunks, EmbeddingBackend& backend,
                             const FetchOptions& options = {});

// Keeps at most max_per_period occurrences per (word, period), chosen by a
// seeded hash of the id so the subset is stable across platforms.
std::vector<Occurrence> sample_per_period(const std::vector<Occurrence>& occurrences, std::size_t max_per_period,
                                          std::uint64_t seed);

struct PeriodSplit {
    std::vector<std::string> old_ids;
    std::vector<std::string> new_ids;
    Eigen::MatrixXd old_vectors;  // one row per id
    Eigen::MatrixXd new_vectors;
};

// Partitions stored vectors by occurrence period, each side ordered by id.
// Throws DataError listing any occurrence ids the store lacks.
PeriodSplit split_by_period(const EmbeddingStore& store, const std::vector<Occurrence>& occurrences);

}  // namespace ssd
