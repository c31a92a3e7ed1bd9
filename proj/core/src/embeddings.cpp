#include "ssd/embeddings.hpp"

#include "ssd/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <unordered_set>

namespace ssd {

EmbeddingStore::EmbeddingStore(std::size_t dimension, std::string model_tag)
    : dimension_(dimension), model_tag_(std::move(model_tag)) {}

void EmbeddingStore::add(const std::string& occurrence_id, std::span<const float> vector) {
    if (vector.empty()) throw DataError("embedding for '" + occurrence_id + "' is empty");
    if (dimension_ == 0) dimension_ = vector.size();
    if (vector.size() != dimension_) {
        throw DataError("embedding for '" + occurrence_id + "' has dimension " + std::to_string(vector.size()) +
                        ", store expects " + std::to_string(dimension_));
    }
    for (float v : vector) {
        if (!std::isfinite(v)) throw DataError("embedding for '" + occurrence_id + "' contains NaN or Inf");
    }
    if (!index_.emplace(occurrence_id, ids_.size()).second) {
        throw DataError("duplicate embedding id '" + occurrence_id + "'");
    }
    ids_.push_back(occurrence_id);
    values_.insert(values_.end(), vector.begin(), vector.end());
}

std::span<const float> EmbeddingStore::at(const std::string& occurrence_id) const {
    auto it = index_.find(occurrence_id);
    if (it == index_.end()) throw DataError("no embedding for occurrence '" + occurrence_id + "'");
    return row(it->second);
}

bool EmbeddingStore::operator==(const EmbeddingStore& other) const {
    if (dimension_ != other.dimension_ || model_tag_ != other.model_tag_ || ids_ != other.ids_) return false;
    // Bitwise comparison so the check means "byte-identical".
    return std::equal(values_.begin(), values_.end(), other.values_.begin(), other.values_.end(),
                      [](float a, float b) { return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b); });
}

namespace {

constexpr char kMagic[4] = {'S', 'S', 'D', 'E'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t position() const { return pos_; }
    bool at_end() const { return pos_ == bytes_.size(); }

    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n) {
            throw DataError("SSDE truncated at byte " + std::to_string(pos_) + " while reading " + what + " (need " +
                            std::to_string(n) + " bytes, have " + std::to_string(bytes_.size() - pos_) + ")");
        }
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    std::string str(const char* what) {
        const std::uint32_t len = u32(what);
        need(len, what);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
        pos_ += len;
        return s;
    }
    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_store(const EmbeddingStore& store) {
    if (store.empty()) throw ValidationError("refusing to write an empty embedding store");
    std::vector<std::uint8_t> out;
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put_u32(out, kStoreVersion);
    put_u32(out, static_cast<std::uint32_t>(store.dimension()));
    put_u64(out, store.size());
    put_string(out, store.model_tag());
    for (std::size_t i = 0; i < store.size(); ++i) {
        put_string(out, store.ids()[i]);
        for (float v : store.row(i)) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

EmbeddingStore parse_store(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    r.need(4, "magic");
    if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin(),
                    [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; })) {
        throw DataError("SSDE magic mismatch at byte 0");
    }
    r.u32("magic");
    const std::size_t version_at = r.position();
    const std::uint32_t version = r.u32("version");
    if (version != kStoreVersion) {
        throw DataError("unsupported SSDE version " + std::to_string(version) + " at byte " + std::to_string(version_at));
    }
    const std::size_t dim_at = r.position();
    const std::uint32_t dimension = r.u32("dimension");
    if (dimension == 0) throw DataError("SSDE dimension is 0 at byte " + std::to_string(dim_at));
    const std::uint64_t count = r.u64("record count");
    EmbeddingStore store(dimension, r.str("model tag"));
    std::vector<float> vec(dimension);
    for (std::uint64_t k = 0; k < count; ++k) {
        const std::size_t record_at = r.position();
        const std::string id = r.str("record id");
        for (auto& v : vec) v = r.f32("record vector");
        try {
            store.add(id, vec);
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + " (record " + std::to_string(k) + " at byte " +
                            std::to_string(record_at) + ")");
        }
    }
    if (!r.at_end()) {
        throw DataError("SSDE has " + std::to_string(bytes.size() - r.position()) + " trailing bytes at byte " +
                        std::to_string(r.position()));
    }
    return store;
}

void write_store(const EmbeddingStore& store, const std::filesystem::path& path) {
    const auto bytes = serialize_store(store);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing " + path.string());
}

EmbeddingStore read_store(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open embedding store " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return parse_store(bytes);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::vector<std::optional<std::vector<float>>> FileBackend::embed(std::span<const EmbedRequest> batch) {
    std::vector<std::optional<std::vector<float>>> out;
    out.reserve(batch.size());
    for (const auto& req : batch) {
        if (store_.contains(req.occurrence_id)) {
            const auto v = store_.at(req.occurrence_id);
            out.emplace_back(std::vector<float>(v.begin(), v.end()));
        } else {
            out.emplace_back(std::nullopt);
        }
    }
    return out;
}

std::unique_ptr<EmbeddingBackend> make_backend(const std::string& spec) {
    if (spec.starts_with("file:")) return std::make_unique<FileBackend>(read_store(spec.substr(5)));
    if (spec.starts_with("http:")) {
        std::string url = spec.substr(5);
        if (!url.starts_with("http://") && !url.starts_with("https://")) url = "http://" + url;
        return std::make_unique<HttpBackend>(url);
    }
    throw ValidationError("backend must be file:<store.ssde> or http:<url>, got '" + spec + "'");
}

std::map<ChunkKey, const Chunk*> index_chunks(const std::vector<Chunk>& chunks) {
    std::map<ChunkKey, const Chunk*> index;
    for (const auto& c : chunks) index.emplace(ChunkKey{c.doc_id, c.chunk_index}, &c);
    return index;
}

std::vector<std::optional<std::vector<float>>> embed_requests(std::span<const EmbedRequest> requests,
                                                              EmbeddingBackend& backend, const FetchOptions& options,
                                                              std::vector<std::string>& failures) {
    std::vector<std::optional<std::vector<float>>> out(requests.size());
    const std::size_t batch_size = std::max<std::size_t>(1, options.batch_size);
    for (std::size_t begin = 0; begin < requests.size(); begin += batch_size) {
        const auto batch = requests.subspan(begin, std::min(batch_size, requests.size() - begin));
        std::optional<std::vector<std::optional<std::vector<float>>>> vectors;
        std::string last_error;
        for (int attempt = 0; attempt <= options.max_retries && !vectors; ++attempt) {
            try {
                vectors = backend.embed(batch);
                if (vectors->size() != batch.size()) {
                    last_error = "backend returned " + std::to_string(vectors->size()) + " vectors for " +
                                 std::to_string(batch.size()) + " requests";
                    vectors.reset();
                }
            } catch (const BackendError& e) {
                last_error = e.what();
            }
        }
        if (!vectors) {
            failures.push_back(last_error);
            continue;
        }
        for (std::size_t k = 0; k < batch.size(); ++k) out[begin + k] = std::move((*vectors)[k]);
    }
    return out;
}

FetchResult fetch_embeddings(const std::vector<Occurrence>& occurrences,
                             const std::map<ChunkKey, const Chunk*>& chunks, EmbeddingBackend& backend,
                             const FetchOptions& options) {
    FetchResult result{EmbeddingStore(0, backend.model_tag()), {}, {}};
    if (occurrences.empty()) return result;
    std::vector<EmbedRequest> requests;
    requests.reserve(occurrences.size());
    for (const auto& o : occurrences) {
        EmbedRequest req{o.id, {}, o.char_start, o.char_end};
        if (backend.needs_text()) {
            auto it = chunks.find({o.doc_id, o.chunk_index});
            if (it == chunks.end()) {
                throw DataError("occurrence '" + o.id + "' references missing chunk " + o.doc_id + "#" +
                                std::to_string(o.chunk_index));
            }
            req.text = it->second->text;
        }
        requests.push_back(std::move(req));
    }

    auto vectors = embed_requests(requests, backend, options, result.backend_failures);
    for (std::size_t k = 0; k < requests.size(); ++k) {
        if (vectors[k]) {
            result.store.add(requests[k].occurrence_id, *vectors[k]);
        } else {
            result.missing.push_back(requests[k].occurrence_id);
        }
    }
    return result;
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::vector<Occurrence> sample_per_period(const std::vector<Occurrence>& occurrences, std::size_t max_per_period,
                                          std::uint64_t seed) {
    std::map<std::pair<std::string, Period>, std::vector<std::pair<std::uint64_t, std::size_t>>> groups;
    for (std::size_t i = 0; i < occurrences.size(); ++i) {
        const auto& o = occurrences[i];
        groups[{o.word, o.period}].push_back({splitmix64(seed ^ fnv1a(o.id)), i});
    }
    std::vector<char> keep(occurrences.size(), 0);
    for (auto& [key, members] : groups) {
        std::sort(members.begin(), members.end());
        for (std::size_t k = 0; k < std::min(max_per_period, members.size()); ++k) keep[members[k].second] = 1;
    }
    std::vector<Occurrence> out;
    for (std::size_t i = 0; i < occurrences.size(); ++i) {
        if (keep[i]) out.push_back(occurrences[i]);
    }
    return out;
}

PeriodSplit split_by_period(const EmbeddingStore& store, const std::vector<Occurrence>& occurrences) {
    PeriodSplit split;
    std::vector<std::string> missing;
    for (const auto& o : occurrences) {
        if (!store.contains(o.id)) {
            missing.push_back(o.id);
            continue;
        }
        (o.period == Period::old_period ? split.old_ids : split.new_ids).push_back(o.id);
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += (i ? ", " : "") + missing[i];
        if (missing.size() > 20) list += ", ...";
        throw DataError(std::to_string(missing.size()) + " occurrence ids missing from the store: " + list);
    }
    std::sort(split.old_ids.begin(), split.old_ids.end());
    std::sort(split.new_ids.begin(), split.new_ids.end());
    auto gather = [&](const std::vector<std::string>& ids) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(store.dimension()));
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const auto v = store.at(ids[i]);
            for (std::size_t d = 0; d < v.size(); ++d) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = v[d];
        }
        return m;
    };
    split.old_vectors = gather(split.old_ids);
    split.new_vectors = gather(split.new_ids);
    return split;
}

}  // namespace ssd
