#include "ssd/pipeline.hpp"

#include "ssd/error.hpp"
#include "ssd/log.hpp"
#include "ssd/occurrences.hpp"
#include "ssd/tokenizer.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

namespace ssd {

namespace fs = std::filesystem;

// ---- configuration ----

namespace {

class YamlReader {
public:
    YamlReader(const YAML::Node& root, fs::path base) : root_(root), base_(std::move(base)) {}

    std::vector<std::string> errors;

    template <class T>
    void read(const char* section, const char* key, T& out) {
        const auto node = find(section, key);
        if (!node) return;
        try {
            out = node->template as<T>();
        } catch (const YAML::Exception&) {
            errors.push_back(field(section, key) + ": expected " + type_name<T>());
        }
    }

    template <class T>
    void read_optional(const char* section, const char* key, std::optional<T>& out) {
        const auto node = find(section, key);
        if (!node) return;
        T value{};
        try {
            value = node->template as<T>();
            out = value;
        } catch (const YAML::Exception&) {
            errors.push_back(field(section, key) + ": expected " + type_name<T>());
        }
    }

    void read_path(const char* key, fs::path& out) {
        std::string s;
        read("paths", key, s);
        if (s.empty()) return;
        fs::path p(s);
        out = p.is_absolute() ? p : (base_ / p).lexically_normal();
    }

    // Records keys that no reader asked for.
    void check_unknown() {
        if (!root_.IsMap()) return;
        for (const auto& top : root_) {
            const auto name = top.first.as<std::string>();
            if (top.second.IsMap()) {
                for (const auto& kv : top.second) {
                    const auto key = name + "." + kv.first.as<std::string>();
                    if (!seen_.count(key)) errors.push_back(key + ": unknown key");
                }
            } else if (!seen_.count(name)) {
                errors.push_back(name + ": unknown key");
            }
        }
    }

private:
    static std::string field(const char* section, const char* key) {
        return section ? std::string(section) + "." + key : std::string(key);
    }

    template <class T>
    static const char* type_name() {
        if constexpr (std::is_same_v<T, bool>) return "a boolean";
        else if constexpr (std::is_integral_v<T>) return "an integer";
        else if constexpr (std::is_floating_point_v<T>) return "a number";
        else return "a string";
    }

    // Missing or null values read as absent.
    std::optional<YAML::Node> find(const char* section, const char* key) {
        seen_.insert(field(section, key));
        if (section) {
            seen_.insert(section);
            const YAML::Node sec = std::as_const(root_)[section];
            if (!sec || sec.IsNull()) return std::nullopt;
            if (!sec.IsMap()) {
                errors.push_back(std::string(section) + ": expected a mapping");
                return std::nullopt;
            }
            return present(std::as_const(sec)[key]);
        }
        return present(std::as_const(root_)[key]);
    }

    static std::optional<YAML::Node> present(const YAML::Node& n) {
        if (!n || n.IsNull()) return std::nullopt;
        return n;
    }

    YAML::Node root_;
    fs::path base_;
    std::set<std::string> seen_;
};

void check(std::vector<std::string>& errors, const std::function<void()>& fn, const std::string& field) {
    try {
        fn();
    } catch (const Error& e) {
        errors.push_back(field + ": " + e.what());
    }
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& yaml, const fs::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml);
    } catch (const YAML::Exception& e) {
        throw ValidationError(std::string("pipeline config is not valid YAML: ") + e.what());
    }
    if (!root.IsMap()) throw ValidationError("pipeline config must be a mapping");

    PipelineConfig c;
    YamlReader r(root, base_dir);
    r.read_path("old_corpus", c.paths.old_corpus);
    r.read_path("new_corpus", c.paths.new_corpus);
    r.read_path("vocab", c.paths.vocab);
    r.read_path("targets", c.paths.targets);
    r.read_path("store", c.paths.store);
    r.read_path("output_dir", c.paths.output_dir);

    std::uint64_t seed = 0;
    if (std::as_const(root)["seed"]) {
        r.read(nullptr, "seed", seed);
        c.seed = seed;
    }
    r.read(nullptr, "workers", c.workers);

    r.read("cleaning", "min_confidence", c.cleaning.min_confidence);
    r.read("cleaning", "min_tokens", c.cleaning.min_tokens);
    r.read("cleaning", "max_nonalpha", c.cleaning.max_nonalpha);
    r.read_optional("cleaning", "year_min", c.cleaning.year_min);
    r.read_optional("cleaning", "year_max", c.cleaning.year_max);

    r.read("chunk", "max_tokens", c.max_chunk_tokens);

    r.read("embed", "backend", c.backend);
    r.read("embed", "batch_size", c.fetch.batch_size);
    r.read("embed", "max_retries", c.fetch.max_retries);
    r.read("embed", "max_per_period", c.max_per_period);

    std::string algorithm = cli_name(c.clustering.algorithm);
    std::string metric = "euclidean";
    r.read("clustering", "algorithm", algorithm);
    r.read("clustering", "metric", metric);
    r.read("clustering", "k_min", c.clustering.k_min);
    r.read("clustering", "k_max", c.clustering.k_max);
    r.read("clustering", "damping", c.clustering.ap_damping);
    r.read("clustering", "max_iter", c.clustering.ap_max_iter);
    r.read("clustering", "convergence_iter", c.clustering.ap_convergence_iter);
    r.read_optional("clustering", "preference", c.clustering.ap_preference);
    r.read("clustering", "n_init", c.clustering.n_init);
    r.read("clustering", "kmeans_max_iter", c.clustering.kmeans_max_iter);

    r.read("shift", "min_fraction", c.frequency.min_fraction);
    r.read("shift", "change_threshold", c.change_threshold);

    std::string method = to_string(c.projection);
    r.read("projection", "method", method);
    r.read("projection", "perplexity", c.tsne.perplexity);
    r.read("projection", "iterations", c.tsne.iterations);
    r.read_optional("projection", "learning_rate", c.tsne.learning_rate);

    r.check_unknown();
    auto errors = std::move(r.errors);
    check(errors, [&] { c.clustering.algorithm = parse_algorithm(algorithm); }, "clustering.algorithm");
    check(errors, [&] { c.clustering.metric = parse_metric(metric); }, "clustering.metric");
    check(errors, [&] { c.projection = parse_projection(method); }, "projection.method");
    if (!errors.empty()) {
        std::string msg = "invalid pipeline config:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw ValidationError(msg);
    }
    if (c.seed) {
        c.clustering.seed = *c.seed;
        c.tsne.seed = *c.seed;
    }
    return c;
}

PipelineConfig load_pipeline_config(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ValidationError("cannot open pipeline config " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_pipeline_config(ss.str(), fs::absolute(file).parent_path());
}

std::string PipelineConfig::backend_spec() const {
    if (backend == "file") return "file:" + paths.store.string();
    if (backend.starts_with("http://") || backend.starts_with("https://")) return "http:" + backend;
    return backend;
}

void PipelineConfig::validate() const {
    std::vector<std::string> errors;
    auto require_file = [&](const fs::path& p, const char* field) {
        if (p.empty()) {
            errors.push_back(std::string(field) + ": missing");
        } else if (!fs::is_regular_file(p)) {
            errors.push_back(std::string(field) + ": no such file " + p.string());
        }
    };
    require_file(paths.old_corpus, "paths.old_corpus");
    require_file(paths.new_corpus, "paths.new_corpus");
    require_file(paths.vocab, "paths.vocab");
    require_file(paths.targets, "paths.targets");
    if (backend == "file") {
        require_file(paths.store, "paths.store");
    } else if (!backend.starts_with("http:") && !backend.starts_with("https:")) {
        errors.push_back("embed.backend: expected file or an http url, got '" + backend + "'");
    }
    if (paths.output_dir.empty()) errors.push_back("paths.output_dir: missing");
    if (!seed) errors.push_back("seed: missing");
    if (workers < 1) errors.push_back("workers: must be >= 1");
    if (max_chunk_tokens < kMinChunkBudget) {
        errors.push_back("chunk.max_tokens: must be >= " + std::to_string(kMinChunkBudget));
    }
    if (fetch.batch_size < 1) errors.push_back("embed.batch_size: must be >= 1");
    if (fetch.max_retries < 0) errors.push_back("embed.max_retries: must be >= 0");
    if (!(change_threshold >= 0.0)) errors.push_back("shift.change_threshold: must be >= 0");
    if (!(tsne.perplexity > 0.0)) errors.push_back("projection.perplexity: must be positive");
    if (tsne.iterations < 1) errors.push_back("projection.iterations: must be >= 1");
    check(errors, [&] { cleaning.validate(); }, "cleaning");
    check(errors, [&] { clustering.validate(); }, "clustering");
    check(errors, [&] { frequency.validate(); }, "shift.min_fraction");
    if (!errors.empty()) {
        std::string msg = "invalid pipeline config:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw ValidationError(msg);
    }
}

nlohmann::ordered_json to_json(const PipelineConfig& c) {
    nlohmann::ordered_json j;
    j["seed"] = c.seed ? nlohmann::ordered_json(*c.seed) : nlohmann::ordered_json(nullptr);
    j["workers"] = c.workers;
    j["paths"] = {{"old_corpus", c.paths.old_corpus.string()},
                  {"new_corpus", c.paths.new_corpus.string()},
                  {"vocab", c.paths.vocab.string()},
                  {"targets", c.paths.targets.string()},
                  {"store", c.paths.store.string()},
                  {"output_dir", c.paths.output_dir.string()}};
    nlohmann::ordered_json cleaning = {{"min_confidence", c.cleaning.min_confidence},
                                       {"min_tokens", c.cleaning.min_tokens},
                                       {"max_nonalpha", c.cleaning.max_nonalpha}};
    cleaning["year_min"] = c.cleaning.year_min ? nlohmann::ordered_json(*c.cleaning.year_min) : nlohmann::ordered_json(nullptr);
    cleaning["year_max"] = c.cleaning.year_max ? nlohmann::ordered_json(*c.cleaning.year_max) : nlohmann::ordered_json(nullptr);
    j["cleaning"] = std::move(cleaning);
    j["chunk"] = {{"max_tokens", c.max_chunk_tokens}};
    j["embed"] = {{"backend", c.backend},
                  {"batch_size", c.fetch.batch_size},
                  {"max_retries", c.fetch.max_retries},
                  {"max_per_period", c.max_per_period}};
    nlohmann::ordered_json cl = {{"algorithm", cli_name(c.clustering.algorithm)},
                                 {"metric", c.clustering.metric == DistanceMetric::cosine ? "cosine" : "euclidean"},
                                 {"k_min", c.clustering.k_min},
                                 {"k_max", c.clustering.k_max},
                                 {"damping", c.clustering.ap_damping},
                                 {"max_iter", c.clustering.ap_max_iter},
                                 {"convergence_iter", c.clustering.ap_convergence_iter}};
    cl["preference"] = c.clustering.ap_preference ? nlohmann::ordered_json(*c.clustering.ap_preference) : nlohmann::ordered_json(nullptr);
    cl["n_init"] = c.clustering.n_init;
    cl["kmeans_max_iter"] = c.clustering.kmeans_max_iter;
    j["clustering"] = std::move(cl);
    j["shift"] = {{"min_fraction", c.frequency.min_fraction}, {"change_threshold", c.change_threshold}};
    j["projection"] = {{"method", to_string(c.projection)},
                       {"perplexity", c.tsne.perplexity},
                       {"iterations", c.tsne.iterations},
                       {"learning_rate", c.tsne.learning_rate ? nlohmann::ordered_json(*c.tsne.learning_rate)
                                                                 : nlohmann::ordered_json(nullptr)}};
    return j;
}

// ---- hashing ----

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw DataError("SHA-256 computation failed");
    }
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return out.str();
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return sha256_hex(bytes);
}

// ---- run ----

namespace {

[[noreturn]] void rethrow_in_stage(const std::string& stage) {
    try {
        throw;
    } catch (const Error& e) {
        const std::string msg = "stage " + stage + " failed: " + e.what();
        switch (e.kind()) {
            case ErrorKind::validation: throw ValidationError(msg);
            case ErrorKind::data: throw DataError(msg);
            case ErrorKind::backend: throw BackendError(msg);
        }
        throw DataError(msg);
    } catch (const std::exception& e) {
        throw DataError("stage " + stage + " failed: " + e.what());
    }
}

// Runs fn(i) for i in [0, n) on `workers` threads. Results land in their
// own slots so the merge order does not depend on scheduling.
template <class T>
std::vector<T> parallel_map(std::size_t n, int workers, const std::function<T(std::size_t)>& fn) {
    std::vector<std::optional<T>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                slots[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), std::max<std::size_t>(n, 1));
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < count; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<T> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

class ArtifactWriter {
public:
    explicit ArtifactWriter(fs::path root) : root_(std::move(root)) {}

    void text(StageRecord& stage, const std::string& rel, const std::string& content) {
        const auto path = root_ / rel;
        fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write " + path.string());
        out << content;
        out.close();
        record(stage, rel);
    }

    void record(StageRecord& stage, const std::string& rel) {
        stage.artifacts.push_back({rel, sha256_file(root_ / rel)});
    }

    const fs::path& root() const { return root_; }

private:
    fs::path root_;
};

std::string jsonl(const auto& items) {
    std::ostringstream out;
    for (const auto& item : items) out << to_json(item).dump() << '\n';
    return out.str();
}

struct WordWork {
    std::string word;
    std::vector<Occurrence> occurrences;
};

}  // namespace

PipelineRun run_pipeline(const PipelineConfig& config) {
    config.validate();
    PipelineRun run;
    ArtifactWriter writer(config.paths.output_dir);
    fs::create_directories(config.paths.output_dir);

    const auto vocab = [&] {
        try {
            return Vocabulary::load(config.paths.vocab);
        } catch (...) {
            rethrow_in_stage("clean");
        }
    }();

    // clean
    std::array<std::vector<Document>, 2> cleaned;
    {
        StageRecord stage{"clean", {}};
        try {
            nlohmann::ordered_json report;
            for (int t = 0; t < 2; ++t) {
                const auto& path = t == 0 ? config.paths.old_corpus : config.paths.new_corpus;
                const char* name = t == 0 ? "old" : "new";
                auto read = read_documents_file(path.string());
                auto result = clean(std::move(read.documents), config.cleaning, vocab);
                result.report.rows_in += read.errors.size();
                result.report.removed_malformed += read.errors.size();
                for (auto& e : read.errors) result.report.errors.push_back(std::move(e));
                std::sort(result.report.errors.begin(), result.report.errors.end(),
                          [](const RowError& a, const RowError& b) { return a.line < b.line; });
                log::info(std::string("clean ") + name + ": kept " + std::to_string(result.report.rows_out) +
                          " of " + std::to_string(result.report.rows_in) + " rows");
                report[name] = to_json(result.report);
                std::ostringstream out;
                write_documents(out, result.documents);
                writer.text(stage, std::string("clean/") + name + ".jsonl", out.str());
                cleaned[static_cast<std::size_t>(t)] = std::move(result.documents);
            }
            writer.text(stage, "clean/report.json", report.dump(1) + "\n");
        } catch (...) {
            rethrow_in_stage("clean");
        }
        run.stages.push_back(std::move(stage));
    }

    // chunk
    std::vector<Chunk> chunks;
    {
        StageRecord stage{"chunk", {}};
        try {
            nlohmann::ordered_json log_json = nlohmann::ordered_json::array();
            for (int t = 0; t < 2; ++t) {
                const auto period = t == 0 ? Period::old_period : Period::new_period;
                auto result = chunk(cleaned[static_cast<std::size_t>(t)], config.max_chunk_tokens, period, vocab);
                for (const auto& e : result.log) {
                    log::warn("chunk " + e.doc_id + ": " + e.message);
                    log_json.push_back({{"doc_id", e.doc_id}, {"period", to_string(period)}, {"message", e.message}});
                }
                std::ostringstream out;
                write_chunks(out, result.chunks);
                writer.text(stage, "chunks/" + to_string(period) + ".jsonl", out.str());
                chunks.insert(chunks.end(), std::make_move_iterator(result.chunks.begin()),
                              std::make_move_iterator(result.chunks.end()));
            }
            writer.text(stage, "chunks/log.json", log_json.dump(1) + "\n");
        } catch (...) {
            rethrow_in_stage("chunk");
        }
        run.stages.push_back(std::move(stage));
    }

    // find
    std::vector<WordWork> words;
    std::vector<Occurrence> all_occurrences;
    {
        StageRecord stage{"find", {}};
        try {
            const auto targets = read_targets_file(config.paths.targets.string());
            nlohmann::ordered_json census_json = nlohmann::ordered_json::array();
            for (const auto& target : targets) {
                const auto plan = build_search_plan(target, vocab);
                for (const auto& w : plan.warnings) log::warn("find " + target.lemma + ": " + w);
                auto occs = find_occurrences(chunks, target, plan);
                const auto census = occurrence_census(occs, target.min_occurrences_per_period);
                auto plan_json = nlohmann::ordered_json::array();
                for (const auto& e : plan.entries) plan_json.push_back({{"form", e.form}, {"kind", to_string(e.kind)}});
                census_json.push_back({{"word", target.lemma},
                                       {"plan", plan_json},
                                       {"warnings", plan.warnings},
                                       {"old", census.old_count},
                                       {"new", census.new_count},
                                       {"sufficient", census.sufficient}});
                all_occurrences.insert(all_occurrences.end(), occs.begin(), occs.end());
                if (!census.sufficient) {
                    const std::string reason = "insufficient occurrences (old " + std::to_string(census.old_count) +
                                               ", new " + std::to_string(census.new_count) + ", need " +
                                               std::to_string(target.min_occurrences_per_period) + ")";
                    log::warn("skipping " + target.lemma + ": " + reason);
                    run.skipped_words.emplace_back(target.lemma, reason);
                    continue;
                }
                words.push_back({target.lemma, std::move(occs)});
            }
            writer.text(stage, "occurrences.jsonl", jsonl(all_occurrences));
            writer.text(stage, "census.json", census_json.dump(1) + "\n");
        } catch (...) {
            rethrow_in_stage("find");
        }
        run.stages.push_back(std::move(stage));
    }

    // embed
    EmbeddingStore store;
    {
        StageRecord stage{"embed", {}};
        try {
            std::vector<Occurrence> wanted;
            for (auto& w : words) {
                if (config.max_per_period > 0) {
                    w.occurrences = sample_per_period(w.occurrences, config.max_per_period, *config.seed);
                }
                wanted.insert(wanted.end(), w.occurrences.begin(), w.occurrences.end());
            }
            auto backend = make_backend(config.backend_spec());
            const auto index = index_chunks(chunks);
            auto fetched = fetch_embeddings(wanted, index, *backend, config.fetch);
            if (!fetched.backend_failures.empty()) {
                throw BackendError(std::to_string(fetched.backend_failures.size()) +
                                   " batch(es) failed; last error: " + fetched.backend_failures.back());
            }
            if (!fetched.missing.empty()) {
                log::warn("embed: " + std::to_string(fetched.missing.size()) + " occurrence(s) have no vector");
            }
            const std::set<std::string> missing(fetched.missing.begin(), fetched.missing.end());
            for (auto& w : words) {
                std::erase_if(w.occurrences, [&](const Occurrence& o) { return missing.count(o.id) != 0; });
            }
            store = std::move(fetched.store);
            if (store.empty()) {
                log::warn("embed: no vectors fetched");
                writer.text(stage, "embeddings.ssde", "");
            } else {
                write_store(store, writer.root() / "embeddings.ssde");
                writer.record(stage, "embeddings.ssde");
            }
            nlohmann::ordered_json report = {{"model_tag", store.model_tag()},
                                             {"dimension", store.dimension()},
                                             {"count", store.size()},
                                             {"missing", fetched.missing}};
            writer.text(stage, "embed_report.json", report.dump(1) + "\n");
        } catch (...) {
            rethrow_in_stage("embed");
        }
        run.stages.push_back(std::move(stage));
    }

    // cluster
    std::vector<SenseClustering> clusterings;
    std::vector<PeriodSplit> splits;
    {
        StageRecord stage{"cluster", {}};
        try {
            struct Outcome {
                std::optional<SenseClustering> clustering;
                std::optional<PeriodSplit> split;
                std::string skip_reason;
            };
            const auto outcomes = parallel_map<Outcome>(words.size(), config.workers, [&](std::size_t i) {
                const auto& w = words[i];
                Outcome o;
                auto split = split_by_period(store, w.occurrences);
                const auto n = split.old_ids.size() + split.new_ids.size();
                if (n < min_points_for(config.clustering)) {
                    o.skip_reason = "only " + std::to_string(n) + " embeddings";
                    return o;
                }
                o.clustering = cluster_word(w.word, split, config.clustering);
                if (auto violation = partition_violation(*o.clustering, split)) {
                    throw DataError("partition check failed for " + w.word + ": " + *violation);
                }
                o.split = std::move(split);
                return o;
            });
            for (std::size_t i = 0; i < outcomes.size(); ++i) {
                if (!outcomes[i].clustering) {
                    run.skipped_words.emplace_back(words[i].word, outcomes[i].skip_reason);
                    continue;
                }
                const auto& c = *outcomes[i].clustering;
                log::info("cluster " + c.word + ": " + std::to_string(c.m) + " sense(s)" +
                          (c.converged ? "" : " (not converged)"));
                clusterings.push_back(c);
                splits.push_back(*outcomes[i].split);
            }
            write_senses_file((writer.root() / "senses.json").string(), clusterings);
            writer.record(stage, "senses.json");
        } catch (...) {
            rethrow_in_stage("cluster");
        }
        run.stages.push_back(std::move(stage));
    }

    // shift
    {
        StageRecord stage{"shift", {}};
        try {
            std::vector<ShiftReport> reports;
            for (const auto& c : clusterings) reports.push_back(sense_shift(c, config.frequency));
            write_shift_file((writer.root() / "shift.json").string(), reports, config.change_threshold);
            writer.record(stage, "shift.json");
        } catch (...) {
            rethrow_in_stage("shift");
        }
        run.stages.push_back(std::move(stage));
    }

    // dwug
    {
        StageRecord stage{"dwug", {}};
        try {
            const auto exports = parallel_map<std::optional<DwugExport>>(
                clusterings.size(), config.workers, [&](std::size_t i) -> std::optional<DwugExport> {
                    const auto n = splits[i].old_ids.size() + splits[i].new_ids.size();
                    if (config.projection == ProjectionMethod::tsne && n < 5) {
                        log::warn("dwug " + clusterings[i].word + ": too few points for t-SNE");
                        return std::nullopt;
                    }
                    return export_dwug(clusterings[i], splits[i], config.projection, config.tsne);
                });
            const auto dir = writer.root() / "dwug";
            for (const auto& e : exports) {
                if (!e) continue;
                for (const auto& path : write_dwug(*e, dir)) {
                    writer.record(stage, fs::relative(path, writer.root()).generic_string());
                }
            }
        } catch (...) {
            rethrow_in_stage("dwug");
        }
        run.stages.push_back(std::move(stage));
    }

    nlohmann::ordered_json manifest;
    manifest["config"] = to_json(config);
    auto inputs = nlohmann::ordered_json::array();
    for (const auto& [name, path] : {std::pair{"old_corpus", config.paths.old_corpus},
                                     {"new_corpus", config.paths.new_corpus},
                                     {"vocab", config.paths.vocab},
                                     {"targets", config.paths.targets}}) {
        inputs.push_back({{"name", name}, {"path", path.string()}, {"sha256", sha256_file(path)}});
    }
    if (config.backend == "file") {
        inputs.push_back({{"name", "store"}, {"path", config.paths.store.string()},
                          {"sha256", sha256_file(config.paths.store)}});
    }
    manifest["inputs"] = std::move(inputs);
    auto stages = nlohmann::ordered_json::array();
    for (const auto& s : run.stages) {
        auto arts = nlohmann::ordered_json::array();
        for (const auto& a : s.artifacts) arts.push_back({{"path", a.path}, {"sha256", a.sha256}});
        stages.push_back({{"stage", s.name}, {"artifacts", arts}});
    }
    manifest["stages"] = std::move(stages);
    auto skipped = nlohmann::ordered_json::array();
    for (const auto& [w, reason] : run.skipped_words) skipped.push_back({{"word", w}, {"reason", reason}});
    manifest["skipped_words"] = std::move(skipped);

    run.manifest_path = writer.root() / "manifest.json";
    std::ofstream out(run.manifest_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + run.manifest_path.string());
    out << manifest.dump(1) << '\n';
    return run;
}

}  // namespace ssd
