#include "ssd/clustering.hpp"
#include "ssd/corpus.hpp"
#include "ssd/embeddings.hpp"
#include "ssd/error.hpp"
#include "ssd/eval.hpp"
#include "ssd/log.hpp"
#include "ssd/occurrences.hpp"
#include "ssd/pipeline.hpp"
#include "ssd/projection.hpp"
#include "ssd/shift.hpp"
#include "ssd/tokenizer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

namespace fs = std::filesystem;
using namespace ssd;

namespace {

constexpr int kExitValidation = 1;

std::ofstream open_out(const std::string& path) {
    if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    return out;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
    auto out = open_out(path);
    out << j.dump(1) << '\n';
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<Chunk> read_all_chunks(const std::vector<std::string>& files) {
    std::vector<Chunk> chunks;
    for (const auto& f : files) {
        auto part = read_chunks_file(f);
        chunks.insert(chunks.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return chunks;
}

// ---- clean ----

struct CleanArgs {
    std::string in, out, vocab, report;
    CleaningConfig config;
};

void add_clean(CLI::App& app, std::function<void()>& action) {
    auto args = std::make_shared<CleanArgs>();
    auto* cmd = app.add_subcommand("clean", "Filter a JSONL corpus by OCR confidence, duplicates, noise and length");
    cmd->add_option("--in", args->in, "Input corpus (JSON Lines)")->required();
    cmd->add_option("--out", args->out, "Cleaned corpus (JSON Lines)")->required();
    cmd->add_option("--vocab", args->vocab, "Vocabulary used for the token-count filter")->required();
    cmd->add_option("--report", args->report, "Write the cleaning report here");
    cmd->add_option("--min-confidence", args->config.min_confidence, "Keep rows whose OCR confidence is above this")
        ->default_str("0.5");
    cmd->add_option("--min-tokens", args->config.min_tokens, "Drop rows with fewer tokens")->default_str("5");
    cmd->add_option("--max-nonalpha", args->config.max_nonalpha, "Drop rows with a larger non-letter share")
        ->default_str("0.5");
    cmd->add_option("--year-min", args->config.year_min, "Drop rows dated earlier");
    cmd->add_option("--year-max", args->config.year_max, "Drop rows dated later");
    cmd->callback([&action, args] {
        action = [args] {
            args->config.validate();
            const auto vocab = Vocabulary::load(args->vocab);
            auto read = read_documents_file(args->in);
            auto result = clean(std::move(read.documents), args->config, vocab);
            result.report.rows_in += read.errors.size();
            result.report.removed_malformed += read.errors.size();
            for (auto& e : read.errors) result.report.errors.push_back(std::move(e));
            std::sort(result.report.errors.begin(), result.report.errors.end(),
                      [](const RowError& a, const RowError& b) { return a.line < b.line; });
            for (const auto& e : result.report.errors) {
                log::warn(args->in + ":" + std::to_string(e.line) + ": " + e.message);
            }
            auto out = open_out(args->out);
            write_documents(out, result.documents);
            log::info("kept " + std::to_string(result.report.rows_out) + " of " +
                      std::to_string(result.report.rows_in) + " rows");
            if (!args->report.empty()) write_json(args->report, to_json(result.report));
        };
    });
}

// ---- chunk ----

struct ChunkArgs {
    std::string in, out, vocab, period = "old";
    std::size_t max_tokens = kDefaultMaxChunkTokens;
};

void add_chunk(CLI::App& app, std::function<void()>& action) {
    auto args = std::make_shared<ChunkArgs>();
    auto* cmd = app.add_subcommand("chunk", "Split cleaned documents into token-bounded chunks");
    cmd->add_option("--in", args->in, "Cleaned corpus (JSON Lines)")->required();
    cmd->add_option("--out", args->out, "Chunks (JSON Lines)")->required();
    cmd->add_option("--vocab", args->vocab, "Subword vocabulary")->required();
    cmd->add_option("--period", args->period, "Period label: old or new")->required();
    cmd->add_option("--max-tokens", args->max_tokens, "Token budget per chunk")->default_str("256");
    cmd->callback([&action, args] {
        action = [args] {
            if (args->max_tokens < kMinChunkBudget) {
                throw ValidationError("--max-tokens must be >= " + std::to_string(kMinChunkBudget));
            }
            const auto period = parse_period(args->period);
            const auto vocab = Vocabulary::load(args->vocab);
            auto read = read_documents_file(args->in);
            if (!read.errors.empty()) {
                throw DataError(args->in + ":" + std::to_string(read.errors.front().line) + ": " +
                                read.errors.front().message);
            }
            const auto result = chunk(read.documents, args->max_tokens, period, vocab);
            for (const auto& e : result.log) log::warn(e.doc_id + ": " + e.message);
            auto out = open_out(args->out);
            write_chunks(out, result.chunks);
            log::info("wrote " + std::to_string(result.chunks.size()) + " chunks");
        };
    });
}

// ---- find ----

struct FindArgs {
    std::vector<std::string> chunks;
    std::string targets, vocab, out, census;
    bool case_sensitive = false;
};

void add_find(CLI::App& app, std::function<void()>& action) {
    auto args = std::make_shared<FindArgs>();
    auto* cmd = app.add_subcommand("find", "Locate target word occurrences in chunks");
    cmd->add_option("--chunks,--corpus", args->chunks, "Chunk files (JSON Lines), any number")->required();
    cmd->add_option("--targets", args->targets, "Targets (JSON array of lemma/surface_forms)")->required();
    cmd->add_option("--vocab", args->vocab, "Subword vocabulary for prefix forms")->required();
    cmd->add_option("--out", args->out, "Occurrences (JSON Lines)")->required();
    cmd->add_option("--census", args->census, "Write per-word plans and counts here");
    cmd->add_flag("--case-sensitive", args->case_sensitive, "Match case exactly");
    cmd->callback([&action, args] {
        action = [args] {
            const auto vocab = Vocabulary::load(args->vocab);
            const auto targets = read_targets_file(args->targets);
            const auto chunks = read_all_chunks(args->chunks);
            std::vector<Occurrence> all;
            auto census_json = nlohmann::ordered_json::array();
            for (const auto& t : targets) {
                const auto plan = build_search_plan(t, vocab);
                for (const auto& w : plan.warnings) log::warn(t.lemma + ": " + w);
                const auto occs = find_occurrences(chunks, t, plan, MatchOptions{!args->case_sensitive});
                const auto census = occurrence_census(occs, t.min_occurrences_per_period);
                if (!census.sufficient) {
                    log::warn(t.lemma + ": insufficient occurrences (old " + std::to_string(census.old_count) +
                              ", new " + std::to_string(census.new_count) + ")");
                }
                auto forms = nlohmann::ordered_json::array();
                for (const auto& e : plan.entries) forms.push_back({{"form", e.form}, {"kind", to_string(e.kind)}});
                census_json.push_back({{"word", t.lemma},
                                       {"plan", forms},
                                       {"warnings", plan.warnings},
                                       {"old", census.old_count},
                                       {"new", census.new_count},
                                       {"sufficient", census.sufficient}});
                all.insert(all.end(), occs.begin(), occs.end());
            }
            auto out = open_out(args->out);
            write_occurrences(out, all);
            if (!args->census.empty()) write_json(args->census, census_json);
            log::info("found " + std::to_string(all.size()) + " occurrences");
        };
    });
}

// ---- embed ----

struct EmbedArgs {
    std::string occurrences, backend, out;
    std::vector<std::string> chunks;
    FetchOptions fetch;
    std::size_t max_per_period = 0;
    std::uint64_t seed = 7;
};

void add_embed(CLI::App& app, std::function<void()>& action) {
    auto args = std::make_shared<EmbedArgs>();
    auto* cmd = app.add_subcommand("embed", "Fetch one embedding per occurrence into an SSDE store");
    cmd->add_option("--occurrences", args->occurrences, "Occurrences (JSON Lines)")->required();
    cmd->add_option("--chunks,--corpus", args->chunks, "Chunk files; required by the http backend");
    cmd->add_option("--backend", args->backend, "file:<store.ssde> or http:<url>")->required();
    cmd->add_option("--out", args->out, "Output store (.ssde)")->required();
    cmd->add_option("--batch-size", args->fetch.batch_size, "Requests per backend call")->default_str("32");
    cmd->add_option("--max-retries", args->fetch.max_retries, "Retries per failed batch")->default_str("2");
    cmd->add_option("--max-per-period", args->max_per_period, "Sample at most this many per word and period (0 = all)")
        ->default_str("0");
    cmd->add_option("--seed", args->seed, "Sampling seed")->default_str("7");
    cmd->callback([&action, args] {
        action = [args] {
            auto occs = read_occurrences_file(args->occurrences);
            if (args->max_per_period > 0) occs = sample_per_period(occs, args->max_per_period, args->seed);
            auto backend = make_backend(args->backend);
            const auto chunks = read_all_chunks(args->chunks);
            const auto index = index_chunks(chunks);
            auto result = fetch_embeddings(occs, index, *backend, args->fetch);
            for (const auto& f : result.backend_failures) log::error("backend: " + f);
            if (!result.backend_failures.empty()) {
                throw BackendError(std::to_string(result.backend_failures.size()) + " batch(es) failed");
            }
            if (!result.missing.empty()) {
                log::warn(std::to_string(result.missing.size()) + " occurrence(s) have no vector");
            }
            if (result.store.empty()) {
                log::warn("no vectors; no store written");
                return;
            }
            write_store(result.store, args->out);
            log::info("wrote " + std::to_string(result.store.size()) + " vectors of dimension " +
                      std::to_string(result.store.dimension()));
        };
    });
}

// ---- cluster ----

struct ClusterArgs {
    std::string occurrences, store, out, algorithm = "ap", metric = "euclidean", words;
    ClusteringConfig config;
    std::size_t min_per_period = 0;
};

void add_cluster(CLI::App& app, std::function<void()>& action) {
    auto args = std::make_shared<ClusterArgs>();
    auto* cmd = app.add_subcommand("cluster", "Jointly cluster each word's old and new embeddings into senses");
    cmd->add_option("--occurrences", args->occurrences, "Occurrences (JSON Lines)")->required();
    cmd->add_option("--store", args->store, "Embedding store (.ssde)")->required();
    cmd->add_option("--out", args->out, "Senses (JSON)")->required();
    cmd->add_option("--algorithm,--algo", args->algorithm, "ap, km-sil or km-inertia")->default_str("ap");
    cmd->add_option("--words", args->words, "Comma-separated subset of words");
    cmd->add_option("--damping", args->config.ap_damping, "Affinity propagation damping")->default_str("0.975");
    cmd->add_option("--max-iter", args->config.ap_max_iter, "Affinity propagation iteration cap")
        ->default_str("1000");
    cmd->add_option("--convergence-iter", args->config.ap_convergence_iter,
                    "Iterations with stable exemplars that count as converged")
        ->default_str("100");
    cmd->add_option("--preference", args->config.ap_preference,
                    "Affinity propagation preference (default: median similarity)");
    cmd->add_option("--k-min", args->config.k_min, "Smallest K for k-means")->default_str("2");
    cmd->add_option("--k-max", args->config.k_max, "Largest K for k-means")->default_str("10");
    cmd->add_option("--n-init", args->config.n_init, "k-means restarts")->default_str("10");
    cmd->add_option("--seed", args->config.seed, "k-means seed")->default_str("7");
    cmd->add_option("--metric", args->metric, "euclidean or cosine")->default_str("euclidean");
    cmd->callback([&action, args] {
        action = [args] {
            args->config.algorithm = parse_algorithm(args->algorithm);
            args->config.metric = parse_metric(args->metric);
            args->config.validate();
            const auto occs = read_occurrences_file(args->occurrences);
            const auto store = read_store(args->store);
            std::vector<std::string> order;
            std::map<std::string, std::vector<Occurrence>> by_word;
            for (const auto& o : occs) {
                if (!by_word.count(o.word)) order.push_back(o.word);
                if (store.contains(o.id)) by_word[o.word].push_back(o);
            }
            if (!args->words.empty()) {
                const auto wanted = split_csv(args->words);
                for (const auto& w : wanted) {
                    if (!by_word.count(w)) throw ValidationError("word '" + w + "' has no occurrences");
                }
                order = wanted;
            }
            std::vector<SenseClustering> out;
            for (const auto& w : order) {
                const auto split = split_by_period(store, by_word[w]);
                const auto n = split.old_ids.size() + split.new_ids.size();
                if (n < min_points_for(args->config)) {
                    log::warn("skipping " + w + ": only " + std::to_string(n) + " embeddings");
                    continue;
                }
                auto c = cluster_word(w, split, args->config);
                if (auto v = partition_violation(c, split)) throw DataError(w + ": " + *v);
                log::info(w + ": " + std::to_string(c.m) + " sense(s)" + (c.converged ? "" : " (not converged)"));
                out.push_back(std::move(c));
            }
            write_senses_file(args->out, out);
        };
    });
}

// ---- shift ----

struct ShiftArgs {
    std::string senses, out;
    FrequencyRule rule;
    double threshold = kDefaultChangeThreshold;
};

void add_shift(CLI::App& app, std::function<void()>& action) {
    auto args = std::make_shared<ShiftArgs>();
    auto* cmd = app.add_subcommand("shift", "Measure per-sense CD and PRT shift and rank words by change");
    cmd->add_option("--senses", args->senses, "Senses (JSON)")->required();
    cmd->add_option("--out", args->out, "Shift reports and ranking (JSON)")->required();
    cmd->add_option("--min-fraction", args->rule.min_fraction,
                    "A sense below this share of a period's occurrences counts as absent")
        ->default_str("0.10");
    cmd->add_option("--threshold", args->threshold, "max_cd at or above this marks a binary change")
        ->default_str("0.5");
    cmd->callback([&action, args] {
        action = [args] {
            args->rule.validate();
            const auto clusterings = read_senses_file(args->senses);
            std::vector<ShiftReport> reports;
            for (const auto& c : clusterings) reports.push_back(sense_shift(c, args->rule));
            write_shift_file(args->out, reports, args->threshold);
            for (const auto& r : rank_by_change(reports, args->threshold)) {
                log::info(r.word + ": max_cd " + std::to_string(r.summary.max_cd) +
                          (r.summary.binary_change ? " (changed)" : ""));
            }
        };
    });
}

// ---- dwug ----

struct DwugArgs {
    std::string senses, store, method = "tsne", out_dir, words;
    TsneOptions tsne;
};

void add_dwug(CLI::App& app, std::function<void()>& action) {
    auto args = std::make_shared<DwugArgs>();
    auto* cmd = app.add_subcommand("dwug", "Export 2D word usage graphs (JSON and SVG) per word");
    cmd->add_option("--senses", args->senses, "Senses (JSON)")->required();
    cmd->add_option("--store", args->store, "Embedding store (.ssde)")->required();
    cmd->add_option("--out-dir", args->out_dir, "Output directory")->required();
    cmd->add_option("--method", args->method, "tsne or pca")->default_str("tsne");
    cmd->add_option("--perplexity", args->tsne.perplexity, "t-SNE perplexity, capped at (n - 1) / 3")
        ->default_str("50");
    cmd->add_option("--iterations", args->tsne.iterations, "t-SNE iterations")->default_str("1000");
    cmd->add_option("--seed", args->tsne.seed, "Projection seed")->default_str("7");
    cmd->add_option("--words", args->words, "Comma-separated subset of words");
    cmd->callback([&action, args] {
        action = [args] {
            const auto method = parse_projection(args->method);
            if (!(args->tsne.perplexity > 0.0)) throw ValidationError("--perplexity must be positive");
            const auto clusterings = read_senses_file(args->senses);
            const auto store = read_store(args->store);
            std::set<std::string> wanted;
            for (const auto& w : split_csv(args->words)) wanted.insert(w);
            for (const auto& c : clusterings) {
                if (!wanted.empty() && !wanted.count(c.word)) continue;
                const auto split = split_for(c, store);
                const auto dwug = export_dwug(c, split, method, args->tsne);
                write_dwug(dwug, args->out_dir);
                log::info(c.word + ": " + std::to_string(dwug.points.size()) + " points");
            }
        };
    });
}

// ---- neighbors ----

struct NeighborArgs {
    std::string senses, words, period = "old", out;
    std::size_t top = kDefaultNeighbors;
};

void add_neighbors(CLI::App& app, std::function<void()>& action) {
    auto args = std::make_shared<NeighborArgs>();
    auto* cmd = app.add_subcommand("neighbors", "Rank words by similarity of their dominant sense centroids");
    cmd->add_option("--senses", args->senses, "Senses (JSON) for every candidate word")->required();
    cmd->add_option("--words", args->words, "Comma-separated target words")->required();
    cmd->add_option("--period", args->period, "old or new")->default_str("old");
    cmd->add_option("--top", args->top, "Neighbors per word")->default_str("5");
    cmd->add_option("--out", args->out, "Write reports here (JSON); stdout otherwise");
    cmd->callback([&action, args] {
        action = [args] {
            const auto period = parse_period(args->period);
            if (args->top < 1) throw ValidationError("--top must be >= 1");
            const auto clusterings = read_senses_file(args->senses);
            auto reports = nlohmann::ordered_json::array();
            for (const auto& w : split_csv(args->words)) {
                const auto it = std::find_if(clusterings.begin(), clusterings.end(),
                                             [&](const SenseClustering& c) { return c.word == w; });
                if (it == clusterings.end()) throw ValidationError("word '" + w + "' is not in " + args->senses);
                const auto report = diachronic_neighbors(*it, clusterings, period, args->top);
                if (report.short_list) {
                    log::warn(w + ": only " + std::to_string(report.neighbors.size()) + " candidate(s)");
                }
                reports.push_back(to_json(report));
            }
            if (args->out.empty()) {
                std::cout << reports.dump(1) << '\n';
            } else {
                write_json(args->out, reports);
            }
        };
    });
}

// ---- eval ----

struct EvalArgs {
    std::string pairs, senses_dir, store, backend, methods = "ap,km-sil,km-inertia,cd,prt", out, dev;
    EvalConfig config;
};

void add_eval(CLI::App& app, std::function<void()>& action) {
    auto args = std::make_shared<EvalArgs>();
    auto* cmd = app.add_subcommand("eval", "Score binary change detection on annotated usage pairs");
    cmd->add_option("--pairs", args->pairs, "Annotated pairs (JSON Lines)")->required();
    cmd->add_option("--senses", args->senses_dir,
                    "Directory holding ap.json, km-sil.json and km-inertia.json");
    auto* store = cmd->add_option("--store", args->store, "Embedding store with <pair id>/a and <pair id>/b vectors");
    auto* backend = cmd->add_option("--backend", args->backend, "file:<store.ssde> or http:<url>");
    store->excludes(backend);
    cmd->add_option("--methods", args->methods, "Comma-separated methods")->default_str(args->methods);
    cmd->add_option("--cd-threshold", args->config.cd_threshold, "cd predicts change at or above this")
        ->default_str("0.5");
    cmd->add_option("--prt-threshold", args->config.prt_threshold, "prt predicts change at or above this")
        ->default_str("2.0");
    cmd->add_option("--dev", args->dev, "Sweep cd/prt thresholds for best F1 on these pairs first");
    cmd->add_option("--out", args->out, "Results (JSON)")->required();
    cmd->callback([&action, args] {
        action = [args] {
            const auto methods = parse_eval_methods(args->methods);
            if (args->store.empty() && args->backend.empty()) throw ValidationError("--store or --backend is required");
            auto backend = make_backend(args->store.empty() ? args->backend : "file:" + args->store);
            SenseIndex senses;
            for (const auto m : methods) {
                if (!is_clustering_method(m)) continue;
                if (args->senses_dir.empty()) throw ValidationError("--senses is required for " + to_string(m));
                const auto path = fs::path(args->senses_dir) / (to_string(m) + ".json");
                if (!fs::exists(path)) throw ValidationError("missing senses file " + path.string());
                auto& words = senses[algorithm_for(m)];
                for (auto& c : read_senses_file(path.string())) words.emplace(c.word, std::move(c));
            }
            const auto pairs = read_pairs_file(args->pairs);
            nlohmann::ordered_json sweeps = nlohmann::ordered_json::array();
            if (!args->dev.empty()) {
                const auto dev = read_pairs_file(args->dev);
                const auto dev_vectors = embed_pairs(dev, *backend, args->config.fetch);
                for (const auto m : methods) {
                    if (m != EvalMethod::cd && m != EvalMethod::prt) continue;
                    const auto s = sweep_threshold(dev, dev_vectors, m);
                    (m == EvalMethod::cd ? args->config.cd_threshold : args->config.prt_threshold) = s.threshold;
                    log::info(to_string(m) + ": dev threshold " + std::to_string(s.threshold) + " (F1 " +
                              std::to_string(s.f1) + ")");
                    sweeps.push_back({{"method", to_string(m)},
                                      {"threshold", std::isinf(s.threshold) ? nlohmann::ordered_json("inf")
                                                                            : nlohmann::ordered_json(s.threshold)},
                                      {"dev_f1", s.f1}});
                }
            }
            const auto report = run_benchmark(pairs, methods, senses, *backend, args->config);
            for (const auto& f : report.backend_failures) log::error("backend: " + f);
            if (!report.backend_failures.empty()) throw BackendError("embedding pairs failed");
            auto j = to_json(report);
            j["thresholds"] = {{"cd", args->config.cd_threshold}, {"prt", args->config.prt_threshold}};
            if (!sweeps.empty()) j["sweep"] = std::move(sweeps);
            write_json(args->out, j);
            for (const auto& r : report.results) {
                log::info(to_string(r.method) + ": F1 " + std::to_string(r.f1) + " over " +
                          std::to_string(r.n_pairs) + " pairs" + (r.valid ? "" : " (invalid)"));
            }
        };
    });
}

// ---- pipeline ----

struct PipelineArgs {
    std::string config, out_dir, algorithm, backend;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

void add_pipeline(CLI::App& app, std::function<void()>& action) {
    auto args = std::make_shared<PipelineArgs>();
    auto* cmd = app.add_subcommand(
        "pipeline",
        "Run clean, chunk, find, embed, cluster, shift and dwug from one YAML config.\n"
        "Config defaults: chunk.max_tokens 256, clustering.damping 0.975, projection.perplexity 50,\n"
        "shift.min_fraction 0.10, shift.change_threshold 0.5");
    cmd->add_option("--config", args->config, "Pipeline config (YAML)")->required();
    cmd->add_option("--out-dir", args->out_dir, "Override paths.output_dir");
    cmd->add_option("--seed", args->seed, "Override seed");
    cmd->add_option("--workers", args->workers, "Override workers");
    cmd->add_option("--algorithm", args->algorithm, "Override clustering.algorithm (ap, km-sil, km-inertia)");
    cmd->add_option("--backend", args->backend, "Override embed.backend (file or an http url)");
    cmd->callback([&action, args] {
        action = [args] {
            auto config = load_pipeline_config(args->config);
            if (!args->out_dir.empty()) config.paths.output_dir = fs::absolute(args->out_dir);
            if (args->seed) {
                config.seed = *args->seed;
                config.clustering.seed = *args->seed;
                config.tsne.seed = *args->seed;
            }
            if (args->workers) config.workers = *args->workers;
            if (!args->algorithm.empty()) config.clustering.algorithm = parse_algorithm(args->algorithm);
            if (!args->backend.empty()) config.backend = args->backend;
            const auto run = run_pipeline(config);
            for (const auto& [w, reason] : run.skipped_words) log::warn("skipped " + w + ": " + reason);
            log::info("manifest: " + run.manifest_path.string());
        };
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic shift detection over two diachronic corpora.\n"
                 "Exit codes: 0 success, 1 validation error, 2 data error, 3 backend error."};
    app.require_subcommand(1);
    bool json_logs = false;
    bool verbose = false;
    bool quiet = false;
    app.add_flag("--json-logs", json_logs, "Log JSON objects to stderr");
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

    std::function<void()> action;
    add_clean(app, action);
    add_chunk(app, action);
    add_find(app, action);
    add_embed(app, action);
    add_cluster(app, action);
    add_shift(app, action);
    add_dwug(app, action);
    add_neighbors(app, action);
    add_eval(app, action);
    add_pipeline(app, action);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }
    log::configure(verbose ? log::Level::debug : quiet ? log::Level::warn : log::Level::info, json_logs);
    try {
        if (action) action();
    } catch (const Error& e) {
        log::error(e.what());
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        log::error(e.what());
        return static_cast<int>(ErrorKind::data);
    }
    return 0;
}
