#include "ssd/eval.hpp"

#include "ssd/error.hpp"
#include "ssd/shift.hpp"
#include "ssd/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace ssd {

int binarize_rating(int rating) {
    if (rating < 1 || rating > 4) throw ValidationError("rating must be in [1, 4], got " + std::to_string(rating));
    return rating >= 3 ? 1 : 0;
}

namespace {

std::pair<std::size_t, std::size_t> read_span(const nlohmann::json& j, const std::string& sentence, const char* name) {
    if (!j.is_array() || j.size() != 2) throw DataError(std::string(name) + " must be [start, end]");
    const auto start = j[0].get<std::size_t>();
    const auto end = j[1].get<std::size_t>();
    if (start >= end || end > text::length(sentence)) {
        throw DataError(std::string(name) + " [" + std::to_string(start) + ", " + std::to_string(end) +
                        ") is outside its sentence");
    }
    return {start, end};
}

}  // namespace

std::vector<AnnotatedPair> read_pairs(std::istream& in, const std::string& origin) {
    std::vector<AnnotatedPair> out;
    std::set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        ++row;
        const std::string where = origin + ":" + std::to_string(lineno) + ": ";
        try {
            if (!text::is_valid_utf8(line)) throw DataError("invalid UTF-8");
            const auto j = nlohmann::json::parse(line);
            AnnotatedPair p;
            p.id = j.contains("id") ? j["id"].get<std::string>() : "pair-" + std::to_string(row);
            p.word = j.at("word").get<std::string>();
            p.sentence_a = j.at("sentence_a").get<std::string>();
            p.sentence_b = j.at("sentence_b").get<std::string>();
            p.span_a = read_span(j.at("span_a"), p.sentence_a, "span_a");
            p.span_b = read_span(j.at("span_b"), p.sentence_b, "span_b");
            p.rating = j.at("rating").get<int>();
            binarize_rating(p.rating);
            if (p.word.empty()) throw DataError("empty word");
            if (!ids.insert(p.id).second) throw DataError("duplicate pair id '" + p.id + "'");
            out.push_back(std::move(p));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + e.what());
        } catch (const Error& e) {
            throw DataError(where + e.what());
        }
    }
    return out;
}

std::vector<AnnotatedPair> read_pairs_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open pairs file " + path.string());
    return read_pairs(in, path.string());
}

nlohmann::ordered_json to_json(const AnnotatedPair& p) {
    return {{"id", p.id},
            {"word", p.word},
            {"sentence_a", p.sentence_a},
            {"span_a", {p.span_a.first, p.span_a.second}},
            {"sentence_b", p.sentence_b},
            {"span_b", {p.span_b.first, p.span_b.second}},
            {"rating", p.rating}};
}

std::string to_string(EvalMethod m) {
    switch (m) {
        case EvalMethod::ap: return "ap";
        case EvalMethod::km_inertia: return "km-inertia";
        case EvalMethod::km_silhouette: return "km-sil";
        case EvalMethod::cd: return "cd";
        case EvalMethod::prt: return "prt";
    }
    return "ap";
}

EvalMethod parse_eval_method(const std::string& s) {
    if (s == "ap") return EvalMethod::ap;
    if (s == "km-inertia" || s == "km_inertia") return EvalMethod::km_inertia;
    if (s == "km-sil" || s == "km_silhouette") return EvalMethod::km_silhouette;
    if (s == "cd") return EvalMethod::cd;
    if (s == "prt") return EvalMethod::prt;
    throw ValidationError("unknown eval method '" + s + "' (expected ap, km-sil, km-inertia, cd or prt)");
}

std::vector<EvalMethod> parse_eval_methods(const std::string& csv) {
    std::vector<EvalMethod> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string name(text::trim(item));
        if (name.empty()) continue;
        const auto m = parse_eval_method(name);
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    if (out.empty()) throw ValidationError("no eval methods given");
    return out;
}

bool is_clustering_method(EvalMethod m) {
    return m == EvalMethod::ap || m == EvalMethod::km_inertia || m == EvalMethod::km_silhouette;
}

ClusteringAlgorithm algorithm_for(EvalMethod m) {
    switch (m) {
        case EvalMethod::ap: return ClusteringAlgorithm::ap;
        case EvalMethod::km_inertia: return ClusteringAlgorithm::kmeans_inertia;
        case EvalMethod::km_silhouette: return ClusteringAlgorithm::kmeans_silhouette;
        default: break;
    }
    throw ValidationError(to_string(m) + " is not a clustering method");
}

std::vector<Eigen::VectorXd> combined_centroids(const SenseClustering& clustering) {
    std::vector<Eigen::VectorXd> out;
    for (int s = 0; s < clustering.m; ++s) {
        const auto& o = clustering.cell(s, Period::old_period).centroid;
        const auto& n = clustering.cell(s, Period::new_period).centroid;
        if (o && n) {
            out.push_back(0.5 * (*o + *n));
        } else if (o) {
            out.push_back(*o);
        } else if (n) {
            out.push_back(*n);
        } else {
            throw DataError("sense " + std::to_string(s) + " of '" + clustering.word + "' has no members");
        }
    }
    return out;
}

int nearest_sense(const std::vector<Eigen::VectorXd>& centroids, const Eigen::VectorXd& e) {
    if (centroids.empty()) throw ValidationError("no centroids to assign to");
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < centroids.size(); ++s) {
        if (centroids[s].size() != e.size()) throw ValidationError("embedding dimension differs from the centroids");
        const double d = (centroids[s] - e).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(s);
        }
    }
    return best;
}

int classify_pair_clustering(const std::vector<Eigen::VectorXd>& centroids, const Eigen::VectorXd& a,
                             const Eigen::VectorXd& b) {
    return nearest_sense(centroids, a) == nearest_sense(centroids, b) ? 0 : 1;
}

int classify_pair_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, EvalMethod method, double threshold) {
    const double cs = cosine_similarity(a, b);
    if (method == EvalMethod::cd) return (1.0 - cs) >= threshold ? 1 : 0;
    if (method == EvalMethod::prt) return (cs <= 0.0 || 1.0 / cs >= threshold) ? 1 : 0;
    throw ValidationError(to_string(method) + " is not a distance method");
}

void Confusion::add(int gold, int predicted) {
    if (gold && predicted) ++tp;
    else if (!gold && predicted) ++fp;
    else if (gold && !predicted) ++fn;
    else ++tn;
}

double Confusion::precision() const { return tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0; }
double Confusion::recall() const { return tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0; }

double Confusion::f1() const {
    const double p = precision();
    const double r = recall();
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

EvalResult score(EvalMethod method, const std::vector<Prediction>& predictions) {
    EvalResult r;
    r.method = method;
    for (const auto& p : predictions) {
        if (!p.predicted) {
            ++r.n_skipped;
            continue;
        }
        r.confusion.add(p.gold, *p.predicted);
        r.per_word[p.word].add(p.gold, *p.predicted);
        ++r.n_pairs;
    }
    r.valid = r.n_pairs > 0;
    r.precision = r.confusion.precision();
    r.recall = r.confusion.recall();
    r.f1 = r.confusion.f1();
    return r;
}

PairVectors embed_pairs(const std::vector<AnnotatedPair>& pairs, EmbeddingBackend& backend,
                        const FetchOptions& options) {
    std::vector<EmbedRequest> requests;
    requests.reserve(2 * pairs.size());
    for (const auto& p : pairs) {
        requests.push_back({p.id + "/a", p.sentence_a, p.span_a.first, p.span_a.second});
        requests.push_back({p.id + "/b", p.sentence_b, p.span_b.first, p.span_b.second});
    }
    PairVectors out;
    const auto vectors = embed_requests(requests, backend, options, out.backend_failures);
    auto to_eigen = [](const std::vector<float>& v) {
        Eigen::VectorXd e(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) e(static_cast<Eigen::Index>(i)) = v[i];
        return e;
    };
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& a = vectors[2 * i];
        const auto& b = vectors[2 * i + 1];
        if (a && b) {
            out.vectors.emplace_back(std::in_place, to_eigen(*a), to_eigen(*b));
        } else {
            out.vectors.emplace_back(std::nullopt);
        }
    }
    return out;
}

std::vector<Prediction> predict(const std::vector<AnnotatedPair>& pairs, const PairVectors& vectors,
                                EvalMethod method, const SenseIndex& senses, const EvalConfig& config) {
    if (vectors.vectors.size() != pairs.size()) throw ValidationError("pair vectors do not align with the pairs");
    const std::map<std::string, SenseClustering>* words = nullptr;
    std::map<std::string, std::vector<Eigen::VectorXd>> centroids;
    if (is_clustering_method(method)) {
        const auto it = senses.find(algorithm_for(method));
        if (it != senses.end()) words = &it->second;
    }
    std::vector<Prediction> out;
    out.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& pair = pairs[i];
        Prediction p{pair.word, binarize_rating(pair.rating), std::nullopt};
        const auto& vec = vectors.vectors[i];
        if (!vec) {
            out.push_back(std::move(p));
            continue;
        }
        if (is_clustering_method(method)) {
            if (words) {
                const auto w = words->find(pair.word);
                if (w != words->end() && w->second.m > 0) {
                    auto c = centroids.find(pair.word);
                    if (c == centroids.end()) c = centroids.emplace(pair.word, combined_centroids(w->second)).first;
                    p.predicted = classify_pair_clustering(c->second, vec->first, vec->second);
                }
            }
        } else {
            const double t = method == EvalMethod::cd ? config.cd_threshold : config.prt_threshold;
            p.predicted = classify_pair_distance(vec->first, vec->second, method, t);
        }
        out.push_back(std::move(p));
    }
    return out;
}

void fill_averages(BenchmarkReport& report) {
    auto mean_of = [&](auto&& pick) -> std::optional<double> {
        double sum = 0.0;
        int n = 0;
        for (const auto& r : report.results) {
            if (!pick(r.method)) continue;
            if (!r.valid) return std::nullopt;
            sum += r.f1;
            ++n;
        }
        return n ? std::optional<double>(sum / n) : std::nullopt;
    };
    std::set<EvalMethod> present;
    for (const auto& r : report.results) present.insert(r.method);
    report.average_clustering.reset();
    report.average_all.reset();
    if (present.count(EvalMethod::ap) && present.count(EvalMethod::km_inertia) &&
        present.count(EvalMethod::km_silhouette)) {
        report.average_clustering = mean_of(is_clustering_method);
        if (present.count(EvalMethod::cd) && present.count(EvalMethod::prt)) {
            report.average_all = mean_of([](EvalMethod) { return true; });
        }
    }
}

BenchmarkReport run_benchmark(const std::vector<AnnotatedPair>& pairs, const std::vector<EvalMethod>& methods,
                              const SenseIndex& senses, EmbeddingBackend& backend, const EvalConfig& config) {
    if (pairs.empty()) throw ValidationError("no annotated pairs to evaluate");
    BenchmarkReport report;
    const auto vectors = embed_pairs(pairs, backend, config.fetch);
    report.backend_failures = vectors.backend_failures;
    for (const auto& v : vectors.vectors) report.missing_embeddings += v ? 0 : 1;
    for (const auto m : methods) report.results.push_back(score(m, predict(pairs, vectors, m, senses, config)));
    fill_averages(report);
    return report;
}

SweepResult sweep_threshold(const std::vector<AnnotatedPair>& pairs, const PairVectors& vectors, EvalMethod method) {
    if (method != EvalMethod::cd && method != EvalMethod::prt) {
        throw ValidationError("threshold sweep applies to cd and prt only");
    }
    std::vector<double> candidates;
    for (const auto& v : vectors.vectors) {
        if (!v) continue;
        const double cs = cosine_similarity(v->first, v->second);
        if (method == EvalMethod::cd) {
            candidates.push_back(1.0 - cs);
        } else if (cs > 0.0) {
            candidates.push_back(1.0 / cs);
        }
    }
    candidates.push_back(std::numeric_limits<double>::infinity());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    SweepResult best{method, candidates.front(), -1.0};
    for (double t : candidates) {
        EvalConfig cfg;
        cfg.cd_threshold = t;
        cfg.prt_threshold = t;
        const double f1 = score(method, predict(pairs, vectors, method, {}, cfg)).f1;
        if (f1 > best.f1) best = {method, t, f1};
    }
    return best;
}

namespace {

nlohmann::ordered_json confusion_json(const Confusion& c) {
    return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn},
            {"precision", c.precision()}, {"recall", c.recall()}, {"f1", c.f1()}};
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json to_json(const EvalResult& r) {
    nlohmann::ordered_json j;
    j["method"] = to_string(r.method);
    j["f1"] = r.f1;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["n_pairs"] = r.n_pairs;
    j["n_skipped"] = r.n_skipped;
    j["valid"] = r.valid;
    j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn}, {"tn", r.confusion.tn}};
    nlohmann::ordered_json words = nlohmann::ordered_json::object();
    for (const auto& [w, c] : r.per_word) words[w] = confusion_json(c);
    j["per_word"] = std::move(words);
    return j;
}

nlohmann::ordered_json to_json(const BenchmarkReport& report) {
    nlohmann::ordered_json j;
    j["results"] = nlohmann::ordered_json::array();
    for (const auto& r : report.results) j["results"].push_back(to_json(r));
    j["average_clustering"] = optional_json(report.average_clustering);
    j["average_all"] = optional_json(report.average_all);
    j["missing_embeddings"] = report.missing_embeddings;
    j["backend_failures"] = report.backend_failures;
    return j;
}

}  // namespace ssd
