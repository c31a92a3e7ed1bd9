#pragma once

#include "ssd/clustering.hpp"
#include "ssd/embeddings.hpp"

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace ssd {

struct AnnotatedPair {
    std::string id;  // backend lookup key; "<id>/a" and "<id>/b" for the two usages
    std::string word;
    std::string sentence_a;
    std::pair<std::size_t, std::size_t> span_a;  // code-point offsets
    std::string sentence_b;
    std::pair<std::size_t, std::size_t> span_b;
    int rating = 1;
};

// 1, 2 -> 0 (no change); 3, 4 -> 1. Throws ValidationError otherwise.
int binarize_rating(int rating);

// Rows without an "id" get "pair-<n>", n counting rows from 1.
std::vector<AnnotatedPair> read_pairs(std::istream& in, const std::string& origin = "<pairs>");
std::vector<AnnotatedPair> read_pairs_file(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const AnnotatedPair& pair);

enum class EvalMethod { ap, km_inertia, km_silhouette, cd, prt };
std::string to_string(EvalMethod m);  // ap, km-inertia, km-sil, cd, prt
EvalMethod parse_eval_method(const std::string& s);
std::vector<EvalMethod> parse_eval_methods(const std::string& csv);
bool is_clustering_method(EvalMethod m);
ClusteringAlgorithm algorithm_for(EvalMethod m);

inline constexpr double kDefaultCdThreshold = 0.5;
inline constexpr double kDefaultPrtThreshold = 2.0;

// Per sense, the mean of the period centroids it has.
std::vector<Eigen::VectorXd> combined_centroids(const SenseClustering& clustering);

// Index of the nearest centroid by Euclidean distance, ties to the lower index.
int nearest_sense(const std::vector<Eigen::VectorXd>& centroids, const Eigen::VectorXd& e);

int classify_pair_clustering(const std::vector<Eigen::VectorXd>& centroids, const Eigen::VectorXd& a,
                             const Eigen::VectorXd& b);

// cd: 1 iff 1 - CS >= threshold. prt: 1 iff CS <= 0 or 1 / CS >= threshold.
int classify_pair_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, EvalMethod method, double threshold);

struct Confusion {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    void add(int gold, int predicted);
    double precision() const;
    double recall() const;
    double f1() const;
    std::size_t total() const { return tp + fp + fn + tn; }
};

struct EvalResult {
    EvalMethod method = EvalMethod::ap;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    std::size_t n_pairs = 0;  // pairs scored
    std::size_t n_skipped = 0;
    bool valid = true;  // false when every pair was skipped
    Confusion confusion;
    std::map<std::string, Confusion> per_word;
};

struct Prediction {
    std::string word;
    int gold = 0;
    std::optional<int> predicted;  // nullopt means skipped
};

EvalResult score(EvalMethod method, const std::vector<Prediction>& predictions);

struct EvalConfig {
    double cd_threshold = kDefaultCdThreshold;
    double prt_threshold = kDefaultPrtThreshold;
    FetchOptions fetch;
};

// Clusterings per algorithm, keyed by word.
using SenseIndex = std::map<ClusteringAlgorithm, std::map<std::string, SenseClustering>>;

struct PairVectors {
    std::vector<std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>>> vectors;  // aligned with the pairs
    std::vector<std::string> backend_failures;
};

PairVectors embed_pairs(const std::vector<AnnotatedPair>& pairs, EmbeddingBackend& backend,
                        const FetchOptions& options = {});

std::vector<Prediction> predict(const std::vector<AnnotatedPair>& pairs, const PairVectors& vectors,
                                EvalMethod method, const SenseIndex& senses, const EvalConfig& config);

struct BenchmarkReport {
    std::vector<EvalResult> results;
    std::optional<double> average_clustering;  // mean F1 of ap, km-inertia, km-sil
    std::optional<double> average_all;         // mean F1 of all five methods
    std::size_t missing_embeddings = 0;
    std::vector<std::string> backend_failures;
};

BenchmarkReport run_benchmark(const std::vector<AnnotatedPair>& pairs, const std::vector<EvalMethod>& methods,
                              const SenseIndex& senses, EmbeddingBackend& backend, const EvalConfig& config = {});

// Averages over the valid results present for the respective method sets.
void fill_averages(BenchmarkReport& report);

struct SweepResult {
    EvalMethod method = EvalMethod::cd;
    double threshold = 0.0;
    double f1 = 0.0;
};

// Best-F1 threshold among the pair scores observed (ties to the smaller
// threshold). method is cd or prt.
SweepResult sweep_threshold(const std::vector<AnnotatedPair>& pairs, const PairVectors& vectors, EvalMethod method);

nlohmann::ordered_json to_json(const EvalResult& result);
nlohmann::ordered_json to_json(const BenchmarkReport& report);

}  // namespace ssd
