#pragma once

#include "ssd/corpus.hpp"
#include "ssd/embeddings.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace ssd {

enum class ClusteringAlgorithm { ap, kmeans_silhouette, kmeans_inertia };
enum class DistanceMetric { euclidean, cosine };

std::string to_string(ClusteringAlgorithm a);
// Accepts the JSON names and the CLI short names (ap, km-sil, km-inertia).
ClusteringAlgorithm parse_algorithm(const std::string& s);
std::string cli_name(ClusteringAlgorithm a);
DistanceMetric parse_metric(const std::string& s);

struct ClusteringConfig {
    ClusteringAlgorithm algorithm = ClusteringAlgorithm::ap;
    int k_min = 2;
    int k_max = 10;
    double ap_damping = 0.975;
    int ap_max_iter = 1000;
    int ap_convergence_iter = 100;
    // Self-similarity; the median of off-diagonal similarities when unset.
    std::optional<double> ap_preference;
    std::uint64_t seed = 7;
    int n_init = 10;
    int kmeans_max_iter = 300;
    DistanceMetric metric = DistanceMetric::euclidean;

    void validate() const;  // throws ValidationError
};

struct KMeansResult {
    std::vector<int> labels;
    Eigen::MatrixXd centroids;  // k x d
    double inertia = 0.0;
    int iterations = 0;
    std::vector<double> inertia_trace;  // best restart, one value per Lloyd iteration
};

// k-means++ seeding, Lloyd iterations until no assignment changes (or
// max_iter), best of n_init restarts by inertia. Restart r uses seed + r.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int n_init = 10, int max_iter = 300);

// Mean silhouette with Euclidean distance; singleton clusters contribute 0.
// Throws ValidationError with fewer than two distinct labels.
double silhouette_score(const Eigen::MatrixXd& points, std::span<const int> labels);

enum class KCriterion { silhouette, inertia };

struct KSelection {
    int k = 0;
    std::vector<int> labels;
    std::vector<std::pair<int, double>> scores;  // silhouette per K, or the elbow score per K
    std::vector<std::pair<int, double>> inertias;
};

// Searches K in [k_min, min(k_max, n - 1)]. The inertia criterion picks the
// K maximizing I(K-1) - 2 I(K) + I(K+1). Ties go to the smaller K.
KSelection auto_k_kmeans(const Eigen::MatrixXd& points, const ClusteringConfig& config, KCriterion criterion);

struct AffinityPropagationResult {
    std::vector<int> labels;
    std::vector<int> exemplars;  // point index per cluster
    int iterations = 0;
    bool converged = false;
    double preference = 0.0;
};

// Similarity is negative squared Euclidean distance.
AffinityPropagationResult affinity_propagation(const Eigen::MatrixXd& points, const ClusteringConfig& config);

// Relabels so clusters are numbered by first appearance.
std::vector<int> canonical_labels(std::span<const int> labels);

struct SenseCell {
    std::vector<std::string> members;
    std::optional<Eigen::VectorXd> centroid;  // present iff members non-empty
};

struct SenseClustering {
    std::string word;
    ClusteringAlgorithm algorithm = ClusteringAlgorithm::ap;
    int m = 0;
    std::map<std::string, int> labels;
    std::vector<std::array<SenseCell, 2>> senses;  // [sense][period]
    bool converged = true;

    const SenseCell& cell(int sense, Period p) const {
        return senses.at(static_cast<std::size_t>(sense))[p == Period::old_period ? 0 : 1];
    }
    std::size_t count(int sense, Period p) const { return cell(sense, p).members.size(); }
    std::size_t period_total(Period p) const;
};

// labels align with split.old_ids followed by split.new_ids. Centroids are
// arithmetic means of the member vectors.
SenseClustering build_sense_sets(const std::string& word, ClusteringAlgorithm algorithm, std::span<const int> labels,
                                 const PeriodSplit& split);

// Checks that per-period member sets are pairwise disjoint and cover the
// period's ids exactly; returns a description of the first violation.
std::optional<std::string> partition_violation(const SenseClustering& clustering, const PeriodSplit& split);

// Joint clustering of both periods with the configured algorithm.
SenseClustering cluster_word(const std::string& word, const PeriodSplit& split, const ClusteringConfig& config);

std::size_t min_points_for(const ClusteringConfig& config);

// The period split behind a stored clustering: each period's members, ordered
// by id, with their vectors from the store.
PeriodSplit split_for(const SenseClustering& clustering, const EmbeddingStore& store);

nlohmann::ordered_json to_json(const SenseClustering& c);
SenseClustering sense_clustering_from_json(const nlohmann::json& j);  // throws DataError
void write_senses_file(const std::string& path, const std::vector<SenseClustering>& clusterings);
std::vector<SenseClustering> read_senses_file(const std::string& path);

}  // namespace ssd
