#pragma once

#include "ssd/clustering.hpp"
#include "ssd/corpus.hpp"
#include "ssd/embeddings.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace ssd {

// Rows are points; returns an n x 2 matrix. Components are ordered by
// descending variance and each is signed so its largest-magnitude loading
// is positive. Identical points project to the origin.
Eigen::MatrixXd pca_2d(const Eigen::MatrixXd& points);

inline constexpr double kDefaultPerplexity = 50.0;

struct TsneOptions {
    double perplexity = kDefaultPerplexity;
    int iterations = 1000;
    // Unset means max(n / early_exaggeration / 4, 50).
    std::optional<double> learning_rate;
    double early_exaggeration = 12.0;
    int exaggeration_iterations = 250;
    int momentum_switch = 250;
    std::uint64_t seed = 7;
};

struct TsneResult {
    Eigen::MatrixXd embedding;  // n x 2
    double effective_perplexity = 0.0;
    std::vector<double> kl_trace;  // KL(P || Q) with unexaggerated P, one per iteration
};

// min(perplexity, (n - 1) / 3)
double effective_perplexity(double perplexity, std::size_t n);

// Exact t-SNE. Requires n >= 5 and perplexity > 0.
TsneResult tsne_2d(const Eigen::MatrixXd& points, const TsneOptions& options = {});

enum class ProjectionMethod { pca, tsne };
std::string to_string(ProjectionMethod m);
ProjectionMethod parse_projection(const std::string& s);

struct DwugPoint {
    std::string occurrence_id;
    Period period = Period::old_period;
    int sense = 0;
    double x = 0.0;
    double y = 0.0;
};

struct DwugExport {
    std::string word;
    ProjectionMethod method = ProjectionMethod::tsne;
    double perplexity = 0.0;            // requested, t-SNE only
    double effective_perplexity = 0.0;  // t-SNE only
    std::uint64_t seed = 0;
    std::vector<DwugPoint> points;      // old rows then new rows, each ordered by id
    std::vector<std::string> colors;    // color per sense

    std::vector<DwugPoint> view(Period p) const;
};

// Fixed categorical palette; senses beyond it cycle.
const std::vector<std::string>& sense_palette();

// One shared layout over both periods. `options` is read for t-SNE only.
DwugExport export_dwug(const SenseClustering& clustering, const PeriodSplit& split, ProjectionMethod method,
                       const TsneOptions& options = {});

nlohmann::ordered_json to_json(const DwugExport& dwug);
enum class DwugView { old_period, new_period, combined };
std::string render_svg(const DwugExport& dwug, DwugView view);

// Writes <word>.json and <word>_{old,new,combined}.svg; returns the paths.
std::vector<std::filesystem::path> write_dwug(const DwugExport& dwug, const std::filesystem::path& dir);

// Centroid of the sense with the most members in the period, ties to the
// lower sense index. Throws DataError when the period is empty.
std::pair<int, Eigen::VectorXd> dominant_sense_centroid(const SenseClustering& clustering, Period period);

inline constexpr std::size_t kDefaultNeighbors = 5;

struct NeighborReport {
    std::string word;
    Period period = Period::old_period;
    int dominant_sense = 0;
    std::vector<std::pair<std::string, double>> neighbors;  // descending similarity
    bool short_list = false;
    std::vector<std::string> skipped;  // candidates with no occurrences in the period
};

NeighborReport diachronic_neighbors(const SenseClustering& target, const std::vector<SenseClustering>& candidates,
                                    Period period, std::size_t top = kDefaultNeighbors);

nlohmann::ordered_json to_json(const NeighborReport& report);

}  // namespace ssd
