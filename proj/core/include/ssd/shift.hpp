#pragma once

#include "ssd/clustering.hpp"

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace ssd {

// dot(a, b) / (|a| |b|); throws ValidationError on zero vectors or a
// dimension mismatch.
double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct FrequencyRule {
    double min_fraction = 0.10;
    void validate() const;
};

// A sense is present in a period when it holds at least min_fraction of the
// period's occurrences.
bool effective_presence(std::size_t count, std::size_t total, const FrequencyRule& rule);

enum class SenseStatus { continuous, gained, lost };
std::string to_string(SenseStatus s);
SenseStatus parse_status(const std::string& s);

struct SenseShift {
    int sense = 0;
    double cd = 0.0;
    double prt = 0.0;  // +inf for gained/lost senses and non-positive similarity
    SenseStatus status = SenseStatus::continuous;
    std::size_t count_old = 0;
    std::size_t count_new = 0;
    bool effective_old = false;
    bool effective_new = false;
    bool anomalous = false;               // effective in neither period
    bool nonpositive_similarity = false;  // continuous sense with CS <= 0
};

struct ShiftReport {
    std::string word;
    std::vector<SenseShift> senses;
};

ShiftReport sense_shift(const SenseClustering& clustering, const FrequencyRule& rule = {});

struct ShiftSummary {
    double max_cd = 0.0;
    bool any_gained = false;
    bool any_lost = false;
    bool binary_change = false;
};

inline constexpr double kDefaultChangeThreshold = 0.5;

ShiftSummary word_shift_summary(const ShiftReport& report, double threshold = kDefaultChangeThreshold);

// Words ordered by descending max_cd, ties by word.
struct RankedWord {
    std::string word;
    ShiftSummary summary;
};
std::vector<RankedWord> rank_by_change(const std::vector<ShiftReport>& reports,
                                       double threshold = kDefaultChangeThreshold);

nlohmann::ordered_json to_json(const ShiftReport& report, double threshold = kDefaultChangeThreshold);
ShiftReport shift_report_from_json(const nlohmann::json& j);
nlohmann::ordered_json ranking_json(const std::vector<RankedWord>& ranking);

// {"reports": [...], "ranking": [...]}
void write_shift_file(const std::string& path, const std::vector<ShiftReport>& reports,
                      double threshold = kDefaultChangeThreshold);
std::vector<ShiftReport> read_shift_file(const std::string& path);

}  // namespace ssd
