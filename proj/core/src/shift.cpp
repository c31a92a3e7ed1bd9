#include "ssd/shift.hpp"

#include "ssd/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace ssd {

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) {
        throw ValidationError("cosine similarity of vectors with dimensions " + std::to_string(a.size()) + " and " +
                              std::to_string(b.size()));
    }
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw ValidationError("cosine similarity of a zero vector");
    return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

void FrequencyRule::validate() const {
    if (!(min_fraction >= 0.0 && min_fraction < 0.5)) {
        throw ValidationError("min_fraction must be in [0, 0.5), got " + std::to_string(min_fraction));
    }
}

bool effective_presence(std::size_t count, std::size_t total, const FrequencyRule& rule) {
    if (total == 0 || count == 0) return false;
    if (count > total) throw ValidationError("sense count exceeds the period total");
    return static_cast<double>(count) >= rule.min_fraction * static_cast<double>(total);
}

std::string to_string(SenseStatus s) {
    switch (s) {
        case SenseStatus::continuous: return "continuous";
        case SenseStatus::gained: return "gained";
        case SenseStatus::lost: return "lost";
    }
    return "continuous";
}

SenseStatus parse_status(const std::string& s) {
    if (s == "continuous") return SenseStatus::continuous;
    if (s == "gained") return SenseStatus::gained;
    if (s == "lost") return SenseStatus::lost;
    throw DataError("unknown sense status '" + s + "'");
}

ShiftReport sense_shift(const SenseClustering& clustering, const FrequencyRule& rule) {
    rule.validate();
    ShiftReport report;
    report.word = clustering.word;
    const std::size_t total_old = clustering.period_total(Period::old_period);
    const std::size_t total_new = clustering.period_total(Period::new_period);
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (int s = 0; s < clustering.m; ++s) {
        SenseShift e;
        e.sense = s;
        e.count_old = clustering.count(s, Period::old_period);
        e.count_new = clustering.count(s, Period::new_period);
        e.effective_old = effective_presence(e.count_old, total_old, rule);
        e.effective_new = effective_presence(e.count_new, total_new, rule);
        if (e.effective_old && e.effective_new) {
            const double cs = cosine_similarity(*clustering.cell(s, Period::old_period).centroid,
                                                *clustering.cell(s, Period::new_period).centroid);
            e.status = SenseStatus::continuous;
            e.cd = 1.0 - cs;
            if (cs > 0.0) {
                e.prt = 1.0 / cs;
            } else {
                e.prt = inf;
                e.nonpositive_similarity = true;
            }
        } else {
            e.status = e.effective_new ? SenseStatus::gained : SenseStatus::lost;
            e.anomalous = !e.effective_old && !e.effective_new;
            e.cd = 1.0;
            e.prt = inf;
        }
        report.senses.push_back(e);
    }
    return report;
}

ShiftSummary word_shift_summary(const ShiftReport& report, double threshold) {
    if (report.senses.empty()) throw ValidationError("shift report for '" + report.word + "' has no senses");
    ShiftSummary out;
    out.max_cd = -std::numeric_limits<double>::infinity();
    for (const auto& s : report.senses) {
        out.max_cd = std::max(out.max_cd, s.cd);
        out.any_gained |= s.status == SenseStatus::gained;
        out.any_lost |= s.status == SenseStatus::lost;
    }
    out.binary_change = out.any_gained || out.any_lost || out.max_cd >= threshold;
    return out;
}

std::vector<RankedWord> rank_by_change(const std::vector<ShiftReport>& reports, double threshold) {
    std::vector<RankedWord> out;
    for (const auto& r : reports) {
        if (!r.senses.empty()) out.push_back({r.word, word_shift_summary(r, threshold)});
    }
    std::stable_sort(out.begin(), out.end(), [](const RankedWord& a, const RankedWord& b) {
        if (a.summary.max_cd != b.summary.max_cd) return a.summary.max_cd > b.summary.max_cd;
        return a.word < b.word;
    });
    return out;
}

namespace {

nlohmann::ordered_json real_json(double v) {
    if (std::isinf(v) && v > 0) return "inf";
    return v;
}

double json_real(const nlohmann::json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
        throw DataError("unexpected string value '" + j.get<std::string>() + "'");
    }
    return j.get<double>();
}

nlohmann::ordered_json summary_json(const ShiftSummary& s) {
    return {{"max_cd", s.max_cd},
            {"any_gained", s.any_gained},
            {"any_lost", s.any_lost},
            {"binary_change", s.binary_change}};
}

}  // namespace

nlohmann::ordered_json to_json(const ShiftReport& report, double threshold) {
    nlohmann::ordered_json j;
    j["word"] = report.word;
    auto senses = nlohmann::ordered_json::array();
    for (const auto& s : report.senses) {
        nlohmann::ordered_json e;
        e["sense"] = s.sense;
        e["cd"] = s.cd;
        e["prt"] = real_json(s.prt);
        e["status"] = to_string(s.status);
        e["count_old"] = s.count_old;
        e["count_new"] = s.count_new;
        e["effective_old"] = s.effective_old;
        e["effective_new"] = s.effective_new;
        e["anomalous"] = s.anomalous;
        e["nonpositive_similarity"] = s.nonpositive_similarity;
        senses.push_back(std::move(e));
    }
    j["senses"] = std::move(senses);
    if (!report.senses.empty()) j["summary"] = summary_json(word_shift_summary(report, threshold));
    return j;
}

ShiftReport shift_report_from_json(const nlohmann::json& j) {
    try {
        ShiftReport r;
        r.word = j.at("word").get<std::string>();
        for (const auto& e : j.at("senses")) {
            SenseShift s;
            s.sense = e.at("sense").get<int>();
            s.cd = json_real(e.at("cd"));
            s.prt = json_real(e.at("prt"));
            s.status = parse_status(e.at("status").get<std::string>());
            s.count_old = e.at("count_old").get<std::size_t>();
            s.count_new = e.at("count_new").get<std::size_t>();
            s.effective_old = e.at("effective_old").get<bool>();
            s.effective_new = e.at("effective_new").get<bool>();
            s.anomalous = e.value("anomalous", false);
            s.nonpositive_similarity = e.value("nonpositive_similarity", false);
            r.senses.push_back(s);
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed shift report: ") + e.what());
    }
}

nlohmann::ordered_json ranking_json(const std::vector<RankedWord>& ranking) {
    auto arr = nlohmann::ordered_json::array();
    int rank = 1;
    for (const auto& r : ranking) {
        nlohmann::ordered_json e;
        e["rank"] = rank++;
        e["word"] = r.word;
        const auto summary = summary_json(r.summary);
        for (const auto& [k, v] : summary.items()) e[k] = v;
        arr.push_back(std::move(e));
    }
    return arr;
}

void write_shift_file(const std::string& path, const std::vector<ShiftReport>& reports, double threshold) {
    nlohmann::ordered_json j;
    j["reports"] = nlohmann::ordered_json::array();
    for (const auto& r : reports) j["reports"].push_back(to_json(r, threshold));
    j["ranking"] = ranking_json(rank_by_change(reports, threshold));
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << j.dump(1) << '\n';
}

std::vector<ShiftReport> read_shift_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open shift file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("shift file " + path + ": " + e.what());
    }
    std::vector<ShiftReport> out;
    const auto& arr = j.is_object() && j.contains("reports") ? j["reports"] : j;
    if (!arr.is_array()) throw DataError("shift file " + path + " has no report array");
    for (const auto& r : arr) out.push_back(shift_report_from_json(r));
    return out;
}

}  // namespace ssd
