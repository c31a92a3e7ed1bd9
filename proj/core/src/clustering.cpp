#include "ssd/clustering.hpp"

#include "ssd/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace ssd {

std::string to_string(ClusteringAlgorithm a) {
    switch (a) {
        case ClusteringAlgorithm::ap: return "ap";
        case ClusteringAlgorithm::kmeans_silhouette: return "kmeans_silhouette";
        case ClusteringAlgorithm::kmeans_inertia: return "kmeans_inertia";
    }
    return "ap";
}

std::string cli_name(ClusteringAlgorithm a) {
    switch (a) {
        case ClusteringAlgorithm::ap: return "ap";
        case ClusteringAlgorithm::kmeans_silhouette: return "km-sil";
        case ClusteringAlgorithm::kmeans_inertia: return "km-inertia";
    }
    return "ap";
}

ClusteringAlgorithm parse_algorithm(const std::string& s) {
    if (s == "ap") return ClusteringAlgorithm::ap;
    if (s == "km-sil" || s == "kmeans_silhouette" || s == "km_silhouette") return ClusteringAlgorithm::kmeans_silhouette;
    if (s == "km-inertia" || s == "kmeans_inertia" || s == "km_inertia") return ClusteringAlgorithm::kmeans_inertia;
    throw ValidationError("unknown clustering algorithm '" + s + "' (expected ap, km-sil or km-inertia)");
}

DistanceMetric parse_metric(const std::string& s) {
    if (s == "euclidean") return DistanceMetric::euclidean;
    if (s == "cosine") return DistanceMetric::cosine;
    throw ValidationError("unknown metric '" + s + "' (expected euclidean or cosine)");
}

void ClusteringConfig::validate() const {
    std::string problems;
    if (k_min < 2) problems += " k_min must be >= 2;";
    if (k_max < k_min) problems += " k_max must be >= k_min;";
    if (!(ap_damping >= 0.5 && ap_damping < 1.0)) problems += " ap_damping must be in [0.5, 1);";
    if (ap_max_iter < 1) problems += " ap_max_iter must be >= 1;";
    if (ap_convergence_iter < 1) problems += " ap_convergence_iter must be >= 1;";
    if (n_init < 1) problems += " n_init must be >= 1;";
    if (kmeans_max_iter < 1) problems += " kmeans_max_iter must be >= 1;";
    if (ap_preference && !std::isfinite(*ap_preference)) problems += " ap_preference must be finite;";
    if (!problems.empty()) throw ValidationError("invalid clustering config:" + problems);
}

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

struct Restart {
    std::vector<int> labels;
    Eigen::MatrixXd centroids;
    double inertia;
    int iterations;
    std::vector<double> trace;
};

Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng) {
    const auto n = static_cast<std::size_t>(x.rows());
    Eigen::MatrixXd centers(k, x.cols());
    std::size_t first = uniform_index(rng, n);
    centers.row(0) = x.row(static_cast<Eigen::Index>(first));
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = (x.row(static_cast<Eigen::Index>(i)) - centers.row(0)).squaredNorm();
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick = 0;
        if (total <= 0.0) {
            pick = uniform_index(rng, n);
        } else {
            const double target = uniform01(rng) * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target && d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        centers.row(c) = x.row(static_cast<Eigen::Index>(pick));
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], (x.row(static_cast<Eigen::Index>(i)) - centers.row(c)).squaredNorm());
        }
    }
    return centers;
}

Restart lloyd(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng, int max_iter) {
    const Eigen::Index n = x.rows();
    Restart r;
    r.centroids = kmeanspp_seed(x, k, rng);
    r.labels.assign(static_cast<std::size_t>(n), -1);
    std::vector<double> cost(static_cast<std::size_t>(n));
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = (x.row(i) - r.centroids.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            cost[static_cast<std::size_t>(i)] = best_d;
            if (r.labels[static_cast<std::size_t>(i)] != best) {
                r.labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        r.iterations = it + 1;
        if (!changed && it > 0) break;

        // Empty clusters take the point farthest from its centroid, drawn
        // from clusters that keep at least one member.
        std::vector<int> sizes(static_cast<std::size_t>(k), 0);
        for (int l : r.labels) ++sizes[static_cast<std::size_t>(l)];
        for (int c = 0; c < k; ++c) {
            if (sizes[static_cast<std::size_t>(c)] > 0) continue;
            Eigen::Index far = -1;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto li = static_cast<std::size_t>(r.labels[static_cast<std::size_t>(i)]);
                if (sizes[li] > 1 && cost[static_cast<std::size_t>(i)] > far_d) {
                    far_d = cost[static_cast<std::size_t>(i)];
                    far = i;
                }
            }
            if (far < 0) break;
            --sizes[static_cast<std::size_t>(r.labels[static_cast<std::size_t>(far)])];
            r.labels[static_cast<std::size_t>(far)] = c;
            cost[static_cast<std::size_t>(far)] = 0.0;
            sizes[static_cast<std::size_t>(c)] = 1;
        }

        r.centroids.setZero();
        for (Eigen::Index i = 0; i < n; ++i) r.centroids.row(r.labels[static_cast<std::size_t>(i)]) += x.row(i);
        for (int c = 0; c < k; ++c) {
            if (sizes[static_cast<std::size_t>(c)] > 0) r.centroids.row(c) /= sizes[static_cast<std::size_t>(c)];
        }
        double inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            inertia += (x.row(i) - r.centroids.row(r.labels[static_cast<std::size_t>(i)])).squaredNorm();
        }
        r.trace.push_back(inertia);
    }
    r.inertia = r.trace.empty() ? 0.0 : r.trace.back();
    return r;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int n_init, int max_iter) {
    if (k < 1) throw ValidationError("kmeans requires k >= 1");
    if (points.rows() < k) {
        throw ValidationError("kmeans with k=" + std::to_string(k) + " needs at least " + std::to_string(k) +
                              " points, got " + std::to_string(points.rows()));
    }
    std::optional<Restart> best;
    for (int r = 0; r < std::max(1, n_init); ++r) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r));
        auto run = lloyd(points, k, rng, max_iter);
        if (!best || run.inertia < best->inertia) best = std::move(run);
    }
    return {std::move(best->labels), std::move(best->centroids), best->inertia, best->iterations,
            std::move(best->trace)};
}

double silhouette_score(const Eigen::MatrixXd& points, std::span<const int> labels) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (labels.size() != n) throw ValidationError("silhouette: label count does not match point count");
    const auto dense = canonical_labels(labels);
    const int m = dense.empty() ? 0 : *std::max_element(dense.begin(), dense.end()) + 1;
    if (m < 2) throw ValidationError("silhouette is undefined for fewer than two clusters");

    std::vector<std::size_t> sizes(static_cast<std::size_t>(m), 0);
    for (int l : dense) ++sizes[static_cast<std::size_t>(l)];

    std::vector<double> sums(static_cast<std::size_t>(m));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto own = static_cast<std::size_t>(dense[i]);
        if (sizes[own] == 1) continue;
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sums[static_cast<std::size_t>(dense[j])] +=
                (points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).norm();
        }
        const double a = sums[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < sums.size(); ++c) {
            if (c != own) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

KSelection auto_k_kmeans(const Eigen::MatrixXd& points, const ClusteringConfig& config, KCriterion criterion) {
    config.validate();
    const auto n = static_cast<int>(points.rows());
    if (n < config.k_min + 1) {
        throw DataError("automatic K search needs at least " + std::to_string(config.k_min + 1) + " points, got " +
                        std::to_string(n));
    }
    const int hi = std::min(config.k_max, n - 1);
    KSelection sel;
    std::map<int, KMeansResult> runs;
    auto run = [&](int k) -> const KMeansResult& {
        auto it = runs.find(k);
        if (it == runs.end()) {
            it = runs.emplace(k, kmeans(points, k, config.seed, config.n_init, config.kmeans_max_iter)).first;
        }
        return it->second;
    };

    double best_score = -std::numeric_limits<double>::infinity();
    if (criterion == KCriterion::silhouette) {
        for (int k = config.k_min; k <= hi; ++k) {
            const double s = silhouette_score(points, run(k).labels);
            sel.scores.push_back({k, s});
            if (s > best_score) {
                best_score = s;
                sel.k = k;
            }
        }
    } else {
        for (int k = config.k_min - 1; k <= hi + 1; ++k) sel.inertias.push_back({k, run(k).inertia});
        for (int k = config.k_min; k <= hi; ++k) {
            const double elbow = run(k - 1).inertia - 2.0 * run(k).inertia + run(k + 1).inertia;
            sel.scores.push_back({k, elbow});
            if (elbow > best_score) {
                best_score = elbow;
                sel.k = k;
            }
        }
    }
    if (sel.inertias.empty()) {
        for (int k = config.k_min; k <= hi; ++k) sel.inertias.push_back({k, run(k).inertia});
    }
    sel.labels = canonical_labels(run(sel.k).labels);
    return sel;
}

std::vector<int> canonical_labels(std::span<const int> labels) {
    std::unordered_map<int, int> remap;
    std::vector<int> out;
    out.reserve(labels.size());
    for (int l : labels) {
        auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()));
        out.push_back(it->second);
    }
    return out;
}

AffinityPropagationResult affinity_propagation(const Eigen::MatrixXd& points, const ClusteringConfig& config) {
    config.validate();
    const Eigen::Index n = points.rows();
    if (n < 2) throw DataError("affinity propagation needs at least 2 points, got " + std::to_string(n));

    // S(i, k) = -||x_i - x_k||^2
    const Eigen::VectorXd sq = points.rowwise().squaredNorm();
    Eigen::MatrixXd S = -((sq.replicate(1, n) + sq.transpose().replicate(n, 1)) - 2.0 * points * points.transpose());
    for (Eigen::Index i = 0; i < n; ++i) {
        S(i, i) = 0.0;
        for (Eigen::Index k = i + 1; k < n; ++k) {
            const double v = std::min(0.0, 0.5 * (S(i, k) + S(k, i)));
            S(i, k) = v;
            S(k, i) = v;
        }
    }

    AffinityPropagationResult result;
    std::vector<double> off;
    off.reserve(static_cast<std::size_t>(n * (n - 1)));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            if (i != k) off.push_back(S(i, k));
        }
    }
    std::sort(off.begin(), off.end());
    const std::size_t mid = off.size() / 2;
    const double median = off.size() % 2 ? off[mid] : 0.5 * (off[mid - 1] + off[mid]);
    const double pref = config.ap_preference.value_or(median);
    result.preference = pref;

    // All similarities equal: the messages carry no information.
    if (off.front() == off.back()) {
        if (pref > off.front()) {
            for (Eigen::Index i = 0; i < n; ++i) {
                result.labels.push_back(static_cast<int>(i));
                result.exemplars.push_back(static_cast<int>(i));
            }
        } else {
            result.labels.assign(static_cast<std::size_t>(n), 0);
            result.exemplars.push_back(0);
        }
        result.converged = true;
        return result;
    }
    S.diagonal().setConstant(pref);

    const double lambda = config.ap_damping;
    const int window = config.ap_convergence_iter;
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd scratch(n, n);
    std::vector<std::vector<char>> history(static_cast<std::size_t>(window), std::vector<char>(static_cast<std::size_t>(n), 0));
    std::vector<int> exemplar_runs(static_cast<std::size_t>(n), 0);

    int it = 0;
    for (; it < config.ap_max_iter; ++it) {
        // Responsibilities.
        scratch = A + S;
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index first_k = 0;
            double first = -std::numeric_limits<double>::infinity();
            double second = -std::numeric_limits<double>::infinity();
            for (Eigen::Index k = 0; k < n; ++k) {
                const double v = scratch(i, k);
                if (v > first) {
                    second = first;
                    first = v;
                    first_k = k;
                } else if (v > second) {
                    second = v;
                }
            }
            for (Eigen::Index k = 0; k < n; ++k) {
                const double fresh = S(i, k) - (k == first_k ? second : first);
                R(i, k) = lambda * R(i, k) + (1.0 - lambda) * fresh;
            }
        }

        // Availabilities.
        scratch = R.cwiseMax(0.0);
        for (Eigen::Index k = 0; k < n; ++k) scratch(k, k) = R(k, k);
        const Eigen::RowVectorXd col_sums = scratch.colwise().sum();
        for (Eigen::Index k = 0; k < n; ++k) {
            for (Eigen::Index i = 0; i < n; ++i) {
                double fresh = col_sums(k) - scratch(i, k);
                if (i != k) fresh = std::min(fresh, 0.0);
                A(i, k) = lambda * A(i, k) + (1.0 - lambda) * fresh;
            }
        }

        // Exemplar bookkeeping over a sliding window.
        auto& slot = history[static_cast<std::size_t>(it % window)];
        int k_count = 0;
        for (Eigen::Index k = 0; k < n; ++k) {
            const char is_ex = (A(k, k) + R(k, k)) > 0.0 ? 1 : 0;
            exemplar_runs[static_cast<std::size_t>(k)] += is_ex - slot[static_cast<std::size_t>(k)];
            slot[static_cast<std::size_t>(k)] = is_ex;
            k_count += is_ex;
        }
        if (it >= window) {
            Eigen::Index settled = 0;
            for (int runs : exemplar_runs) settled += (runs == window || runs == 0) ? 1 : 0;
            if (settled == n && k_count > 0) {
                result.converged = true;
                break;
            }
        }
    }
    result.iterations = std::min(it + 1, config.ap_max_iter);

    std::vector<Eigen::Index> ex;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (A(k, k) + R(k, k) > 0.0) ex.push_back(k);
    }
    if (ex.empty()) {
        result.labels.assign(static_cast<std::size_t>(n), 0);
        Eigen::Index best = 0;
        (A + R).diagonal().maxCoeff(&best);
        result.exemplars.push_back(static_cast<int>(best));
        return result;
    }

    auto assign = [&](const std::vector<Eigen::Index>& exemplars) {
        std::vector<int> c(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            for (std::size_t e = 1; e < exemplars.size(); ++e) {
                if (S(i, exemplars[e]) > S(i, exemplars[static_cast<std::size_t>(best)])) best = static_cast<int>(e);
            }
            c[static_cast<std::size_t>(i)] = best;
        }
        for (std::size_t e = 0; e < exemplars.size(); ++e) c[static_cast<std::size_t>(exemplars[e])] = static_cast<int>(e);
        return c;
    };

    // Refine each exemplar to the member with the largest total similarity
    // to its cluster, then reassign.
    auto c = assign(ex);
    for (std::size_t e = 0; e < ex.size(); ++e) {
        std::vector<Eigen::Index> members;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (c[static_cast<std::size_t>(i)] == static_cast<int>(e)) members.push_back(i);
        }
        double best_sum = -std::numeric_limits<double>::infinity();
        for (Eigen::Index cand : members) {
            double s = 0.0;
            for (Eigen::Index i : members) s += S(i, cand);
            if (s > best_sum) {
                best_sum = s;
                ex[e] = cand;
            }
        }
    }
    c = assign(ex);

    result.labels = canonical_labels(c);
    result.exemplars.assign(ex.size(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        result.exemplars[static_cast<std::size_t>(result.labels[static_cast<std::size_t>(i)])] =
            static_cast<int>(ex[static_cast<std::size_t>(c[static_cast<std::size_t>(i)])]);
    }
    return result;
}

std::size_t SenseClustering::period_total(Period p) const {
    std::size_t t = 0;
    for (int s = 0; s < m; ++s) t += count(s, p);
    return t;
}

SenseClustering build_sense_sets(const std::string& word, ClusteringAlgorithm algorithm, std::span<const int> labels,
                                 const PeriodSplit& split) {
    const std::size_t n_old = split.old_ids.size();
    const std::size_t n_new = split.new_ids.size();
    if (labels.size() != n_old + n_new) throw ValidationError("label count does not match the period split");
    SenseClustering out;
    out.word = word;
    out.algorithm = algorithm;
    out.m = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    out.senses.resize(static_cast<std::size_t>(out.m));
    const Eigen::Index d = n_old ? split.old_vectors.cols() : split.new_vectors.cols();
    std::vector<std::array<Eigen::VectorXd, 2>> sums(static_cast<std::size_t>(out.m),
                                                     {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int s = labels[i];
        if (s < 0) throw ValidationError("negative sense label");
        const bool is_old = i < n_old;
        const std::size_t row = is_old ? i : i - n_old;
        const auto& id = is_old ? split.old_ids[row] : split.new_ids[row];
        const auto& mat = is_old ? split.old_vectors : split.new_vectors;
        auto& cell = out.senses[static_cast<std::size_t>(s)][is_old ? 0 : 1];
        cell.members.push_back(id);
        sums[static_cast<std::size_t>(s)][is_old ? 0 : 1] += mat.row(static_cast<Eigen::Index>(row)).transpose();
        out.labels[id] = s;
    }
    for (int s = 0; s < out.m; ++s) {
        for (int t = 0; t < 2; ++t) {
            auto& cell = out.senses[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
            if (!cell.members.empty()) {
                cell.centroid = sums[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)] /
                                static_cast<double>(cell.members.size());
            }
        }
    }
    return out;
}

std::optional<std::string> partition_violation(const SenseClustering& clustering, const PeriodSplit& split) {
    for (int t = 0; t < 2; ++t) {
        const auto& ids = t == 0 ? split.old_ids : split.new_ids;
        const std::set<std::string> expected(ids.begin(), ids.end());
        std::set<std::string> seen;
        for (int s = 0; s < clustering.m; ++s) {
            const auto& cell = clustering.senses[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
            if (cell.centroid.has_value() == cell.members.empty()) {
                return "sense " + std::to_string(s) + " centroid presence disagrees with its member set";
            }
            for (const auto& id : cell.members) {
                if (!seen.insert(id).second) return "occurrence '" + id + "' appears in two senses";
                if (!expected.count(id)) return "occurrence '" + id + "' is in the wrong period";
            }
        }
        if (seen != expected) return std::string("senses do not cover every ") + (t == 0 ? "old" : "new") + " occurrence";
    }
    return std::nullopt;
}

std::size_t min_points_for(const ClusteringConfig& config) {
    return config.algorithm == ClusteringAlgorithm::ap ? 2 : static_cast<std::size_t>(config.k_min + 1);
}

PeriodSplit split_for(const SenseClustering& clustering, const EmbeddingStore& store) {
    PeriodSplit split;
    for (int t = 0; t < 2; ++t) {
        auto& ids = t == 0 ? split.old_ids : split.new_ids;
        for (int s = 0; s < clustering.m; ++s) {
            const auto& m = clustering.senses[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)].members;
            ids.insert(ids.end(), m.begin(), m.end());
        }
        std::sort(ids.begin(), ids.end());
        auto& mat = t == 0 ? split.old_vectors : split.new_vectors;
        mat.resize(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(store.dimension()));
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const auto v = store.at(ids[i]);
            for (std::size_t k = 0; k < v.size(); ++k) {
                mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v[k];
            }
        }
    }
    return split;
}

SenseClustering cluster_word(const std::string& word, const PeriodSplit& split, const ClusteringConfig& config) {
    config.validate();
    const Eigen::Index n_old = split.old_vectors.rows();
    const Eigen::Index n_new = split.new_vectors.rows();
    const Eigen::Index d = n_old ? split.old_vectors.cols() : split.new_vectors.cols();
    Eigen::MatrixXd joint(n_old + n_new, d);
    if (n_old) joint.topRows(n_old) = split.old_vectors;
    if (n_new) joint.bottomRows(n_new) = split.new_vectors;
    if (config.metric == DistanceMetric::cosine) {
        for (Eigen::Index i = 0; i < joint.rows(); ++i) {
            const double norm = joint.row(i).norm();
            if (norm > 0.0) joint.row(i) /= norm;
        }
    }
    if (static_cast<std::size_t>(joint.rows()) < min_points_for(config)) {
        throw DataError("word '" + word + "' has " + std::to_string(joint.rows()) + " embeddings; " +
                        cli_name(config.algorithm) + " needs at least " + std::to_string(min_points_for(config)));
    }

    std::vector<int> labels;
    bool converged = true;
    switch (config.algorithm) {
        case ClusteringAlgorithm::ap: {
            auto ap = affinity_propagation(joint, config);
            labels = std::move(ap.labels);
            converged = ap.converged;
            break;
        }
        case ClusteringAlgorithm::kmeans_silhouette:
            labels = auto_k_kmeans(joint, config, KCriterion::silhouette).labels;
            break;
        case ClusteringAlgorithm::kmeans_inertia:
            labels = auto_k_kmeans(joint, config, KCriterion::inertia).labels;
            break;
    }
    auto out = build_sense_sets(word, config.algorithm, labels, split);
    out.converged = converged;
    return out;
}

// ---- JSON ----

namespace {

nlohmann::ordered_json vec_json(const Eigen::VectorXd& v) {
    auto a = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Eigen::VectorXd json_vec(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::ordered_json to_json(const SenseClustering& c) {
    nlohmann::ordered_json j;
    j["word"] = c.word;
    j["algorithm"] = to_string(c.algorithm);
    j["m"] = c.m;
    j["converged"] = c.converged;
    nlohmann::ordered_json labels = nlohmann::ordered_json::object();
    for (const auto& [id, s] : c.labels) labels[id] = s;
    j["labels"] = std::move(labels);
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    nlohmann::ordered_json members = nlohmann::ordered_json::object();
    nlohmann::ordered_json centroids = nlohmann::ordered_json::object();
    for (int s = 0; s < c.m; ++s) {
        const auto key = std::to_string(s);
        counts[key] = {{"old", c.count(s, Period::old_period)}, {"new", c.count(s, Period::new_period)}};
        members[key] = {{"old", c.cell(s, Period::old_period).members}, {"new", c.cell(s, Period::new_period).members}};
        nlohmann::ordered_json cent = nlohmann::ordered_json::object();
        if (const auto& v = c.cell(s, Period::old_period).centroid) cent["old"] = vec_json(*v);
        if (const auto& v = c.cell(s, Period::new_period).centroid) cent["new"] = vec_json(*v);
        centroids[key] = std::move(cent);
    }
    j["counts"] = std::move(counts);
    j["members"] = std::move(members);
    j["centroids"] = std::move(centroids);
    return j;
}

SenseClustering sense_clustering_from_json(const nlohmann::json& j) {
    try {
        SenseClustering c;
        c.word = j.at("word").get<std::string>();
        c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
        c.m = j.at("m").get<int>();
        if (c.m < 0) throw DataError("negative sense count");
        c.converged = j.value("converged", true);
        for (const auto& [id, s] : j.at("labels").items()) c.labels[id] = s.get<int>();
        c.senses.resize(static_cast<std::size_t>(c.m));
        const auto& members = j.at("members");
        const auto& centroids = j.at("centroids");
        for (int s = 0; s < c.m; ++s) {
            const auto key = std::to_string(s);
            for (int t = 0; t < 2; ++t) {
                const char* pname = t == 0 ? "old" : "new";
                auto& cell = c.senses[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
                cell.members = members.at(key).at(pname).get<std::vector<std::string>>();
                const auto& cent = centroids.at(key);
                if (cent.contains(pname)) cell.centroid = json_vec(cent.at(pname));
                if (cell.centroid.has_value() == cell.members.empty()) {
                    throw DataError("word '" + c.word + "' sense " + key + " " + pname +
                                    ": centroid presence disagrees with members");
                }
            }
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed sense clustering: ") + e.what());
    } catch (const ValidationError& e) {
        throw DataError(std::string("malformed sense clustering: ") + e.what());
    }
}

void write_senses_file(const std::string& path, const std::vector<SenseClustering>& clusterings) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : clusterings) arr.push_back(to_json(c));
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << arr.dump(1) << '\n';
}

std::vector<SenseClustering> read_senses_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open senses file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("senses file " + path + ": " + e.what());
    }
    std::vector<SenseClustering> out;
    if (j.is_object()) {
        out.push_back(sense_clustering_from_json(j));
    } else if (j.is_array()) {
        for (const auto& item : j) out.push_back(sense_clustering_from_json(item));
    } else {
        throw DataError("senses file " + path + " must hold an object or an array");
    }
    return out;
}

}  // namespace ssd
