#include "oracles.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace oracle {

Rows to_rows(const Eigen::MatrixXd& m) {
    Rows out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    }
    return out;
}

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

double silhouette(const Rows& points, const std::vector<int>& labels) {
    const std::size_t n = points.size();
    std::map<int, std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < n; ++i) clusters[labels[i]].push_back(i);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& own = clusters[labels[i]];
        if (own.size() < 2) continue;
        double a = 0.0;
        for (auto j : own) {
            if (j != i) a += euclidean(points[i], points[j]);
        }
        a /= static_cast<double>(own.size() - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [label, members] : clusters) {
            if (label == labels[i]) continue;
            double d = 0.0;
            for (auto j : members) d += euclidean(points[i], points[j]);
            b = std::min(b, d / static_cast<double>(members.size()));
        }
        total += (b - a) / std::max(a, b);
    }
    return total / static_cast<double>(n);
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<std::pair<int, int>, double> table;
    std::map<int, double> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[{a[i], b[i]}] += 1;
        rows[a[i]] += 1;
        cols[b[i]] += 1;
    }
    auto c2 = [](double x) { return x * (x - 1) / 2; };
    double index = 0, sa = 0, sb = 0;
    for (const auto& [k, v] : table) index += c2(v);
    for (const auto& [k, v] : rows) sa += c2(v);
    for (const auto& [k, v] : cols) sb += c2(v);
    const double expected = sa * sb / c2(static_cast<double>(a.size()));
    const double max_index = 0.5 * (sa + sb);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

std::pair<std::vector<double>, Rows> jacobi_eigen(Rows a) {
    const std::size_t n = a.size();
    Rows v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        }
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a[x][x] > a[y][y]; });
    std::vector<double> values;
    Rows vectors(n, std::vector<double>(n));
    for (std::size_t c = 0; c < n; ++c) {
        values.push_back(a[order[c]][order[c]]);
        for (std::size_t k = 0; k < n; ++k) vectors[k][c] = v[k][order[c]];
    }
    return {values, vectors};
}

std::vector<int> affinity_propagation(const Rows& x, double damping, int max_iter, int convergence_iter) {
    const std::size_t n = x.size();
    Rows s(n, std::vector<double>(n));
    std::vector<double> off;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const double d = euclidean(x[i], x[k]);
            s[i][k] = -d * d;
            if (i != k) off.push_back(s[i][k]);
        }
    }
    std::sort(off.begin(), off.end());
    const double median = off.size() % 2 ? off[off.size() / 2] : 0.5 * (off[off.size() / 2 - 1] + off[off.size() / 2]);
    for (std::size_t i = 0; i < n; ++i) s[i][i] = median;

    Rows r(n, std::vector<double>(n, 0.0)), a(n, std::vector<double>(n, 0.0));
    std::vector<std::vector<bool>> history;
    for (int it = 0; it < max_iter; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                double best = -std::numeric_limits<double>::infinity();
                for (std::size_t kk = 0; kk < n; ++kk) {
                    if (kk != k) best = std::max(best, a[i][kk] + s[i][kk]);
                }
                r[i][k] = damping * r[i][k] + (1 - damping) * (s[i][k] - best);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                double sum = 0.0;
                for (std::size_t ii = 0; ii < n; ++ii) {
                    if (ii != i && ii != k) sum += std::max(0.0, r[ii][k]);
                }
                const double fresh = i == k ? sum : std::min(0.0, r[k][k] + sum);
                a[i][k] = damping * a[i][k] + (1 - damping) * fresh;
            }
        }
        std::vector<bool> ex(n);
        bool any = false;
        for (std::size_t k = 0; k < n; ++k) {
            ex[k] = a[k][k] + r[k][k] > 0;
            any = any || ex[k];
        }
        history.push_back(ex);
        if (static_cast<int>(history.size()) > convergence_iter && any) {
            bool same = true;
            for (int back = 0; back < convergence_iter && same; ++back) {
                same = history[history.size() - 1 - static_cast<std::size_t>(back)] == ex;
            }
            if (same) break;
        }
    }
    std::vector<std::size_t> exemplars;
    for (std::size_t k = 0; k < n; ++k) {
        if (a[k][k] + r[k][k] > 0) exemplars.push_back(k);
    }
    if (exemplars.empty()) return std::vector<int>(n, 0);
    auto assign = [&](const std::vector<std::size_t>& ex) {
        std::vector<int> c(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            for (std::size_t e = 1; e < ex.size(); ++e) {
                if (s[i][ex[e]] > s[i][ex[best]]) best = e;
            }
            c[i] = static_cast<int>(best);
        }
        for (std::size_t e = 0; e < ex.size(); ++e) c[ex[e]] = static_cast<int>(e);
        return c;
    };
    auto c = assign(exemplars);
    for (std::size_t e = 0; e < exemplars.size(); ++e) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t cand = 0; cand < n; ++cand) {
            if (c[cand] != static_cast<int>(e)) continue;
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (c[i] == static_cast<int>(e)) sum += s[i][cand];
            }
            if (sum > best) {
                best = sum;
                exemplars[e] = cand;
            }
        }
    }
    return assign(exemplars);
}

Blobs make_blobs(std::size_t per_blob, std::size_t blobs, std::size_t dim, double separation, double sigma,
                 std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    Blobs out;
    out.points.resize(static_cast<Eigen::Index>(per_blob * blobs), static_cast<Eigen::Index>(dim));
    // Blob b sits at separation / sqrt(2) along axis b, so centers are
    // pairwise `separation` apart; blob 0 sits at the origin when alone.
    for (std::size_t b = 0; b < blobs; ++b) {
        for (std::size_t i = 0; i < per_blob; ++i) {
            const auto row = static_cast<Eigen::Index>(b * per_blob + i);
            for (std::size_t j = 0; j < dim; ++j) {
                const double center = (blobs > 1 && j == b % dim) ? separation / std::sqrt(2.0) : 0.0;
                out.points(row, static_cast<Eigen::Index>(j)) = center + gauss(rng);
            }
            out.labels.push_back(static_cast<int>(b));
        }
    }
    return out;
}

PlantedBenchmark make_planted_benchmark(std::uint64_t seed, std::size_t per_sense, std::size_t n_pairs,
                                        std::size_t dim) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 0.3);
    auto usage = [&](int sense) {
        std::vector<float> v(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            v[j] = static_cast<float>((j == static_cast<std::size_t>(sense) ? 5.0 : 0.0) + gauss(rng));
        }
        return v;
    };
    PlantedBenchmark out;
    out.word = "planted";
    const auto n_old = static_cast<Eigen::Index>(per_sense);
    Eigen::MatrixXd old_points(2 * n_old, static_cast<Eigen::Index>(dim));
    Eigen::MatrixXd new_points(2 * n_old, static_cast<Eigen::Index>(dim));
    std::vector<int> old_senses, new_senses;
    for (Eigen::Index i = 0; i < 2 * n_old; ++i) {
        const int s = static_cast<int>(i % 2);
        const auto a = usage(s);
        const auto b = usage(s);
        for (std::size_t j = 0; j < dim; ++j) {
            old_points(i, static_cast<Eigen::Index>(j)) = a[j];
            new_points(i, static_cast<Eigen::Index>(j)) = b[j];
        }
        old_senses.push_back(s);
        new_senses.push_back(s);
    }
    out.corpus = make_split(old_points, new_points);
    out.corpus_senses = old_senses;
    out.corpus_senses.insert(out.corpus_senses.end(), new_senses.begin(), new_senses.end());
    out.pair_store = ssd::EmbeddingStore(dim, "planted");
    for (std::size_t k = 0; k < n_pairs; ++k) {
        ssd::AnnotatedPair p;
        p.id = "p" + std::to_string(k);
        p.word = out.word;
        p.sentence_a = "el planted viejo";
        p.span_a = {3, 10};
        p.sentence_b = "un planted nuevo";
        p.span_b = {3, 10};
        const bool change = k % 2 == 1;
        p.rating = change ? 3 + static_cast<int>(rng() % 2) : 1 + static_cast<int>(rng() % 2);
        const int sa = static_cast<int>(rng() % 2);
        const int sb = change ? 1 - sa : sa;
        out.pair_store.add(p.id + "/a", usage(sa));
        out.pair_store.add(p.id + "/b", usage(sb));
        out.pairs.push_back(p);
    }
    return out;
}

ssd::PeriodSplit make_split(const Eigen::MatrixXd& old_points, const Eigen::MatrixXd& new_points) {
    ssd::PeriodSplit split;
    char buf[32];
    for (Eigen::Index i = 0; i < old_points.rows(); ++i) {
        std::snprintf(buf, sizeof buf, "o%05ld", static_cast<long>(i));
        split.old_ids.emplace_back(buf);
    }
    for (Eigen::Index i = 0; i < new_points.rows(); ++i) {
        std::snprintf(buf, sizeof buf, "n%05ld", static_cast<long>(i));
        split.new_ids.emplace_back(buf);
    }
    split.old_vectors = old_points;
    split.new_vectors = new_points;
    return split;
}

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ssd-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

// Covariance eigendecomposition by Jacobi rotations, then projection onto the
// top two eigenvectors.
Eigen::MatrixXd pca_2d(const Eigen::MatrixXd& x) {
    const auto rows = to_rows(x);
    const std::size_t n = rows.size(), d = rows[0].size();
    std::vector<double> mean(d, 0.0);
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < d; ++j) mean[j] += r[j] / static_cast<double>(n);
    }
    Rows cov(d, std::vector<double>(d, 0.0));
    for (const auto& r : rows) {
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < d; ++b) cov[a][b] += (r[a] - mean[a]) * (r[b] - mean[b]) / static_cast<double>(n - 1);
        }
    }
    const auto [values, vectors] = jacobi_eigen(cov);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < 2; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += (rows[i][j] - mean[j]) * vectors[j][c];
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = s;
        }
    }
    return out;
}

}  // namespace oracle
