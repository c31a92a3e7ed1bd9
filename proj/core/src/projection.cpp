#include "ssd/projection.hpp"

#include "ssd/error.hpp"
#include "ssd/shift.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace ssd {

Eigen::MatrixXd pca_2d(const Eigen::MatrixXd& points) {
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();
    if (n < 3) throw ValidationError("PCA needs at least 3 points, got " + std::to_string(n));
    if (d < 2) throw ValidationError("PCA needs dimension >= 2, got " + std::to_string(d));

    const Eigen::RowVectorXd mean = points.colwise().mean();
    const Eigen::MatrixXd centered = points.rowwise() - mean;
    if (centered.cwiseAbs().maxCoeff() == 0.0) return Eigen::MatrixXd::Zero(n, 2);

    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw DataError("PCA eigendecomposition failed");
    Eigen::MatrixXd basis(d, 2);
    for (int c = 0; c < 2; ++c) {
        Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - c);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        basis.col(c) = v;
    }
    return centered * basis;
}

double effective_perplexity(double perplexity, std::size_t n) {
    return std::min(perplexity, (static_cast<double>(n) - 1.0) / 3.0);
}

namespace {

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
    const Eigen::VectorXd sq = x.rowwise().squaredNorm();
    Eigen::MatrixXd d = (sq.replicate(1, x.rows()) + sq.transpose().replicate(x.rows(), 1)) - 2.0 * x * x.transpose();
    d = d.cwiseMax(0.0);
    d.diagonal().setZero();
    return d;
}

// Row-conditional affinities calibrated so each row's entropy matches
// log(perplexity).
Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& d2, double perplexity) {
    const Eigen::Index n = d2.rows();
    const double target = std::log(perplexity);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd row(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double beta = 1.0;
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        double dmin = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) dmin = std::min(dmin, d2(i, j));
        }
        for (int step = 0; step < 50; ++step) {
            double sum = 0.0;
            double weighted = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                // Shifting by the nearest distance keeps exp from underflowing.
                row(j) = j == i ? 0.0 : std::exp(-beta * (d2(i, j) - dmin));
                sum += row(j);
                weighted += row(j) * (d2(i, j) - dmin);
            }
            const double entropy = std::log(sum) + beta * weighted / sum;
            row /= sum;
            const double diff = entropy - target;
            if (std::abs(diff) < 1e-5) break;
            if (diff > 0) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
            } else {
                hi = beta;
                beta = std::isinf(lo) ? beta / 2.0 : 0.5 * (beta + lo);
            }
        }
        p.row(i) = row.transpose();
    }
    return p;
}

double kl_divergence(const Eigen::MatrixXd& p, const Eigen::MatrixXd& num, double qsum) {
    double kl = 0.0;
    const Eigen::Index n = p.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j || p(i, j) <= 0.0) continue;
            const double q = std::max(num(i, j) / qsum, 1e-300);
            kl += p(i, j) * std::log(p(i, j) / q);
        }
    }
    return std::max(kl, 0.0);
}

}  // namespace

TsneResult tsne_2d(const Eigen::MatrixXd& points, const TsneOptions& options) {
    const Eigen::Index n = points.rows();
    if (!(options.perplexity > 0.0)) throw ValidationError("t-SNE perplexity must be positive");
    if (n < 5) throw ValidationError("t-SNE needs at least 5 points, got " + std::to_string(n));
    if (options.iterations < 1) throw ValidationError("t-SNE iterations must be >= 1");
    if (options.learning_rate && !(*options.learning_rate > 0.0)) {
        throw ValidationError("t-SNE learning rate must be positive");
    }
    const double learning_rate =
        options.learning_rate.value_or(std::max(static_cast<double>(n) / options.early_exaggeration / 4.0, 50.0));

    TsneResult result;
    result.effective_perplexity = effective_perplexity(options.perplexity, static_cast<std::size_t>(n));

    Eigen::MatrixXd p = conditional_affinities(squared_distances(points), result.effective_perplexity);
    p = ((p + p.transpose()) / (2.0 * static_cast<double>(n))).eval();
    p = p.cwiseMax(1e-12);
    p.diagonal().setZero();

    Eigen::MatrixXd y = points.cols() >= 2 ? pca_2d(points) : Eigen::MatrixXd::Zero(n, 2);
    double std0 = std::sqrt((y.col(0).array() - y.col(0).mean()).square().sum() / static_cast<double>(n));
    if (std0 > 0.0) {
        y *= 1e-4 / std0;
    } else {
        std::mt19937_64 rng(options.seed);
        std::normal_distribution<double> gauss(0.0, 1e-4);
        for (Eigen::Index i = 0; i < n; ++i) {
            y(i, 0) = gauss(rng);
            y(i, 1) = gauss(rng);
        }
    }

    Eigen::MatrixXd update = Eigen::MatrixXd::Zero(n, 2);
    Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
    Eigen::MatrixXd grad(n, 2);
    Eigen::MatrixXd num(n, n);
    result.kl_trace.reserve(static_cast<std::size_t>(options.iterations));

    for (int it = 0; it < options.iterations; ++it) {
        const double exaggeration = it < options.exaggeration_iterations ? options.early_exaggeration : 1.0;
        const double momentum = it < options.momentum_switch ? 0.5 : 0.8;

        num = (1.0 + squared_distances(y).array()).inverse().matrix();
        num.diagonal().setZero();
        const double qsum = std::max(num.sum(), 1e-300);

        grad.setZero();
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i == j) continue;
                const double w = (exaggeration * p(i, j) - num(i, j) / qsum) * num(i, j);
                grad.row(i) += w * (y.row(i) - y.row(j));
            }
        }
        grad *= 4.0;
        result.kl_trace.push_back(kl_divergence(p, num, qsum));

        for (Eigen::Index i = 0; i < n; ++i) {
            for (int c = 0; c < 2; ++c) {
                const bool same_sign = (grad(i, c) > 0) == (update(i, c) > 0);
                gains(i, c) = same_sign ? std::max(gains(i, c) * 0.8, 0.01) : gains(i, c) + 0.2;
            }
        }
        update = momentum * update - learning_rate * gains.cwiseProduct(grad);
        y += update;
        y.rowwise() -= y.colwise().mean();
    }
    result.embedding = std::move(y);
    return result;
}

std::string to_string(ProjectionMethod m) { return m == ProjectionMethod::pca ? "pca" : "tsne"; }

ProjectionMethod parse_projection(const std::string& s) {
    if (s == "pca") return ProjectionMethod::pca;
    if (s == "tsne" || s == "t-sne") return ProjectionMethod::tsne;
    throw ValidationError("unknown projection method '" + s + "' (expected pca or tsne)");
}

std::vector<DwugPoint> DwugExport::view(Period p) const {
    std::vector<DwugPoint> out;
    for (const auto& pt : points) {
        if (pt.period == p) out.push_back(pt);
    }
    return out;
}

const std::vector<std::string>& sense_palette() {
    static const std::vector<std::string> palette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                     "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return palette;
}

DwugExport export_dwug(const SenseClustering& clustering, const PeriodSplit& split, ProjectionMethod method,
                       const TsneOptions& options) {
    const Eigen::Index n_old = split.old_vectors.rows();
    const Eigen::Index n_new = split.new_vectors.rows();
    const Eigen::Index d = n_old ? split.old_vectors.cols() : split.new_vectors.cols();
    Eigen::MatrixXd joint(n_old + n_new, d);
    if (n_old) joint.topRows(n_old) = split.old_vectors;
    if (n_new) joint.bottomRows(n_new) = split.new_vectors;

    DwugExport out;
    out.word = clustering.word;
    out.method = method;
    out.seed = options.seed;

    Eigen::MatrixXd coords;
    if (method == ProjectionMethod::pca) {
        coords = pca_2d(joint);
    } else {
        auto ts = tsne_2d(joint, options);
        coords = std::move(ts.embedding);
        out.perplexity = options.perplexity;
        out.effective_perplexity = ts.effective_perplexity;
    }

    auto push = [&](const std::string& id, Period period, Eigen::Index row) {
        const auto it = clustering.labels.find(id);
        if (it == clustering.labels.end()) throw DataError("occurrence '" + id + "' has no sense label");
        out.points.push_back({id, period, it->second, coords(row, 0), coords(row, 1)});
    };
    for (std::size_t i = 0; i < split.old_ids.size(); ++i) {
        push(split.old_ids[i], Period::old_period, static_cast<Eigen::Index>(i));
    }
    for (std::size_t i = 0; i < split.new_ids.size(); ++i) {
        push(split.new_ids[i], Period::new_period, n_old + static_cast<Eigen::Index>(i));
    }
    if (out.points.size() != clustering.labels.size()) {
        throw DataError("clustering for '" + clustering.word + "' labels occurrences missing from the embeddings");
    }
    const auto& palette = sense_palette();
    for (int s = 0; s < clustering.m; ++s) out.colors.push_back(palette[static_cast<std::size_t>(s) % palette.size()]);
    return out;
}

nlohmann::ordered_json to_json(const DwugExport& dwug) {
    nlohmann::ordered_json j;
    j["word"] = dwug.word;
    j["method"] = to_string(dwug.method);
    nlohmann::ordered_json params;
    if (dwug.method == ProjectionMethod::tsne) {
        params["perplexity"] = dwug.perplexity;
        params["effective_perplexity"] = dwug.effective_perplexity;
    } else {
        params["components"] = 2;
    }
    j["params"] = std::move(params);
    j["seed"] = dwug.seed;
    nlohmann::ordered_json colors = nlohmann::ordered_json::object();
    for (std::size_t s = 0; s < dwug.colors.size(); ++s) colors[std::to_string(s)] = dwug.colors[s];
    j["colors"] = std::move(colors);
    auto pts = nlohmann::ordered_json::array();
    for (const auto& p : dwug.points) {
        pts.push_back({{"occurrence_id", p.occurrence_id},
                       {"period", to_string(p.period)},
                       {"sense", p.sense},
                       {"x", p.x},
                       {"y", p.y}});
    }
    j["points"] = std::move(pts);
    return j;
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string file_stem(const std::string& word) {
    std::string out;
    for (char c : word) {
        const auto u = static_cast<unsigned char>(c);
        out += (u < 0x20 || c == '/' || c == '\\' || c == ':' || c == '*' || c == '?' || c == '"' || c == '<' ||
                c == '>' || c == '|')
                   ? '_'
                   : c;
    }
    return out.empty() ? "_" : out;
}

}  // namespace

std::string render_svg(const DwugExport& dwug, DwugView view) {
    constexpr double size = 480.0;
    constexpr double margin = 24.0;
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    if (!dwug.points.empty()) {
        xmin = xmax = dwug.points.front().x;
        ymin = ymax = dwug.points.front().y;
    }
    // Bounds come from all points so the period views share one frame.
    for (const auto& p : dwug.points) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
    const double scale = (size - 2 * margin) / span;

    const char* title = view == DwugView::old_period ? "old" : view == DwugView::new_period ? "new" : "combined";
    std::ostringstream svg;
    svg << std::setprecision(6);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size + 20
        << "\" viewBox=\"0 0 " << size << ' ' << size + 20 << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << margin << "\" y=\"16\" font-family=\"sans-serif\" font-size=\"13\">"
        << xml_escape(dwug.word) << " (" << title << ")</text>\n";
    std::vector<bool> shown(dwug.colors.size(), false);
    for (const auto& p : dwug.points) {
        if (view == DwugView::old_period && p.period != Period::old_period) continue;
        if (view == DwugView::new_period && p.period != Period::new_period) continue;
        const double cx = margin + (p.x - xmin) * scale;
        const double cy = 20 + margin + (ymax - p.y) * scale;
        const auto& color = dwug.colors.at(static_cast<std::size_t>(p.sense));
        shown[static_cast<std::size_t>(p.sense)] = true;
        svg << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"3.5\" fill=\"" << color
            << "\" fill-opacity=\"0.8\"><title>" << xml_escape(p.occurrence_id) << "</title></circle>\n";
    }
    double ly = 36;
    for (std::size_t s = 0; s < shown.size(); ++s) {
        if (!shown[s]) continue;
        svg << "<rect x=\"" << size - 90 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\""
            << dwug.colors[s] << "\"/><text x=\"" << size - 75 << "\" y=\"" << ly
            << "\" font-family=\"sans-serif\" font-size=\"11\">sense " << s << "</text>\n";
        ly += 16;
    }
    svg << "</svg>\n";
    return svg.str();
}

std::vector<std::filesystem::path> write_dwug(const DwugExport& dwug, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
    const std::string stem = file_stem(dwug.word);
    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::filesystem::path& path, const std::string& content) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot open " + path.string() + " for writing");
        out << content;
        written.push_back(path);
    };
    emit(dir / (stem + ".json"), to_json(dwug).dump(1) + "\n");
    emit(dir / (stem + "_old.svg"), render_svg(dwug, DwugView::old_period));
    emit(dir / (stem + "_new.svg"), render_svg(dwug, DwugView::new_period));
    emit(dir / (stem + "_combined.svg"), render_svg(dwug, DwugView::combined));
    return written;
}

std::pair<int, Eigen::VectorXd> dominant_sense_centroid(const SenseClustering& clustering, Period period) {
    int best = -1;
    std::size_t best_count = 0;
    for (int s = 0; s < clustering.m; ++s) {
        const auto c = clustering.count(s, period);
        if (c > best_count) {
            best_count = c;
            best = s;
        }
    }
    if (best < 0) {
        throw DataError("word '" + clustering.word + "' has no occurrences in the " + to_string(period) + " period");
    }
    return {best, *clustering.cell(best, period).centroid};
}

NeighborReport diachronic_neighbors(const SenseClustering& target, const std::vector<SenseClustering>& candidates,
                                    Period period, std::size_t top) {
    NeighborReport report;
    report.word = target.word;
    report.period = period;
    const auto [sense, centroid] = dominant_sense_centroid(target, period);
    report.dominant_sense = sense;
    std::vector<std::pair<std::string, double>> ranked;
    for (const auto& c : candidates) {
        if (c.word == target.word) continue;
        if (c.period_total(period) == 0) {
            report.skipped.push_back(c.word);
            continue;
        }
        ranked.emplace_back(c.word, cosine_similarity(centroid, dominant_sense_centroid(c, period).second));
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    report.short_list = ranked.size() < top;
    if (ranked.size() > top) ranked.resize(top);
    report.neighbors = std::move(ranked);
    return report;
}

nlohmann::ordered_json to_json(const NeighborReport& report) {
    nlohmann::ordered_json j;
    j["word"] = report.word;
    j["period"] = to_string(report.period);
    j["dominant_sense"] = report.dominant_sense;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [w, s] : report.neighbors) arr.push_back({{"word", w}, {"cosine_similarity", s}});
    j["neighbors"] = std::move(arr);
    j["short"] = report.short_list;
    j["skipped"] = report.skipped;
    return j;
}

}  // namespace ssd
