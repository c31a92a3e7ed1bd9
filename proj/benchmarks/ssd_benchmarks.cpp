#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "ssd/clustering.hpp"
#include "ssd/corpus.hpp"
#include "ssd/embeddings.hpp"
#include "ssd/projection.hpp"
#include "ssd/tokenizer.hpp"

namespace {

Eigen::MatrixXd blobs(Eigen::Index n, Eigen::Index d, int k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = g(rng) + (j == i % k ? 8.0 : 0.0);
    }
    return x;
}

ssd::Vocabulary vocab() {
    return ssd::Vocabulary({"[UNK]", "la", "casa", "es", "grande", "el", "rey", "gent", "##e", "##es", "de", "pueblo",
                            ".", ",", "y", "luz", "más"});
}

std::string text(std::size_t words) {
    static const std::vector<std::string> w = {"la", "casa", "gente", "gentes", "rey", ".", "pueblo", "luzes", "más"};
    std::mt19937_64 rng(3);
    std::string s;
    for (std::size_t i = 0; i < words; ++i) s += w[rng() % w.size()] + " ";
    return s;
}

void BM_Tokenize(benchmark::State& state) {
    const auto v = vocab();
    const auto s = text(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(ssd::count_tokens(s, v));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Tokenize)->Arg(1000)->Arg(10000);

void BM_Chunk(benchmark::State& state) {
    const auto v = vocab();
    std::vector<ssd::Document> docs(50);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        docs[i].id = "d" + std::to_string(i);
        docs[i].text = text(static_cast<std::size_t>(state.range(0)));
    }
    for (auto _ : state) benchmark::DoNotOptimize(ssd::chunk(docs, 256, ssd::Period::old_period, v));
}
BENCHMARK(BM_Chunk)->Arg(500)->Arg(2000);

void BM_KMeansAutoK(benchmark::State& state) {
    const auto x = blobs(state.range(0), 32, 3, 1);
    ssd::ClusteringConfig c;
    for (auto _ : state) benchmark::DoNotOptimize(ssd::auto_k_kmeans(x, c, ssd::KCriterion::silhouette));
}
BENCHMARK(BM_KMeansAutoK)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_AffinityPropagation(benchmark::State& state) {
    const auto x = blobs(state.range(0), 32, 3, 2);
    ssd::ClusteringConfig c;
    for (auto _ : state) benchmark::DoNotOptimize(ssd::affinity_propagation(x, c));
}
BENCHMARK(BM_AffinityPropagation)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_Tsne(benchmark::State& state) {
    const auto x = blobs(state.range(0), 32, 2, 3);
    ssd::TsneOptions o;
    o.iterations = 250;
    for (auto _ : state) benchmark::DoNotOptimize(ssd::tsne_2d(x, o));
}
BENCHMARK(BM_Tsne)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_SsdeRoundTrip(benchmark::State& state) {
    ssd::EmbeddingStore store(768);
    std::vector<float> v(768, 0.5f);
    for (int i = 0; i < state.range(0); ++i) store.add("occ-" + std::to_string(i), v);
    for (auto _ : state) {
        const auto bytes = ssd::serialize_store(store);
        benchmark::DoNotOptimize(ssd::parse_store(bytes));
    }
    state.SetBytesProcessed(state.iterations() * state.range(0) * 768 * 4);
}
BENCHMARK(BM_SsdeRoundTrip)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
