#include "autolabel/clustering.hpp"
#include "autolabel/random.hpp"

#include <benchmark/benchmark.h>

using namespace autolabel;

namespace {

Matrix random_embeddings(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            m(r, c) = rng.uniform(-1.0, 1.0);
        }
    }
    return m;
}

}  // namespace

static void BM_HierarchicalCluster(benchmark::State& state) {
    const auto X = random_embeddings(static_cast<int>(state.range(0)), 12, 7);
    for (auto _ : state) {
        auto result = hierarchical_cluster(X, 3, DistanceMeasure::chebyshev());
        benchmark::DoNotOptimize(result.assignments.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HierarchicalCluster)->RangeMultiplier(2)->Range(64, 512)->Complexity();

static void BM_ModifiedHubert(benchmark::State& state) {
    const auto X = random_embeddings(static_cast<int>(state.range(0)), 12, 8);
    const auto result = hierarchical_cluster(X, 3, DistanceMeasure::manhattan());
    for (auto _ : state) {
        benchmark::DoNotOptimize(modified_hubert(X, result));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ModifiedHubert)->RangeMultiplier(2)->Range(64, 512)->Complexity();

static void BM_BestClustering(benchmark::State& state) {
    const auto X = random_embeddings(static_cast<int>(state.range(0)), 12, 9);
    for (auto _ : state) {
        auto result = best_clustering(X, 3);
        benchmark::DoNotOptimize(result.hubert);
    }
}
BENCHMARK(BM_BestClustering)->Arg(128)->Arg(256);

static void BM_Distance(benchmark::State& state) {
    Rng rng(3);
    Vector a(12), b(12);
    for (int i = 0; i < 12; ++i) {
        a[i] = rng.uniform(-1.0, 1.0);
        b[i] = rng.uniform(-1.0, 1.0);
    }
    const auto measure = state.range(0) == 0   ? DistanceMeasure::chebyshev()
                         : state.range(0) == 1 ? DistanceMeasure::manhattan()
                                               : DistanceMeasure::mahalanobis(Matrix::Identity(12, 12));
    for (auto _ : state) {
        benchmark::DoNotOptimize(distance(measure, a, b));
    }
}
BENCHMARK(BM_Distance)->Arg(0)->Arg(1)->Arg(2);
