#include <trace/kd_tree.hpp>

#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>
#include <vector>

namespace {

struct Fixture {
    std::vector<trace::FeatureVector> points;
    std::vector<std::vector<double>> queries;
};

Fixture make(std::size_t count, std::size_t dim) {
    std::mt19937_64 rng(count * 31 + dim);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Fixture f;
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> v(dim);
        for (auto& x : v) x = u(rng);
        f.points.emplace_back(std::move(v));
    }
    for (int q = 0; q < 128; ++q) {
        std::vector<double> v(dim);
        for (auto& x : v) x = u(rng);
        f.queries.push_back(std::move(v));
    }
    return f;
}

void BM_KdTreeBuild(benchmark::State& state) {
    const auto f = make(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(trace::KdTree(f.points));
    }
}
BENCHMARK(BM_KdTreeBuild)->Args({1000, 17})->Args({10000, 17});

void BM_KdTreeQuery(benchmark::State& state) {
    const auto f = make(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    const trace::KdTree tree(f.points);
    std::size_t q = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(tree.nearest(f.queries[q], 3));
        q = (q + 1) % f.queries.size();
    }
}
BENCHMARK(BM_KdTreeQuery)->Args({1000, 2})->Args({10000, 2})->Args({1000, 17})->Args({10000, 17});

void BM_LinearScan(benchmark::State& state) {
    const auto f = make(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    std::vector<std::pair<double, std::size_t>> dist(f.points.size());
    std::size_t q = 0;
    for (auto _ : state) {
        const auto& query = f.queries[q];
        for (std::size_t i = 0; i < f.points.size(); ++i) {
            double sum = 0.0;
            for (std::size_t d = 0; d < query.size(); ++d) {
                const double diff = f.points[i][d] - query[d];
                sum += diff * diff;
            }
            dist[i] = {sum, i};
        }
        std::partial_sort(dist.begin(), dist.begin() + 3, dist.end());
        benchmark::DoNotOptimize(dist.data());
        q = (q + 1) % f.queries.size();
    }
}
BENCHMARK(BM_LinearScan)->Args({1000, 2})->Args({10000, 2})->Args({1000, 17})->Args({10000, 17});

} // namespace

BENCHMARK_MAIN();
