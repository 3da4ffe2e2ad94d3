#include <trace/geometry.hpp>
#include <trace/scoring.hpp>

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace {

std::vector<trace::FeatureVector> random_points(std::size_t count, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<trace::FeatureVector> out;
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> v(dim);
        for (auto& x : v) x = u(rng);
        out.emplace_back(std::move(v));
    }
    return out;
}

void BM_ClosestPoint(benchmark::State& state) {
    const auto pts = random_points(3 * 256, static_cast<std::size_t>(state.range(0)), 1);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(trace::closest_point(pts[i], pts[i + 1], pts[i + 2]));
        i = (i + 3) % (pts.size() - 2);
    }
}
BENCHMARK(BM_ClosestPoint)->Arg(2)->Arg(17)->Arg(128);

void BM_StepScore(benchmark::State& state) {
    const auto pts = random_points(3 * 256, static_cast<std::size_t>(state.range(0)), 2);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(trace::step_score(pts[i], pts[i + 1], pts[i + 2], 0.9));
        i = (i + 3) % (pts.size() - 2);
    }
}
BENCHMARK(BM_StepScore)->Arg(2)->Arg(17)->Arg(128);

// One masked step against six targets, as in the corpus mode with k = 3.
void BM_ScoreStep(benchmark::State& state) {
    const auto pts = random_points(8, 17, 3);
    std::vector<trace::TargetSpec> targets;
    for (std::size_t k = 2; k < 8; ++k) {
        targets.push_back({pts[k], k < 5 ? "good" : "bad",
                           k < 5 ? trace::Polarity::Desirable : trace::Polarity::Undesirable});
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(trace::score_step(pts[0], pts[1], targets, 0.9));
    }
}
BENCHMARK(BM_ScoreStep);

} // namespace

BENCHMARK_MAIN();
