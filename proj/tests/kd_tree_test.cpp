#include <trace/kd_tree.hpp>

#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <thread>

namespace trace {
namespace {

using testing::Gen;

std::vector<FeatureVector> to_points(const std::vector<std::vector<double>>& raw) {
    std::vector<FeatureVector> out;
    for (const auto& r : raw) out.emplace_back(r);
    return out;
}

void expect_same(const std::vector<KdTree::Neighbor>& got, const std::vector<oracle::Neighbour>& want) {
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].index, want[i].index) << "rank " << i;
        EXPECT_EQ(got[i].distance_sq, want[i].distance_sq) << "rank " << i;
    }
}

TEST(KdTree, EmptyTreeReturnsNothing) {
    const KdTree tree;
    EXPECT_EQ(tree.size(), 0u);
    const std::vector<double> q{1.0};
    EXPECT_TRUE(tree.nearest(q, 3).empty());
}

TEST(KdTree, SelfQueryReturnsItself) {
    Gen gen(61);
    std::vector<std::vector<double>> raw;
    for (int i = 0; i < 50; ++i) raw.push_back(gen.values(3));
    const KdTree tree(to_points(raw));
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto hit = tree.nearest(raw[i], 1);
        ASSERT_EQ(hit.size(), 1u);
        EXPECT_EQ(hit[0].index, i);
        EXPECT_EQ(hit[0].distance_sq, 0.0);
    }
}

TEST(KdTree, KLargerThanSizeClamps) {
    const KdTree tree(to_points({{0.0}, {1.0}}));
    const std::vector<double> q{0.2};
    EXPECT_EQ(tree.nearest(q, 10).size(), 2u);
}

TEST(KdTree, TiesResolveToInsertionOrder) {
    // Duplicates and points equidistant from the query.
    const KdTree tree(to_points({{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 0}, {0, 1}}));
    const std::vector<double> q{0, 0};
    const auto hits = tree.nearest(q, 6);
    for (std::size_t i = 0; i < hits.size(); ++i) EXPECT_EQ(hits[i].index, i);
}

TEST(KdTreeProperty, MatchesLinearScan) {
    Gen gen(62);
    for (std::size_t dim : {2u, 10u, 17u}) {
        std::vector<std::vector<double>> raw;
        const std::size_t n = 100 + gen.index(400);
        for (std::size_t i = 0; i < n; ++i) raw.push_back(gen.values(dim));
        const KdTree tree(to_points(raw));
        for (int q = 0; q < 100; ++q) {
            const auto query = gen.values(dim, -1.5, 1.5);
            const std::size_t k = 1 + gen.index(8);
            expect_same(tree.nearest(query, k), oracle::scan_knn(raw, query, k));
        }
    }
}

TEST(KdTreeProperty, TreeSearchMatchesLinearScanInHigherDimensions) {
    // Enough points per dimension that the tree, not the scan, answers.
    Gen gen(64);
    for (auto [dim, n] : {std::pair<std::size_t, std::size_t>{8, 600}, {12, 4500}}) {
        std::vector<std::vector<double>> raw;
        for (std::size_t i = 0; i < n; ++i) raw.push_back(gen.values(dim));
        const KdTree tree(to_points(raw));
        std::vector<double> w(dim);
        for (auto& v : w) v = gen.uniform(0.5, 2.0);
        for (int q = 0; q < 50; ++q) {
            const auto query = gen.values(dim, -1.2, 1.2);
            const std::size_t k = 1 + gen.index(8);
            expect_same(tree.nearest(query, k), oracle::scan_knn(raw, query, k));
            expect_same(tree.nearest(query, k, w), oracle::scan_knn(raw, query, k, w));
        }
    }
}

TEST(KdTreeProperty, MatchesLinearScanWithWeightsAndDuplicates) {
    Gen gen(63);
    const std::size_t dim = 4;
    std::vector<std::vector<double>> raw;
    for (int i = 0; i < 300; ++i) {
        // coarse grid: many exact ties
        std::vector<double> p(dim);
        for (auto& v : p) v = static_cast<double>(gen.index(4));
        raw.push_back(p);
    }
    const KdTree tree(to_points(raw));
    std::vector<double> w(dim);
    for (auto& v : w) v = gen.uniform(0.5, 2.0);
    for (int q = 0; q < 200; ++q) {
        std::vector<double> query(dim);
        for (auto& v : query) v = static_cast<double>(gen.index(4)) + (gen.chance(0.5) ? 0.0 : 0.5);
        const std::size_t k = 1 + gen.index(20);
        expect_same(tree.nearest(query, k), oracle::scan_knn(raw, query, k));
        expect_same(tree.nearest(query, k, w), oracle::scan_knn(raw, query, k, w));
    }
}

TEST(KdTreeProperty, ConcurrentQueriesAgree) {
    Gen gen(64);
    std::vector<std::vector<double>> raw;
    for (int i = 0; i < 1000; ++i) raw.push_back(gen.values(5));
    const KdTree tree(to_points(raw));
    std::vector<std::vector<double>> queries;
    for (int i = 0; i < 200; ++i) queries.push_back(gen.values(5));
    std::vector<std::vector<KdTree::Neighbor>> serial;
    for (const auto& q : queries) serial.push_back(tree.nearest(q, 3));

    std::vector<std::thread> workers;
    std::vector<int> mismatches(4, 0);
    for (int w = 0; w < 4; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t i = 0; i < queries.size(); ++i) {
                const auto got = tree.nearest(queries[i], 3);
                for (std::size_t r = 0; r < got.size(); ++r) {
                    if (got[r].index != serial[i][r].index) ++mismatches[w];
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    for (int m : mismatches) EXPECT_EQ(m, 0);
}

} // namespace
} // namespace trace
