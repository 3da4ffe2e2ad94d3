#pragma once

#include "trace/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace trace {

/// Exact k-nearest-neighbour index over a fixed point set.
///
/// Distances are squared (optionally diagonally weighted) Euclidean. Results
/// are ordered by (distance, insertion index), so equal distances resolve to
/// the point inserted first. The tree is immutable once built and can be
/// queried from any number of threads.
class KdTree {
public:
    struct Neighbor {
        std::size_t index;   // position in the input point list
        double distance_sq;
    };

    KdTree() = default;
    explicit KdTree(std::span<const FeatureVector> points);

    std::size_t size() const noexcept { return count_; }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }

    /// Up to `k` nearest points to `query`. `weights` is empty or has one
    /// positive entry per dimension.
    std::vector<Neighbor> nearest(std::span<const double> query, std::size_t k,
                                  std::span<const double> weights = {}) const;

private:
    struct Node {
        std::uint32_t index;
        std::uint32_t axis;
        std::int32_t left = -1;
        std::int32_t right = -1;
    };

    std::int32_t build(std::span<std::uint32_t> order);
    double distance_sq(std::size_t i, std::span<const double> query, std::span<const double> weights) const;

    std::size_t dim_ = 0;
    std::size_t count_ = 0;
    std::vector<double> coords_; // row-major, count_ x dim_
    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
};

} // namespace trace
