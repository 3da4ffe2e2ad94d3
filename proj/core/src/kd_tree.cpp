#include "trace/kd_tree.hpp"

#include "trace/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

namespace trace {

namespace {

struct Candidate {
    double distance_sq;
    std::size_t index;

    bool operator<(const Candidate& other) const noexcept {
        return distance_sq < other.distance_sq ||
               (distance_sq == other.distance_sq && index < other.index);
    }
};

// Max-heap on (distance, index): top() is the current worst kept candidate.
using CandidateHeap = std::priority_queue<Candidate>;

std::vector<KdTree::Neighbor> drain(CandidateHeap& heap) {
    std::vector<KdTree::Neighbor> out(heap.size());
    for (auto i = out.size(); i-- > 0;) {
        out[i] = {heap.top().index, heap.top().distance_sq};
        heap.pop();
    }
    return out;
}

} // namespace

KdTree::KdTree(std::span<const FeatureVector> points) {
    if (points.empty()) {
        return;
    }
    if (points.size() > std::numeric_limits<std::int32_t>::max()) {
        throw CorpusError("kd-tree: too many points");
    }
    dim_ = points.front().dim();
    count_ = points.size();
    coords_.reserve(count_ * dim_);
    for (const auto& p : points) {
        if (p.dim() != dim_) {
            throw DimensionError("kd-tree: inconsistent point dimensions");
        }
        coords_.insert(coords_.end(), p.values().begin(), p.values().end());
    }
    std::vector<std::uint32_t> order(count_);
    std::iota(order.begin(), order.end(), 0u);
    nodes_.reserve(count_);
    root_ = build(order);
}

std::int32_t KdTree::build(std::span<std::uint32_t> order) {
    if (order.empty()) {
        return -1;
    }
    // Split on the axis of widest spread.
    std::uint32_t axis = 0;
    double best_spread = -1.0;
    for (std::size_t d = 0; d < dim_; ++d) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (auto i : order) {
            const double v = coords_[i * dim_ + d];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            axis = static_cast<std::uint32_t>(d);
        }
    }

    const auto mid = order.size() / 2;
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(mid), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double va = coords_[a * dim_ + axis];
                         const double vb = coords_[b * dim_ + axis];
                         return va < vb || (va == vb && a < b);
                     });

    const auto self = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({order[mid], axis});
    const auto left = build(order.first(mid));
    const auto right = build(order.subspan(mid + 1));
    nodes_[static_cast<std::size_t>(self)].left = left;
    nodes_[static_cast<std::size_t>(self)].right = right;
    return self;
}

double KdTree::distance_sq(std::size_t i, std::span<const double> query,
                           std::span<const double> weights) const {
    const double* p = coords_.data() + i * dim_;
    double sum = 0.0;
    if (weights.empty()) {
        for (std::size_t d = 0; d < dim_; ++d) {
            const double diff = p[d] - query[d];
            sum += diff * diff;
        }
    } else {
        for (std::size_t d = 0; d < dim_; ++d) {
            const double diff = p[d] - query[d];
            sum += weights[d] * diff * diff;
        }
    }
    return sum;
}

std::vector<KdTree::Neighbor> KdTree::nearest(std::span<const double> query, std::size_t k,
                                              std::span<const double> weights) const {
    if (query.size() != dim_ && count_ > 0) {
        throw DimensionError("kd-tree query has dimension " + std::to_string(query.size()) +
                             ", index has " + std::to_string(dim_));
    }
    if (!weights.empty() && weights.size() != dim_) {
        throw DimensionError("kd-tree weights do not match index dimension");
    }
    k = std::min(k, count_);
    if (k == 0) {
        return {};
    }

    CandidateHeap heap;
    auto offer = [&](const Candidate& c) {
        if (heap.size() < k) {
            heap.push(c);
        } else if (c < heap.top()) {
            heap.pop();
            heap.push(c);
        }
    };

    // With fewer than 2^dim points the tree prunes almost nothing; scan instead.
    if (dim_ >= 63 || count_ < (std::size_t{1} << dim_)) {
        for (std::size_t i = 0; i < count_; ++i) {
            offer({distance_sq(i, query, weights), i});
        }
        return drain(heap);
    }

    // Explicit stack of (node, lower bound on squared distance to its cell).
    std::vector<std::pair<std::int32_t, double>> stack;
    stack.emplace_back(root_, 0.0);
    while (!stack.empty()) {
        const auto [node_id, bound] = stack.back();
        stack.pop_back();
        if (node_id < 0) {
            continue;
        }
        if (heap.size() == k && bound > heap.top().distance_sq) {
            continue;
        }
        const Node& node = nodes_[static_cast<std::size_t>(node_id)];
        offer({distance_sq(node.index, query, weights), node.index});

        const double delta = query[node.axis] - coords_[node.index * dim_ + node.axis];
        const double w = weights.empty() ? 1.0 : weights[node.axis];
        const double plane_sq = w * delta * delta;
        const auto near_child = delta < 0.0 ? node.left : node.right;
        const auto far_child = delta < 0.0 ? node.right : node.left;
        // Far side first so the near side is popped next.
        stack.emplace_back(far_child, std::max(bound, plane_sq));
        stack.emplace_back(near_child, bound);
    }

    return drain(heap);
}

} // namespace trace
