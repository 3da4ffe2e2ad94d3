#pragma once

#include "trace/geometry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace trace {

struct TrajectoryPoint {
    std::int64_t t_index;
    FeatureVector x;
};

/// Ordered, fully imputed observations of one subject. Time indices are
/// strictly increasing and all points share one dimension.
class Trajectory {
public:
    Trajectory(std::string subject_id, std::vector<TrajectoryPoint> points,
               std::optional<std::string> label = std::nullopt);

    const std::string& subject_id() const noexcept { return subject_id_; }
    const std::vector<TrajectoryPoint>& points() const noexcept { return points_; }
    const std::optional<std::string>& label() const noexcept { return label_; }

    std::size_t size() const noexcept { return points_.size(); }
    std::size_t dim() const noexcept { return points_.empty() ? 0 : points_.front().x.dim(); }

private:
    std::string subject_id_;
    std::vector<TrajectoryPoint> points_;
    std::optional<std::string> label_;
};

} // namespace trace
