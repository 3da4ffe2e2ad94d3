#include "trace/trajectory.hpp"

#include "trace/error.hpp"

namespace trace {

Trajectory::Trajectory(std::string subject_id, std::vector<TrajectoryPoint> points,
                       std::optional<std::string> label)
    : subject_id_(std::move(subject_id)), points_(std::move(points)), label_(std::move(label)) {
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (points_[i].t_index <= points_[i - 1].t_index) {
            throw TrajectoryError("trajectory " + subject_id_ + ": time indices must be strictly increasing");
        }
        if (points_[i].x.dim() != points_[0].x.dim()) {
            throw DimensionError("trajectory " + subject_id_ + ": inconsistent point dimensions");
        }
    }
}

} // namespace trace
