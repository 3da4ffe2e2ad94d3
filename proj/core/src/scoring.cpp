#include "trace/scoring.hpp"

#include "trace/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace trace {

namespace {

struct ClassInfo {
    Polarity polarity;
    double weight;
    std::vector<double> scores;
};

void validate_targets(std::span<const TargetSpec> targets, std::size_t dim) {
    if (targets.empty()) {
        throw TargetError("no targets supplied for step");
    }
    std::map<std::string, const TargetSpec*> first_of_class;
    for (const auto& target : targets) {
        if (target.point.dim() != dim) {
            throw DimensionError("target of class '" + target.class_label + "' has dimension " +
                                 std::to_string(target.point.dim()) + ", trajectory has " +
                                 std::to_string(dim));
        }
        if (!(target.weight > 0.0) || !std::isfinite(target.weight)) {
            throw TargetError("target weight must be positive (class '" + target.class_label + "')");
        }
        auto [it, inserted] = first_of_class.emplace(target.class_label, &target);
        if (!inserted && (it->second->polarity != target.polarity || it->second->weight != target.weight)) {
            throw TargetError("targets of class '" + target.class_label +
                              "' disagree on polarity or weight");
        }
    }
}

// Order-independent mean.
double sorted_mean(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

StepScore score_step_impl(const FeatureVector& x_t, const FeatureVector& x_next,
                          std::span<const TargetSpec> targets, double lambda,
                          const ScoreOptions& options, const InnerProduct& full_metric) {
    if (x_t.dim() != x_next.dim()) {
        throw DimensionError("score_step: x_t and x_next differ in dimension");
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw ConfigError("score_step: lambda must lie in [0, 1], got " + std::to_string(lambda));
    }
    validate_targets(targets, x_t.dim());

    StepScore out;
    auto mask = mask_static(x_t, x_next, targets, options.epsilon);
    if (mask.all_masked()) {
        out.skip = SkipReason::AllMasked;
        return out;
    }
    out.active_dims = std::move(mask.active);

    GeometryOptions geometry{full_metric.restricted(out.active_dims), options.epsilon};
    const auto from = x_t.select(out.active_dims);
    const auto to = x_next.select(out.active_dims);
    if (ChangeVector::between(from, to, geometry.metric).norm() <= options.epsilon) {
        out.skip = SkipReason::NoFeatureChange;
        return out;
    }

    std::map<std::string, ClassInfo> classes;
    for (const auto& target : targets) {
        const auto goal = target.point.select(out.active_dims);
        if (ChangeVector::between(from, goal, geometry.metric).norm() <= options.epsilon) {
            ++out.excluded_targets;
            continue;
        }
        auto geo = step_score(from, to, goal, lambda, geometry);
        auto& info = classes.try_emplace(target.class_label, ClassInfo{target.polarity, target.weight, {}})
                         .first->second;
        info.scores.push_back(geo.s);
        out.per_target.push_back({target.class_label, target.polarity, std::move(geo)});
    }
    if (classes.empty()) {
        out.skip = SkipReason::NoScorableTarget;
        return out;
    }

    double signed_sum = 0.0;
    double weight_sum = 0.0;
    double pos_sum = 0.0, pos_weight = 0.0;
    double neg_sum = 0.0, neg_weight = 0.0;
    for (auto& [label, info] : classes) {
        const double mean = sorted_mean(std::move(info.scores));
        out.per_class.emplace(label, mean);
        const double sign = static_cast<double>(static_cast<int>(info.polarity));
        signed_sum += info.weight * sign * mean;
        weight_sum += info.weight;
        if (info.polarity == Polarity::Desirable) {
            pos_sum += info.weight * mean;
            pos_weight += info.weight;
        } else {
            neg_sum += info.weight * mean;
            neg_weight += info.weight;
        }
    }
    out.combined = std::clamp(signed_sum / weight_sum, -1.0, 1.0);
    if (pos_weight > 0.0) {
        out.desirable = pos_sum / pos_weight;
    }
    if (neg_weight > 0.0) {
        out.undesirable = neg_sum / neg_weight;
    }
    return out;
}

InnerProduct make_metric(const ScoreOptions& options, std::size_t dim) {
    if (options.feature_weights.empty()) {
        return {};
    }
    if (options.feature_weights.size() != dim) {
        throw DimensionError("feature weights have " + std::to_string(options.feature_weights.size()) +
                             " entries, trajectory has dimension " + std::to_string(dim));
    }
    return InnerProduct(options.feature_weights);
}

void require_scoreable(const Trajectory& trajectory) {
    if (trajectory.size() < 2) {
        throw TrajectoryError("trajectory " + trajectory.subject_id() + " has " +
                              std::to_string(trajectory.size()) + " point(s); at least 2 are required");
    }
}

} // namespace

const char* to_string(Polarity p) noexcept {
    return p == Polarity::Desirable ? "desirable" : "undesirable";
}

Polarity parse_polarity(std::string_view text) {
    if (text == "desirable" || text == "+" || text == "+1") {
        return Polarity::Desirable;
    }
    if (text == "undesirable" || text == "-" || text == "-1") {
        return Polarity::Undesirable;
    }
    throw ConfigError("unknown polarity '" + std::string(text) + "'");
}

const char* to_string(SkipReason r) noexcept {
    switch (r) {
    case SkipReason::NoFeatureChange: return "no_feature_change";
    case SkipReason::AllMasked: return "all_masked";
    case SkipReason::NoScorableTarget: return "no_scorable_target";
    }
    return "unknown";
}

MaskResult mask_static(const FeatureVector& x_t, const FeatureVector& x_next,
                       std::span<const TargetSpec> targets, double epsilon) {
    if (x_t.dim() != x_next.dim()) {
        throw DimensionError("mask_static: x_t and x_next differ in dimension");
    }
    MaskResult out;
    for (std::size_t d = 0; d < x_t.dim(); ++d) {
        bool differs = std::abs(x_next[d] - x_t[d]) > epsilon;
        for (const auto& target : targets) {
            if (target.point.dim() != x_t.dim()) {
                throw DimensionError("mask_static: target dimension mismatch");
            }
            differs = differs || std::abs(target.point[d] - x_t[d]) > epsilon;
        }
        if (differs) {
            out.active.push_back(d);
        }
    }
    return out;
}

StepScore score_step(const FeatureVector& x_t, const FeatureVector& x_next,
                     std::span<const TargetSpec> targets, double lambda, const ScoreOptions& options) {
    return score_step_impl(x_t, x_next, targets, lambda, options, make_metric(options, x_t.dim()));
}

TrajectoryScore score_trajectory(const Trajectory& trajectory, const TargetProvider& provider,
                                 const LambdaSchedule& lambda, const ScoreOptions& options) {
    require_scoreable(trajectory);
    const auto metric = make_metric(options, trajectory.dim());
    const auto& points = trajectory.points();

    TrajectoryScore out;
    out.subject_id = trajectory.subject_id();
    out.steps.reserve(points.size() - 1);
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const auto targets = provider.targets_for(points[i].x, points[i].t_index);
        auto step = score_step_impl(points[i].x, points[i + 1].x, targets, lambda.at(i), options, metric);
        step.from_t_index = points[i].t_index;
        step.t_index = points[i + 1].t_index;
        if (step.skipped()) {
            ++out.skipped_count;
        }
        out.steps.push_back(std::move(step));
    }
    return out;
}

std::map<std::size_t, TrajectoryScore> feature_scores(const Trajectory& trajectory,
                                                      const TargetProvider& provider,
                                                      const LambdaSchedule& lambda,
                                                      const ScoreOptions& options) {
    require_scoreable(trajectory);
    const auto& points = trajectory.points();
    const std::size_t dim = trajectory.dim();

    // Cosines in one dimension do not depend on a diagonal weight.
    ScoreOptions projected;
    projected.epsilon = options.epsilon;

    std::map<std::size_t, TrajectoryScore> out;
    for (std::size_t d = 0; d < dim; ++d) {
        out[d].subject_id = trajectory.subject_id();
    }
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const auto targets = provider.targets_for(points[i].x, points[i].t_index);
        for (std::size_t d = 0; d < dim; ++d) {
            const std::size_t dims[] = {d};
            std::vector<TargetSpec> slice;
            slice.reserve(targets.size());
            for (const auto& target : targets) {
                slice.push_back({target.point.select(dims), target.class_label, target.polarity, target.weight});
            }
            auto step = score_step_impl(points[i].x.select(dims), points[i + 1].x.select(dims), slice,
                                        lambda.at(i), projected, InnerProduct{});
            step.from_t_index = points[i].t_index;
            step.t_index = points[i + 1].t_index;
            // Report the original feature index rather than the 1-D slot.
            for (auto& active : step.active_dims) {
                active = d;
            }
            auto& series = out[d];
            if (step.skipped()) {
                ++series.skipped_count;
            }
            series.steps.push_back(std::move(step));
        }
    }
    return out;
}

} // namespace trace
