#pragma once

#include "trace/geometry.hpp"
#include "trace/trajectory.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace trace {

enum class Polarity : int { Desirable = 1, Undesirable = -1 };

const char* to_string(Polarity p) noexcept;
/// Accepts "desirable"/"undesirable" (also "+"/"-"); throws ConfigError otherwise.
Polarity parse_polarity(std::string_view text);

/// One counterfactual target for a step.
struct TargetSpec {
    FeatureVector point;
    std::string class_label;
    Polarity polarity = Polarity::Desirable;
    double weight = 1.0; // class weight; must agree across a class's targets
};

enum class SkipReason {
    NoFeatureChange,  // |x_{t+1} - x_t| <= epsilon in the active subspace
    AllMasked,        // x_t, x_{t+1} and every target agree in every dimension
    NoScorableTarget, // every target coincides with x_t in the active subspace
};

const char* to_string(SkipReason r) noexcept;

struct TargetScore {
    std::string class_label;
    Polarity polarity;
    StepGeometry geometry;
};

struct StepScore {
    std::int64_t t_index = 0;      // time index of x_{t+1}
    std::int64_t from_t_index = 0; // time index of x_t
    std::vector<TargetScore> per_target;
    std::map<std::string, double> per_class; // mean S over the class's targets
    /// Weighted mean of per-class S over classes of each polarity (unsigned).
    std::optional<double> desirable;
    std::optional<double> undesirable;
    double combined = 0.0;
    std::optional<SkipReason> skip;
    std::vector<std::size_t> active_dims;
    std::size_t excluded_targets = 0; // targets equal to x_t in the active subspace

    bool skipped() const noexcept { return skip.has_value(); }
};

struct TrajectoryScore {
    std::string subject_id;
    std::vector<StepScore> steps; // every consecutive pair, skipped ones included
    std::size_t skipped_count = 0;

    std::size_t scored_count() const noexcept { return steps.size() - skipped_count; }
};

struct ScoreOptions {
    std::vector<double> feature_weights; // empty: all ones
    double epsilon = kDefaultEpsilon;
};

/// Supplies the targets for the step leaving x_t. Implementations must be
/// safe to call concurrently.
class TargetProvider {
public:
    virtual ~TargetProvider() = default;
    virtual std::vector<TargetSpec> targets_for(const FeatureVector& x_t, std::int64_t t_index) const = 0;
};

struct MaskResult {
    std::vector<std::size_t> active;
    bool all_masked() const noexcept { return active.empty(); }
};

/// Dimensions kept for scoring: those where x_{t+1} or at least one target
/// differs from x_t by more than epsilon. Static features that match every
/// counterfactual are dropped.
MaskResult mask_static(const FeatureVector& x_t, const FeatureVector& x_next,
                       std::span<const TargetSpec> targets, double epsilon = kDefaultEpsilon);

StepScore score_step(const FeatureVector& x_t, const FeatureVector& x_next,
                     std::span<const TargetSpec> targets, double lambda,
                     const ScoreOptions& options = {});

TrajectoryScore score_trajectory(const Trajectory& trajectory, const TargetProvider& provider,
                                 const LambdaSchedule& lambda, const ScoreOptions& options = {});

/// Scores each feature on its own 1-D projection. Targets are queried once
/// per step with the full vector and then projected.
std::map<std::size_t, TrajectoryScore> feature_scores(const Trajectory& trajectory,
                                                      const TargetProvider& provider,
                                                      const LambdaSchedule& lambda,
                                                      const ScoreOptions& options = {});

} // namespace trace
