#pragma once

#include "trace/scoring.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace trace {

/// Instantaneous, average and cumulative forms of one scored trajectory.
/// Skipped steps are excluded from all three.
struct ScoreSeries {
    std::string subject_id;
    std::vector<std::pair<std::int64_t, double>> values; // (t_index, combined)
    double average = 0.0;
    std::vector<double> cumulative;
    /// Averages of the per-polarity components over the steps that have them.
    std::optional<double> desirable_average;
    std::optional<double> undesirable_average;
};

/// Throws AggregateError when no step was scored.
ScoreSeries aggregate(const TrajectoryScore& score);

struct GroupComparison {
    double mean_a = 0.0, sd_a = 0.0;
    std::size_t n_a = 0;
    double mean_b = 0.0, sd_b = 0.0;
    std::size_t n_b = 0;
    double t_stat = 0.0;
    double dof = 0.0; // Welch-Satterthwaite
    double p_value = 1.0; // two-sided
};

/// Welch's unequal-variance t-test. Requires at least two values per sample
/// and nonzero variance in at least one (StatsError otherwise).
GroupComparison welch_t_test(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a, b), by continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

/// Keys sorted by descending value; ties keep input order.
std::vector<std::string> rank_targets(std::span<const std::pair<std::string, double>> averages);

/// One JSON object per scored step:
/// {"subject":..,"t":..,"combined":..,"per_class":{..}} plus optional
/// "series", "desirable" and "undesirable" members.
void write_step_jsonl(std::ostream& out, const TrajectoryScore& score, const std::string& series = {});

/// Wide table for plotting: one row per t, one column per series name.
/// Cells without a scored step are left empty.
void write_wide_csv(std::ostream& out, std::span<const std::pair<std::string, ScoreSeries>> series,
                    bool cumulative = false);

} // namespace trace
