#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <variant>
#include <vector>

namespace trace {

/// Default threshold below which a norm is treated as zero.
inline constexpr double kDefaultEpsilon = 1e-9;

/// A point in (normalized) feature space. Values are finite and non-empty.
class FeatureVector {
public:
    explicit FeatureVector(std::vector<double> values);
    FeatureVector(std::initializer_list<double> values);

    std::size_t dim() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Subvector made of the listed dimensions, in the given order.
    FeatureVector select(std::span<const std::size_t> dims) const;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

private:
    std::vector<double> values_;
};

/// Diagonally weighted inner product <a, b> = sum_i w_i a_i b_i.
/// An empty weight vector is the standard dot product.
class InnerProduct {
public:
    InnerProduct() = default;
    explicit InnerProduct(std::vector<double> weights);

    double operator()(std::span<const double> a, std::span<const double> b) const;
    double norm(std::span<const double> v) const;

    bool weighted() const noexcept { return !weights_.empty(); }
    std::span<const double> weights() const noexcept { return weights_; }

    /// Same metric restricted to a subset of dimensions.
    InnerProduct restricted(std::span<const std::size_t> dims) const;

private:
    std::vector<double> weights_;
};

/// Difference of two points, carrying the norm induced by the inner product
/// it was built with.
class ChangeVector {
public:
    explicit ChangeVector(std::vector<double> values, const InnerProduct& metric = {});

    /// to - from
    static ChangeVector between(const FeatureVector& from, const FeatureVector& to,
                                const InnerProduct& metric = {});

    std::size_t dim() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double norm() const noexcept { return norm_; }

private:
    std::vector<double> values_;
    double norm_;
};

/// Why a step's geometry took a special-case path.
enum class Degeneracy {
    None,
    NoMove,       // true change had zero length
    GoalReached,  // x_{t+1} landed on the target
    BestAchieved, // best reachable point on the move line is the target itself
};

const char* to_string(Degeneracy d) noexcept;

struct StepGeometry {
    double theta;  // cosine between true and desired change
    double r1;     // == theta
    double r2;     // |cos| between residuals from best point and landing point
    double s;      // lambda * r1 + (1 - lambda) * r2
    FeatureVector best_point;
    Degeneracy degenerate = Degeneracy::None;
};

struct GeometryOptions {
    InnerProduct metric;
    double epsilon = kDefaultEpsilon;
};

double inner(const FeatureVector& a, const FeatureVector& b, const InnerProduct& metric = {});
double inner(const ChangeVector& a, const ChangeVector& b, const InnerProduct& metric = {});

/// Closest point to `a` on the line through `b` with direction `c - b`:
///   d = b + h / |h| * |g| * theta,  h = c - b, g = a - b,
///   theta = <h, g> / (|h| |g|).
/// Throws DegenerateGeometry if |h| or |g| is within epsilon of zero.
FeatureVector closest_point(const FeatureVector& a, const FeatureVector& b, const FeatureVector& c,
                            const GeometryOptions& options = {});

/// Normalised dot product of the true and desired change. Both vectors must
/// have been built with `options.metric`.
double r1(const ChangeVector& v_t, const ChangeVector& v_prime, const GeometryOptions& options = {});

struct R2Result {
    double value;
    Degeneracy flag;
    FeatureVector best_point;
};

/// Quality of the move given its angle. The best point is the projection of
/// the target on the move line when theta > 0, else x_t itself.
R2Result r2(const FeatureVector& x_t, const FeatureVector& x_next, const FeatureVector& x_target,
            const GeometryOptions& options = {});

/// Full single-step score against one target. Lambda must lie in [0, 1].
StepGeometry step_score(const FeatureVector& x_t, const FeatureVector& x_next,
                        const FeatureVector& x_target, double lambda,
                        const GeometryOptions& options = {});

/// Per-step lambda: a constant, or one value per scored step position.
class LambdaSchedule {
public:
    LambdaSchedule(double constant = 0.9); // NOLINT(google-explicit-constructor)
    explicit LambdaSchedule(std::vector<double> per_step);

    /// Lambda for the step starting at trajectory position `step`.
    double at(std::size_t step) const;

    bool constant() const noexcept { return std::holds_alternative<double>(value_); }

private:
    std::variant<double, std::vector<double>> value_;
};

} // namespace trace
