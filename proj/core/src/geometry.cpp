#include "trace/geometry.hpp"

#include "trace/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace trace {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* where) {
    if (a != b) {
        throw DimensionError(std::string(where) + ": dimension mismatch (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
    }
}

std::vector<double> difference(std::span<const double> to, std::span<const double> from) {
    std::vector<double> out(to.size());
    for (std::size_t i = 0; i < to.size(); ++i) {
        out[i] = to[i] - from[i];
    }
    return out;
}

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

// Cosine of the angle between the true change and the change towards the
// target, computed in the metric carried by the options.
double alignment(const ChangeVector& v_t, const ChangeVector& v_prime, const GeometryOptions& options) {
    require_same_dim(v_t.dim(), v_prime.dim(), "r1");
    if (v_t.norm() <= options.epsilon) {
        throw DegenerateGeometry(DegenerateCause::NoMove, "r1: true change has zero length");
    }
    if (v_prime.norm() <= options.epsilon) {
        throw DegenerateGeometry(DegenerateCause::NoDesiredChange, "r1: desired change has zero length");
    }
    return clamp_unit(options.metric(v_t.values(), v_prime.values()) / (v_t.norm() * v_prime.norm()));
}

struct Landing {
    double theta;
    R2Result r2;
};

Landing landing(const FeatureVector& x_t, const FeatureVector& x_next, const FeatureVector& x_target,
                const GeometryOptions& options) {
    require_same_dim(x_t.dim(), x_next.dim(), "r2");
    require_same_dim(x_t.dim(), x_target.dim(), "r2");

    const auto v_t = ChangeVector::between(x_t, x_next, options.metric);
    const auto v_prime = ChangeVector::between(x_t, x_target, options.metric);
    const double theta = alignment(v_t, v_prime, options);

    // theta == 0 goes down the "moving away" branch.
    FeatureVector best = theta > 0.0 ? closest_point(x_target, x_t, x_next, options) : x_t;

    const auto v_star = ChangeVector::between(x_next, x_target, options.metric);
    if (v_star.norm() <= options.epsilon) {
        return {theta, {1.0, Degeneracy::GoalReached, std::move(best)}};
    }
    const auto v_hat = ChangeVector::between(best, x_target, options.metric);
    if (v_hat.norm() <= options.epsilon) {
        return {theta, {1.0, Degeneracy::BestAchieved, std::move(best)}};
    }
    const double cosine = options.metric(v_hat.values(), v_star.values()) / (v_hat.norm() * v_star.norm());
    return {theta, {std::min(std::abs(cosine), 1.0), Degeneracy::None, std::move(best)}};
}

} // namespace

FeatureVector::FeatureVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw DimensionError("FeatureVector: dimension must be positive");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw DimensionError("FeatureVector: non-finite value at dimension " + std::to_string(i));
        }
    }
}

FeatureVector::FeatureVector(std::initializer_list<double> values)
    : FeatureVector(std::vector<double>(values)) {}

FeatureVector FeatureVector::select(std::span<const std::size_t> dims) const {
    std::vector<double> out;
    out.reserve(dims.size());
    for (auto d : dims) {
        out.push_back(values_.at(d));
    }
    return FeatureVector(std::move(out));
}

InnerProduct::InnerProduct(std::vector<double> weights) : weights_(std::move(weights)) {
    for (double w : weights_) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw ConfigError("InnerProduct: weights must be finite and positive");
        }
    }
}

double InnerProduct::operator()(std::span<const double> a, std::span<const double> b) const {
    require_same_dim(a.size(), b.size(), "inner");
    double sum = 0.0;
    if (weights_.empty()) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            sum += a[i] * b[i];
        }
        return sum;
    }
    require_same_dim(a.size(), weights_.size(), "inner (weights)");
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += weights_[i] * a[i] * b[i];
    }
    return sum;
}

double InnerProduct::norm(std::span<const double> v) const { return std::sqrt((*this)(v, v)); }

InnerProduct InnerProduct::restricted(std::span<const std::size_t> dims) const {
    if (weights_.empty()) {
        return {};
    }
    std::vector<double> w;
    w.reserve(dims.size());
    for (auto d : dims) {
        w.push_back(weights_.at(d));
    }
    return InnerProduct(std::move(w));
}

ChangeVector::ChangeVector(std::vector<double> values, const InnerProduct& metric)
    : values_(std::move(values)), norm_(metric.norm(values_)) {}

ChangeVector ChangeVector::between(const FeatureVector& from, const FeatureVector& to,
                                   const InnerProduct& metric) {
    require_same_dim(from.dim(), to.dim(), "change vector");
    return ChangeVector(difference(to.values(), from.values()), metric);
}

const char* to_string(Degeneracy d) noexcept {
    switch (d) {
    case Degeneracy::None: return "none";
    case Degeneracy::NoMove: return "no_move";
    case Degeneracy::GoalReached: return "goal_reached";
    case Degeneracy::BestAchieved: return "best_achieved";
    }
    return "unknown";
}

double inner(const FeatureVector& a, const FeatureVector& b, const InnerProduct& metric) {
    return metric(a.values(), b.values());
}

double inner(const ChangeVector& a, const ChangeVector& b, const InnerProduct& metric) {
    return metric(a.values(), b.values());
}

FeatureVector closest_point(const FeatureVector& a, const FeatureVector& b, const FeatureVector& c,
                            const GeometryOptions& options) {
    require_same_dim(a.dim(), b.dim(), "closest_point");
    require_same_dim(a.dim(), c.dim(), "closest_point");

    const auto h = ChangeVector::between(b, c, options.metric);
    const auto g = ChangeVector::between(b, a, options.metric);
    if (h.norm() <= options.epsilon) {
        throw DegenerateGeometry(DegenerateCause::ZeroDirection, "closest_point: direction c - b has zero length");
    }
    if (g.norm() <= options.epsilon) {
        throw DegenerateGeometry(DegenerateCause::CoincidentPoints, "closest_point: a and b coincide");
    }
    const double theta = options.metric(h.values(), g.values()) / (h.norm() * g.norm());
    const double along = g.norm() * theta / h.norm();

    std::vector<double> d(a.dim());
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = b[i] + h.values()[i] * along;
    }
    return FeatureVector(std::move(d));
}

double r1(const ChangeVector& v_t, const ChangeVector& v_prime, const GeometryOptions& options) {
    return alignment(v_t, v_prime, options);
}

R2Result r2(const FeatureVector& x_t, const FeatureVector& x_next, const FeatureVector& x_target,
            const GeometryOptions& options) {
    return landing(x_t, x_next, x_target, options).r2;
}

StepGeometry step_score(const FeatureVector& x_t, const FeatureVector& x_next,
                        const FeatureVector& x_target, double lambda, const GeometryOptions& options) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw ConfigError("step_score: lambda must lie in [0, 1], got " + std::to_string(lambda));
    }
    auto [theta, r2_result] = landing(x_t, x_next, x_target, options);

    if (r2_result.flag == Degeneracy::GoalReached) {
        // Landing on the target is a perfect step whatever lambda is.
        return {1.0, 1.0, 1.0, 1.0, std::move(r2_result.best_point), Degeneracy::GoalReached};
    }
    const double s = std::min(lambda * theta + (1.0 - lambda) * r2_result.value, 1.0);
    return {theta, theta, r2_result.value, s, std::move(r2_result.best_point), r2_result.flag};
}

LambdaSchedule::LambdaSchedule(double constant) : value_(constant) {
    if (!(constant >= 0.0 && constant <= 1.0)) {
        throw ConfigError("lambda must lie in [0, 1], got " + std::to_string(constant));
    }
}

LambdaSchedule::LambdaSchedule(std::vector<double> per_step) : value_(std::move(per_step)) {
    const auto& values = std::get<std::vector<double>>(value_);
    if (values.empty()) {
        throw ConfigError("lambda schedule must not be empty");
    }
    for (double l : values) {
        if (!(l >= 0.0 && l <= 1.0)) {
            throw ConfigError("lambda schedule values must lie in [0, 1], got " + std::to_string(l));
        }
    }
}

double LambdaSchedule::at(std::size_t step) const {
    if (const auto* c = std::get_if<double>(&value_)) {
        return *c;
    }
    const auto& values = std::get<std::vector<double>>(value_);
    if (step >= values.size()) {
        throw ConfigError("lambda schedule has " + std::to_string(values.size()) +
                          " entries but step " + std::to_string(step) + " was requested");
    }
    return values[step];
}

} // namespace trace
