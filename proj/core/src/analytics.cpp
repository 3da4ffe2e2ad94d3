#include "trace/analytics.hpp"

#include "trace/csv.hpp"
#include "trace/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace trace {

namespace {

// Continued fraction for I_x(a, b) (modified Lentz). Converges quickly for
// x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;

        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) {
            return h;
        }
    }
    throw StatsError("incomplete beta: continued fraction did not converge");
}

// I_x(a, b) given both x and y = 1 - x, so callers can pass an accurately
// computed complement.
double incomplete_beta(double a, double b, double x, double y) {
    if (x <= 0.0) return 0.0;
    if (y <= 0.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

struct Moments {
    double mean;     // of (value - pivot)
    double variance; // sample variance, n - 1 denominator
};

Moments moments(std::span<const double> xs, double pivot) {
    double sum = 0.0;
    for (double x : xs) {
        sum += x - pivot;
    }
    const double mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) {
        const double d = (x - pivot) - mean;
        ss += d * d;
    }
    return {mean, ss / static_cast<double>(xs.size() - 1)};
}

} // namespace

ScoreSeries aggregate(const TrajectoryScore& score) {
    ScoreSeries out;
    out.subject_id = score.subject_id;
    double running = 0.0;
    double pos = 0.0, neg = 0.0;
    std::size_t pos_n = 0, neg_n = 0;
    for (const auto& step : score.steps) {
        if (step.skipped()) {
            continue;
        }
        out.values.emplace_back(step.t_index, step.combined);
        running += step.combined;
        out.cumulative.push_back(running);
        if (step.desirable) {
            pos += *step.desirable;
            ++pos_n;
        }
        if (step.undesirable) {
            neg += *step.undesirable;
            ++neg_n;
        }
    }
    if (out.values.empty()) {
        throw AggregateError("subject " + score.subject_id + " has no scored steps");
    }
    out.average = running / static_cast<double>(out.values.size());
    if (pos_n > 0) out.desirable_average = pos / static_cast<double>(pos_n);
    if (neg_n > 0) out.undesirable_average = neg / static_cast<double>(neg_n);
    return out;
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
        throw StatsError("incomplete beta: require a, b > 0 and x in [0, 1]");
    }
    return incomplete_beta(a, b, x, 1.0 - x);
}

double student_t_two_sided_p(double t, double dof) {
    if (!(dof > 0.0)) {
        throw StatsError("student t: degrees of freedom must be positive");
    }
    if (std::isnan(t)) {
        throw StatsError("student t: t statistic is NaN");
    }
    if (t == 0.0) {
        return 1.0;
    }
    if (std::isinf(t)) {
        return 0.0;
    }
    const double t2 = t * t;
    const double x = dof / (dof + t2);
    const double y = t2 / (dof + t2);
    return std::clamp(incomplete_beta(0.5 * dof, 0.5, x, y), 0.0, 1.0);
}

GroupComparison welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw StatsError("welch t-test: each sample needs at least 2 values (got " + std::to_string(a.size()) +
                         " and " + std::to_string(b.size()) + ")");
    }
    for (double v : a) {
        if (!std::isfinite(v)) throw StatsError("welch t-test: non-finite value in sample a");
    }
    for (double v : b) {
        if (!std::isfinite(v)) throw StatsError("welch t-test: non-finite value in sample b");
    }
    // A pivot symmetric in (a, b) keeps t(a, b) == -t(b, a) bit for bit and
    // makes the statistic invariant to a common shift whenever that shift is
    // exact in floating point.
    const double pivot = std::min(a.front(), b.front());
    const auto ma = moments(a, pivot);
    const auto mb = moments(b, pivot);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double qa = ma.variance / na;
    const double qb = mb.variance / nb;
    const double se2 = qa + qb;
    if (!(se2 > 0.0)) {
        throw StatsError("welch t-test: both samples have zero variance");
    }

    GroupComparison out;
    out.n_a = a.size();
    out.n_b = b.size();
    out.mean_a = pivot + ma.mean;
    out.mean_b = pivot + mb.mean;
    out.sd_a = std::sqrt(ma.variance);
    out.sd_b = std::sqrt(mb.variance);
    out.t_stat = (ma.mean - mb.mean) / std::sqrt(se2);
    out.dof = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    out.p_value = student_t_two_sided_p(out.t_stat, out.dof);
    return out;
}

std::vector<std::string> rank_targets(std::span<const std::pair<std::string, double>> averages) {
    std::vector<std::size_t> order(averages.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return averages[i].second > averages[j].second; });
    std::vector<std::string> out;
    out.reserve(order.size());
    for (auto i : order) {
        out.push_back(averages[i].first);
    }
    return out;
}

void write_step_jsonl(std::ostream& out, const TrajectoryScore& score, const std::string& series) {
    for (const auto& step : score.steps) {
        if (step.skipped()) {
            continue;
        }
        nlohmann::ordered_json line;
        line["subject"] = score.subject_id;
        if (!series.empty()) {
            line["series"] = series;
        }
        line["t"] = step.t_index;
        line["combined"] = step.combined;
        line["per_class"] = nlohmann::ordered_json(step.per_class);
        if (step.desirable) {
            line["desirable"] = *step.desirable;
        }
        if (step.undesirable) {
            line["undesirable"] = *step.undesirable;
        }
        out << line.dump() << '\n';
    }
}

void write_wide_csv(std::ostream& out, std::span<const std::pair<std::string, ScoreSeries>> series,
                    bool cumulative) {
    std::map<std::int64_t, std::vector<std::string>> rows;
    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& ss = series[s].second;
        for (std::size_t i = 0; i < ss.values.size(); ++i) {
            auto& row = rows[ss.values[i].first];
            row.resize(series.size());
            row[s] = format_number(cumulative ? ss.cumulative[i] : ss.values[i].second);
        }
    }
    std::vector<std::string> header{"t"};
    for (const auto& [name, _] : series) {
        header.push_back(name);
    }
    write_csv_row(out, header);
    for (auto& [t, cells] : rows) {
        cells.resize(series.size());
        std::vector<std::string> line{std::to_string(t)};
        line.insert(line.end(), cells.begin(), cells.end());
        write_csv_row(out, line);
    }
}

} // namespace trace
