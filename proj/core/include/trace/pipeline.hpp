#pragma once

#include "trace/csv.hpp"
#include "trace/geometry.hpp"
#include "trace/trajectory.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trace {

enum class ColumnKind { Numeric, Categorical };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    std::vector<std::string> categories; // sorted; categorical columns only
};

/// One observation before imputation. `values` holds the numeric columns of
/// the schema in schema order; `categorical` is keyed by column name.
struct RawRecord {
    std::string subject_id;
    std::int64_t t_index = 0;
    std::vector<std::optional<double>> values;
    std::map<std::string, std::optional<std::string>> categorical;

    friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

/// Raw input columns and how they expand into the numeric feature space.
/// Categorical columns are one-hot encoded, one dimension per category.
class FeatureSchema {
public:
    FeatureSchema() = default;
    explicit FeatureSchema(std::vector<ColumnSpec> columns);

    const std::vector<ColumnSpec>& columns() const noexcept { return columns_; }
    std::vector<std::string> column_names() const;
    std::size_t numeric_count() const noexcept;

    std::vector<std::string> encoded_names() const;
    std::size_t encoded_dim() const noexcept;

    /// Encodes a fully imputed record. Unknown categories encode as all-zero.
    FeatureVector encode(const RawRecord& record) const;

    std::string to_json() const;
    static FeatureSchema from_json(std::string_view text);

private:
    std::vector<ColumnSpec> columns_;
};

/// Per-class numeric means and categorical modes, plus pooled values used
/// when a class has none.
class ClassStats {
public:
    static ClassStats compute(std::span<const RawRecord> records,
                              std::span<const std::optional<std::string>> labels,
                              const FeatureSchema& schema);

    std::optional<double> mean(const std::optional<std::string>& label, std::size_t numeric_column) const;
    std::optional<std::string> mode(const std::optional<std::string>& label, const std::string& column) const;

    std::string to_json() const;
    static ClassStats from_json(std::string_view text);

private:
    struct Entry {
        std::vector<std::optional<double>> means;
        std::map<std::string, std::string> modes;
    };
    const Entry* entry(const std::optional<std::string>& label) const;

    std::map<std::string, Entry> by_class_;
    Entry pooled_;
};

/// Fill every missing value of one subject's records (sorted by t_index):
/// forward fill, then backward fill leading gaps, then the class mean (numeric)
/// or class mode (categorical) for columns missing over the whole stay.
/// Throws ImputeError if a column is empty and no statistic is available.
std::vector<RawRecord> impute(std::vector<RawRecord> records, const ClassStats* stats,
                              const std::optional<std::string>& label);

struct FeatureRange {
    std::string name;
    double min;
    double max;
};

/// Per-feature min-max scaling to [0, 1]. Values outside the fitted range are
/// extrapolated, not clipped; a constant feature maps to 0.5.
class Normalizer {
public:
    Normalizer() = default;
    explicit Normalizer(std::vector<FeatureRange> ranges);

    static Normalizer fit(std::span<const FeatureVector> rows, std::vector<std::string> names = {});

    std::size_t dim() const noexcept { return ranges_.size(); }
    const std::vector<FeatureRange>& ranges() const noexcept { return ranges_; }

    FeatureVector apply(const FeatureVector& x) const;
    FeatureVector invert(const FeatureVector& x) const;

    /// {"features":[{"name":...,"min":...,"max":...}]}
    std::string to_json() const;
    static Normalizer from_json(std::string_view text);

private:
    std::vector<FeatureRange> ranges_;
};

enum class Period { Day, Month, Year };

Period parse_period(std::string_view text);

/// Bucket key of an ISO-8601 style timestamp ("YYYY", "YYYY-MM", "YYYY-MM-DD",
/// optionally followed by a time). Month keys are year * 12 + month - 1, day
/// keys are days since 1970-01-01. Throws ParseError when unparseable.
std::int64_t period_key(std::string_view timestamp, Period period);

struct TimestampedRecord {
    std::string subject_id;
    std::string timestamp;
    std::vector<std::optional<double>> values;
    std::map<std::string, std::optional<std::string>> categorical;
};

/// Missing-aware mean per (subject, period, feature); categorical columns take
/// the most frequent value (ties to the lexicographically smallest). Output is
/// ordered by (subject_id, period key) and t_index is the period key.
std::vector<RawRecord> group_by(std::span<const TimestampedRecord> records, Period period = Period::Month);

/// Records of one subject as read from a trajectory table.
struct SubjectRecords {
    std::string subject_id;
    std::optional<std::string> label; // label on the subject's final row
    std::vector<RawRecord> records;   // sorted by t_index, unique
};

struct RecordSet {
    FeatureSchema schema;
    std::vector<SubjectRecords> subjects; // ordered by subject_id
};

/// Columns that are neither an id nor a label, in header order.
std::vector<std::size_t> feature_columns(const CsvTable& table, std::span<const std::string_view> reserved);

/// Numeric unless some non-empty cell fails to parse as a number.
FeatureSchema infer_schema(const CsvTable& table, std::span<const std::size_t> feature_cols);

/// Parses `subject_id,t,<features...>[,label]`. The `t` column holds either
/// integers (used as-is) or timestamps (grouped by `period`). Empty cells are
/// missing values. With `schema` set, the feature columns must match it.
RecordSet read_trajectory_table(const CsvTable& table, const FeatureSchema* schema = nullptr,
                                Period period = Period::Month);

/// Impute, encode and (optionally) normalize one subject.
Trajectory build_trajectory(const SubjectRecords& subject, const FeatureSchema& schema,
                            const ClassStats* stats, const Normalizer* normalizer);

} // namespace trace
