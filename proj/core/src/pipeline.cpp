#include "trace/pipeline.hpp"

#include "trace/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace trace {

using nlohmann::json;

namespace {

json parse_json(std::string_view text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string(what) + ": invalid JSON: " + e.what());
    }
}

template <typename Fn>
auto json_guard(const char* what, Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

std::string most_frequent(const std::map<std::string, std::size_t>& counts) {
    std::string best;
    std::size_t best_count = 0;
    for (const auto& [value, count] : counts) { // map order: ties keep the smallest
        if (count > best_count) {
            best = value;
            best_count = count;
        }
    }
    return best;
}

// Howard Hinnant's days_from_civil.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool is_leap(std::int64_t y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

bool parse_digits(std::string_view text, std::size_t pos, std::size_t count, unsigned& out) {
    if (pos + count > text.size()) {
        return false;
    }
    out = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        if (text[i] < '0' || text[i] > '9') {
            return false;
        }
        out = out * 10 + static_cast<unsigned>(text[i] - '0');
    }
    return true;
}

struct Accumulator {
    std::vector<double> sums;
    std::vector<std::size_t> counts;
    std::map<std::string, std::map<std::string, std::size_t>> categories;
};

} // namespace

// ---------------------------------------------------------------------------
// FeatureSchema

FeatureSchema::FeatureSchema(std::vector<ColumnSpec> columns) : columns_(std::move(columns)) {
    std::set<std::string> seen;
    for (auto& c : columns_) {
        if (!seen.insert(c.name).second) {
            throw ParseError("duplicate feature column '" + c.name + "'");
        }
        std::sort(c.categories.begin(), c.categories.end());
        c.categories.erase(std::unique(c.categories.begin(), c.categories.end()), c.categories.end());
    }
}

std::vector<std::string> FeatureSchema::column_names() const {
    std::vector<std::string> out;
    for (const auto& c : columns_) {
        out.push_back(c.name);
    }
    return out;
}

std::size_t FeatureSchema::numeric_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(columns_.begin(), columns_.end(), [](const ColumnSpec& c) {
        return c.kind == ColumnKind::Numeric;
    }));
}

std::vector<std::string> FeatureSchema::encoded_names() const {
    std::vector<std::string> out;
    for (const auto& c : columns_) {
        if (c.kind == ColumnKind::Numeric) {
            out.push_back(c.name);
        } else {
            for (const auto& cat : c.categories) {
                out.push_back(c.name + "=" + cat);
            }
        }
    }
    return out;
}

std::size_t FeatureSchema::encoded_dim() const noexcept {
    std::size_t n = 0;
    for (const auto& c : columns_) {
        n += c.kind == ColumnKind::Numeric ? 1 : c.categories.size();
    }
    return n;
}

FeatureVector FeatureSchema::encode(const RawRecord& record) const {
    if (record.values.size() != numeric_count()) {
        throw DimensionError("record has " + std::to_string(record.values.size()) +
                             " numeric values, schema expects " + std::to_string(numeric_count()));
    }
    std::vector<double> out;
    out.reserve(encoded_dim());
    std::size_t numeric = 0;
    for (const auto& c : columns_) {
        if (c.kind == ColumnKind::Numeric) {
            const auto& v = record.values[numeric++];
            if (!v) {
                throw ImputeError("cannot encode missing value in column '" + c.name + "'");
            }
            out.push_back(*v);
            continue;
        }
        auto it = record.categorical.find(c.name);
        if (it == record.categorical.end() || !it->second) {
            throw ImputeError("cannot encode missing value in column '" + c.name + "'");
        }
        for (const auto& cat : c.categories) {
            out.push_back(cat == *it->second ? 1.0 : 0.0);
        }
    }
    return FeatureVector(std::move(out));
}

std::string FeatureSchema::to_json() const {
    json columns = json::array();
    for (const auto& c : columns_) {
        json col = {{"name", c.name}, {"kind", c.kind == ColumnKind::Numeric ? "numeric" : "categorical"}};
        if (c.kind == ColumnKind::Categorical) {
            col["categories"] = c.categories;
        }
        columns.push_back(std::move(col));
    }
    return json{{"columns", columns}}.dump();
}

FeatureSchema FeatureSchema::from_json(std::string_view text) {
    const auto doc = parse_json(text, "feature schema");
    return json_guard("feature schema", [&] {
        std::vector<ColumnSpec> columns;
        for (const auto& col : doc.at("columns")) {
            ColumnSpec spec;
            spec.name = col.at("name").get<std::string>();
            const auto kind = col.at("kind").get<std::string>();
            if (kind == "numeric") {
                spec.kind = ColumnKind::Numeric;
            } else if (kind == "categorical") {
                spec.kind = ColumnKind::Categorical;
                spec.categories = col.at("categories").get<std::vector<std::string>>();
            } else {
                throw ParseError("feature schema: unknown column kind '" + kind + "'");
            }
            columns.push_back(std::move(spec));
        }
        return FeatureSchema(std::move(columns));
    });
}

// ---------------------------------------------------------------------------
// ClassStats

ClassStats ClassStats::compute(std::span<const RawRecord> records,
                               std::span<const std::optional<std::string>> labels,
                               const FeatureSchema& schema) {
    if (labels.size() != records.size()) {
        throw DimensionError("ClassStats: one label per record is required");
    }
    const std::size_t n = schema.numeric_count();
    std::map<std::string, Accumulator> per_class;
    Accumulator pooled{std::vector<double>(n, 0.0), std::vector<std::size_t>(n, 0), {}};

    auto add = [n](Accumulator& acc, const RawRecord& r) {
        if (acc.sums.empty()) {
            acc.sums.assign(n, 0.0);
            acc.counts.assign(n, 0);
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (r.values[j]) {
                acc.sums[j] += *r.values[j];
                ++acc.counts[j];
            }
        }
        for (const auto& [name, value] : r.categorical) {
            if (value) {
                ++acc.categories[name][*value];
            }
        }
    };
    auto finish = [n](const Accumulator& acc) {
        Entry e;
        e.means.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            if (acc.counts[j] > 0) {
                e.means[j] = acc.sums[j] / static_cast<double>(acc.counts[j]);
            }
        }
        for (const auto& [name, counts] : acc.categories) {
            e.modes[name] = most_frequent(counts);
        }
        return e;
    };

    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].values.size() != n) {
            throw DimensionError("ClassStats: record has wrong number of numeric values");
        }
        add(pooled, records[i]);
        if (labels[i]) {
            add(per_class[*labels[i]], records[i]);
        }
    }
    ClassStats stats;
    stats.pooled_ = finish(pooled);
    for (const auto& [label, acc] : per_class) {
        stats.by_class_[label] = finish(acc);
    }
    return stats;
}

const ClassStats::Entry* ClassStats::entry(const std::optional<std::string>& label) const {
    if (!label) {
        return nullptr;
    }
    auto it = by_class_.find(*label);
    return it == by_class_.end() ? nullptr : &it->second;
}

std::optional<double> ClassStats::mean(const std::optional<std::string>& label, std::size_t numeric_column) const {
    if (const auto* e = entry(label); e && numeric_column < e->means.size() && e->means[numeric_column]) {
        return e->means[numeric_column];
    }
    if (numeric_column < pooled_.means.size()) {
        return pooled_.means[numeric_column];
    }
    return std::nullopt;
}

std::optional<std::string> ClassStats::mode(const std::optional<std::string>& label, const std::string& column) const {
    if (const auto* e = entry(label)) {
        if (auto it = e->modes.find(column); it != e->modes.end()) {
            return it->second;
        }
    }
    if (auto it = pooled_.modes.find(column); it != pooled_.modes.end()) {
        return it->second;
    }
    return std::nullopt;
}

std::string ClassStats::to_json() const {
    auto entry_json = [](const Entry& e) {
        json means = json::array();
        for (const auto& m : e.means) {
            means.push_back(m ? json(*m) : json(nullptr));
        }
        return json{{"means", means}, {"modes", e.modes}};
    };
    json classes = json::object();
    for (const auto& [label, e] : by_class_) {
        classes[label] = entry_json(e);
    }
    return json{{"pooled", entry_json(pooled_)}, {"classes", classes}}.dump();
}

ClassStats ClassStats::from_json(std::string_view text) {
    const auto doc = parse_json(text, "class stats");
    return json_guard("class stats", [&] {
        auto read_entry = [](const json& j) {
            Entry e;
            for (const auto& m : j.at("means")) {
                e.means.push_back(m.is_null() ? std::nullopt : std::optional<double>(m.get<double>()));
            }
            e.modes = j.at("modes").get<std::map<std::string, std::string>>();
            return e;
        };
        ClassStats stats;
        stats.pooled_ = read_entry(doc.at("pooled"));
        for (const auto& [label, j] : doc.at("classes").items()) {
            stats.by_class_[label] = read_entry(j);
        }
        return stats;
    });
}

// ---------------------------------------------------------------------------
// Imputation

std::vector<RawRecord> impute(std::vector<RawRecord> records, const ClassStats* stats,
                              const std::optional<std::string>& label) {
    if (records.empty()) {
        return records;
    }
    const std::size_t n = records.front().values.size();
    std::set<std::string> categorical;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].values.size() != n) {
            throw DimensionError("impute: records disagree on the number of values");
        }
        if (i > 0 && records[i].t_index <= records[i - 1].t_index) {
            throw ImputeError("impute: records must be sorted by strictly increasing t_index");
        }
        for (const auto& [name, _] : records[i].categorical) {
            categorical.insert(name);
        }
    }

    // Shared fill logic over one column accessed through `cell`.
    auto fill = [&records](auto&& cell, auto&& fallback, const std::string& what) {
        std::optional<std::size_t> first;
        for (std::size_t i = 0; i < records.size(); ++i) {
            auto& v = cell(records[i]);
            if (v) {
                if (!first) {
                    first = i;
                }
            } else if (first) {
                v = cell(records[i - 1]);
            }
        }
        if (first) {
            for (std::size_t i = 0; i < *first; ++i) {
                cell(records[i]) = cell(records[*first]);
            }
            return;
        }
        auto value = fallback();
        if (!value) {
            throw ImputeError("impute: column '" + what + "' is empty for subject '" +
                              records.front().subject_id + "' and no class statistic is available");
        }
        for (auto& r : records) {
            cell(r) = value;
        }
    };

    for (std::size_t j = 0; j < n; ++j) {
        fill([j](RawRecord& r) -> std::optional<double>& { return r.values[j]; },
             [&]() -> std::optional<double> { return stats ? stats->mean(label, j) : std::nullopt; },
             "#" + std::to_string(j));
    }
    for (const auto& name : categorical) {
        fill([&name](RawRecord& r) -> std::optional<std::string>& { return r.categorical[name]; },
             [&]() -> std::optional<std::string> { return stats ? stats->mode(label, name) : std::nullopt; },
             name);
    }
    return records;
}

// ---------------------------------------------------------------------------
// Normalizer

Normalizer::Normalizer(std::vector<FeatureRange> ranges) : ranges_(std::move(ranges)) {
    for (const auto& r : ranges_) {
        if (!std::isfinite(r.min) || !std::isfinite(r.max) || r.max < r.min) {
            throw ConfigError("normalizer: invalid range for feature '" + r.name + "'");
        }
    }
}

Normalizer Normalizer::fit(std::span<const FeatureVector> rows, std::vector<std::string> names) {
    if (rows.empty()) {
        throw CorpusError("normalizer: cannot fit on zero rows");
    }
    const std::size_t dim = rows.front().dim();
    if (!names.empty() && names.size() != dim) {
        throw DimensionError("normalizer: " + std::to_string(names.size()) + " names for dimension " +
                             std::to_string(dim));
    }
    std::vector<FeatureRange> ranges(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        ranges[d].name = names.empty() ? "f" + std::to_string(d) : names[d];
        ranges[d].min = rows.front()[d];
        ranges[d].max = rows.front()[d];
    }
    for (const auto& row : rows) {
        if (row.dim() != dim) {
            throw DimensionError("normalizer: inconsistent row dimensions");
        }
        for (std::size_t d = 0; d < dim; ++d) {
            ranges[d].min = std::min(ranges[d].min, row[d]);
            ranges[d].max = std::max(ranges[d].max, row[d]);
        }
    }
    return Normalizer(std::move(ranges));
}

FeatureVector Normalizer::apply(const FeatureVector& x) const {
    if (x.dim() != dim()) {
        throw DimensionError("normalizer: vector has dimension " + std::to_string(x.dim()) +
                             ", normalizer has " + std::to_string(dim()));
    }
    std::vector<double> out(x.dim());
    for (std::size_t d = 0; d < out.size(); ++d) {
        const auto& r = ranges_[d];
        out[d] = r.max == r.min ? 0.5 : (x[d] - r.min) / (r.max - r.min);
    }
    return FeatureVector(std::move(out));
}

FeatureVector Normalizer::invert(const FeatureVector& x) const {
    if (x.dim() != dim()) {
        throw DimensionError("normalizer: vector has dimension " + std::to_string(x.dim()) +
                             ", normalizer has " + std::to_string(dim()));
    }
    std::vector<double> out(x.dim());
    for (std::size_t d = 0; d < out.size(); ++d) {
        const auto& r = ranges_[d];
        out[d] = r.max == r.min ? r.min : r.min + x[d] * (r.max - r.min);
    }
    return FeatureVector(std::move(out));
}

std::string Normalizer::to_json() const {
    json features = json::array();
    for (const auto& r : ranges_) {
        features.push_back(json{{"name", r.name}, {"min", r.min}, {"max", r.max}});
    }
    return json{{"features", features}}.dump();
}

Normalizer Normalizer::from_json(std::string_view text) {
    const auto doc = parse_json(text, "normalizer");
    return json_guard("normalizer", [&] {
        std::vector<FeatureRange> ranges;
        for (const auto& f : doc.at("features")) {
            ranges.push_back({f.at("name").get<std::string>(), f.at("min").get<double>(), f.at("max").get<double>()});
        }
        return Normalizer(std::move(ranges));
    });
}

// ---------------------------------------------------------------------------
// Period bucketing

Period parse_period(std::string_view text) {
    if (text == "day") return Period::Day;
    if (text == "month") return Period::Month;
    if (text == "year") return Period::Year;
    throw ConfigError("unknown period '" + std::string(text) + "' (expected day, month or year)");
}

std::int64_t period_key(std::string_view timestamp, Period period) {
    auto fail = [&]() -> std::int64_t {
        throw ParseError("unparseable timestamp '" + std::string(timestamp) + "'");
    };
    unsigned year = 0, month = 1, day = 1;
    if (!parse_digits(timestamp, 0, 4, year)) {
        return fail();
    }
    std::size_t pos = 4;
    bool has_month = false, has_day = false;
    if (pos < timestamp.size() && timestamp[pos] == '-') {
        if (!parse_digits(timestamp, pos + 1, 2, month)) {
            return fail();
        }
        has_month = true;
        pos += 3;
        if (pos < timestamp.size() && timestamp[pos] == '-') {
            if (!parse_digits(timestamp, pos + 1, 2, day)) {
                return fail();
            }
            has_day = true;
            pos += 3;
        }
    }
    if (pos < timestamp.size() && timestamp[pos] != 'T' && timestamp[pos] != ' ') {
        return fail();
    }
    if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) {
        return fail();
    }
    switch (period) {
    case Period::Year:
        return year;
    case Period::Month:
        if (!has_month) {
            return fail();
        }
        return static_cast<std::int64_t>(year) * 12 + (month - 1);
    case Period::Day:
        if (!has_day) {
            return fail();
        }
        return days_from_civil(year, month, day);
    }
    return fail();
}

std::vector<RawRecord> group_by(std::span<const TimestampedRecord> records, Period period) {
    if (records.empty()) {
        return {};
    }
    const std::size_t n = records.front().values.size();
    std::map<std::pair<std::string, std::int64_t>, Accumulator> groups;
    for (const auto& r : records) {
        if (r.values.size() != n) {
            throw DimensionError("group_by: records disagree on the number of values");
        }
        auto& acc = groups[{r.subject_id, period_key(r.timestamp, period)}];
        if (acc.sums.empty()) {
            acc.sums.assign(n, 0.0);
            acc.counts.assign(n, 0);
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (r.values[j]) {
                acc.sums[j] += *r.values[j];
                ++acc.counts[j];
            }
        }
        for (const auto& [name, value] : r.categorical) {
            auto& counts = acc.categories[name];
            if (value) {
                ++counts[*value];
            }
        }
    }

    std::vector<RawRecord> out;
    out.reserve(groups.size());
    for (const auto& [key, acc] : groups) {
        RawRecord rec;
        rec.subject_id = key.first;
        rec.t_index = key.second;
        rec.values.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            if (acc.counts[j] > 0) {
                rec.values[j] = acc.sums[j] / static_cast<double>(acc.counts[j]);
            }
        }
        for (const auto& [name, counts] : acc.categories) {
            rec.categorical[name] = counts.empty() ? std::nullopt : std::optional(most_frequent(counts));
        }
        out.push_back(std::move(rec));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trajectory tables

std::vector<std::size_t> feature_columns(const CsvTable& table, std::span<const std::string_view> reserved) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (std::find(reserved.begin(), reserved.end(), table.header[i]) == reserved.end()) {
            out.push_back(i);
        }
    }
    return out;
}

FeatureSchema infer_schema(const CsvTable& table, std::span<const std::size_t> feature_cols) {
    std::vector<ColumnSpec> columns;
    for (auto c : feature_cols) {
        ColumnSpec spec{table.header.at(c), ColumnKind::Numeric, {}};
        std::set<std::string> categories;
        bool numeric = true;
        for (const auto& row : table.rows) {
            const auto& cell = row[c];
            if (cell.empty()) {
                continue;
            }
            categories.insert(cell);
            numeric = numeric && parse_number(cell).has_value();
        }
        if (!numeric) {
            spec.kind = ColumnKind::Categorical;
            spec.categories.assign(categories.begin(), categories.end());
        }
        columns.push_back(std::move(spec));
    }
    return FeatureSchema(std::move(columns));
}

RecordSet read_trajectory_table(const CsvTable& table, const FeatureSchema* schema, Period period) {
    const auto subject_col = table.column("subject_id");
    const auto t_col = table.column("t");
    const auto label_col = table.find("label");
    static constexpr std::string_view kReserved[] = {"subject_id", "t", "label"};
    const auto feature_cols = feature_columns(table, kReserved);

    RecordSet set;
    if (schema) {
        const auto expected = schema->column_names();
        if (expected.size() != feature_cols.size()) {
            throw DimensionError(table.source + ": dimension mismatch: table has " +
                                 std::to_string(feature_cols.size()) + " feature columns, expected " +
                                 std::to_string(expected.size()));
        }
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (table.header[feature_cols[i]] != expected[i]) {
                throw DimensionError(table.source + ": feature column " + std::to_string(i) + " is '" +
                                     table.header[feature_cols[i]] + "', expected '" + expected[i] + "'");
            }
        }
        set.schema = *schema;
    } else {
        set.schema = infer_schema(table, feature_cols);
    }

    bool integer_time = true;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cell = table.rows[r][t_col];
        if (cell.empty()) {
            throw ParseError(table.source + ": row " + std::to_string(r + 1) + ", column t: empty time value");
        }
        integer_time = integer_time && parse_integer(cell).has_value();
    }

    // Row -> (numeric values, categorical values) per schema.
    const auto& columns = set.schema.columns();
    auto read_row = [&](std::size_t r, std::vector<std::optional<double>>& values,
                        std::map<std::string, std::optional<std::string>>& categorical) {
        const auto& row = table.rows[r];
        for (std::size_t i = 0; i < columns.size(); ++i) {
            const auto& cell = row[feature_cols[i]];
            if (columns[i].kind == ColumnKind::Categorical) {
                categorical[columns[i].name] = cell.empty() ? std::nullopt : std::optional(cell);
                continue;
            }
            if (cell.empty()) {
                values.emplace_back();
                continue;
            }
            auto v = parse_number(cell);
            if (!v) {
                throw ParseError(table.source + ": row " + std::to_string(r + 1) + ", column " +
                                 columns[i].name + ": not a number: '" + cell + "'");
            }
            values.push_back(v);
        }
    };

    std::map<std::string, std::vector<RawRecord>> by_subject;
    std::map<std::string, std::pair<std::int64_t, std::size_t>> last_row; // max (t, row) per subject
    std::vector<TimestampedRecord> stamped;

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto& subject = row[subject_col];
        if (subject.empty()) {
            throw ParseError(table.source + ": row " + std::to_string(r + 1) + ", column subject_id: empty");
        }
        std::vector<std::optional<double>> values;
        std::map<std::string, std::optional<std::string>> categorical;
        read_row(r, values, categorical);

        const std::int64_t t = integer_time ? *parse_integer(row[t_col]) : period_key(row[t_col], period);
        if (auto it = last_row.find(subject); it == last_row.end() || std::pair{t, r} > it->second) {
            last_row[subject] = {t, r};
        }
        if (integer_time) {
            by_subject[subject].push_back({subject, t, std::move(values), std::move(categorical)});
        } else {
            stamped.push_back({subject, row[t_col], std::move(values), std::move(categorical)});
        }
    }
    if (!integer_time) {
        for (auto& rec : group_by(stamped, period)) {
            by_subject[rec.subject_id].push_back(std::move(rec));
        }
    }

    for (auto& [subject, records] : by_subject) {
        std::stable_sort(records.begin(), records.end(),
                         [](const RawRecord& a, const RawRecord& b) { return a.t_index < b.t_index; });
        for (std::size_t i = 1; i < records.size(); ++i) {
            if (records[i].t_index == records[i - 1].t_index) {
                throw ParseError(table.source + ": subject " + subject + " has duplicate t " +
                                 std::to_string(records[i].t_index));
            }
        }
        SubjectRecords s{subject, std::nullopt, std::move(records)};
        if (label_col) {
            const auto& label = table.rows[last_row[subject].second][*label_col];
            if (!label.empty()) {
                s.label = label;
            }
        }
        set.subjects.push_back(std::move(s));
    }
    return set;
}

Trajectory build_trajectory(const SubjectRecords& subject, const FeatureSchema& schema,
                            const ClassStats* stats, const Normalizer* normalizer) {
    auto records = impute(subject.records, stats, subject.label);
    std::vector<TrajectoryPoint> points;
    points.reserve(records.size());
    for (const auto& r : records) {
        auto x = schema.encode(r);
        if (normalizer) {
            x = normalizer->apply(x);
        }
        points.push_back({r.t_index, std::move(x)});
    }
    return Trajectory(subject.subject_id, std::move(points), subject.label);
}

} // namespace trace
