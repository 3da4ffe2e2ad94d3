#include "trace/targets.hpp"

#include "trace/error.hpp"

#include <json.hpp>

namespace trace {

using nlohmann::json;

Corpus Corpus::build(std::vector<LabeledPoint> rows, std::span<const std::string> declared_classes,
                     std::optional<Normalizer> normalizer) {
    if (rows.empty()) {
        throw CorpusError("corpus is empty");
    }
    Corpus corpus;
    corpus.dim_ = rows.front().x.dim();
    corpus.rows_ = std::move(rows);
    corpus.normalizer_ = std::move(normalizer);
    if (corpus.normalizer_ && corpus.normalizer_->dim() != corpus.dim_) {
        throw DimensionError("corpus normalizer dimension does not match corpus points");
    }

    for (std::size_t i = 0; i < corpus.rows_.size(); ++i) {
        const auto& row = corpus.rows_[i];
        if (row.x.dim() != corpus.dim_) {
            throw DimensionError("corpus row " + std::to_string(i + 1) + " has dimension " +
                                 std::to_string(row.x.dim()) + ", expected " + std::to_string(corpus.dim_));
        }
        if (row.label.empty()) {
            throw CorpusError("corpus row " + std::to_string(i + 1) + " has an empty label");
        }
        corpus.by_class_[row.label].members.push_back(i);
    }
    for (const auto& declared : declared_classes) {
        if (!corpus.by_class_.contains(declared)) {
            throw CorpusError("class '" + declared + "' has no corpus rows");
        }
    }
    for (auto& [label, index] : corpus.by_class_) {
        std::vector<FeatureVector> points;
        points.reserve(index.members.size());
        for (auto i : index.members) {
            points.push_back(corpus.rows_[i].x);
        }
        index.tree = KdTree(points);
    }
    return corpus;
}

std::vector<std::string> Corpus::classes() const {
    std::vector<std::string> out;
    for (const auto& [label, _] : by_class_) {
        out.push_back(label);
    }
    return out;
}

std::size_t Corpus::class_size(const std::string& label) const {
    auto it = by_class_.find(label);
    return it == by_class_.end() ? 0 : it->second.members.size();
}

std::vector<Corpus::Match> Corpus::nearest(const std::string& label, const FeatureVector& x, std::size_t k,
                                           std::span<const double> weights) const {
    auto it = by_class_.find(label);
    if (it == by_class_.end()) {
        throw ConfigError("class '" + label + "' is not in the corpus");
    }
    if (x.dim() != dim_) {
        throw DimensionError("query has dimension " + std::to_string(x.dim()) + ", corpus has " +
                             std::to_string(dim_));
    }
    std::vector<Match> out;
    for (const auto& n : it->second.tree.nearest(x.values(), k, weights)) {
        out.push_back({&rows_[it->second.members[n.index]], n.distance_sq});
    }
    return out;
}

std::vector<TargetSpec> knn_targets(const Corpus& corpus, const FeatureVector& x, std::size_t k,
                                    const PolarityMap& polarity, std::span<const double> weights,
                                    const WarningHandler& warn) {
    if (k == 0) {
        throw ConfigError("k must be at least 1");
    }
    if (polarity.empty()) {
        throw ConfigError("polarity map is empty; no target classes selected");
    }
    std::vector<TargetSpec> out;
    for (const auto& [label, pol] : polarity) {
        if (!corpus.has_class(label)) {
            throw ConfigError("polarity map names class '" + label + "' which is not in the corpus");
        }
        const auto size = corpus.class_size(label);
        if (k > size && warn) {
            warn("k=" + std::to_string(k) + " exceeds size of class '" + label + "' (" + std::to_string(size) +
                 "); using " + std::to_string(size));
        }
        for (const auto& m : corpus.nearest(label, x, k, weights)) {
            out.push_back({m.row->x, label, pol, 1.0});
        }
    }
    return out;
}

std::vector<TargetSpec> fixed_targets(std::span<const TargetSeries> series, std::int64_t t) {
    if (series.empty()) {
        throw TargetError("no target series supplied");
    }
    std::vector<TargetSpec> out;
    out.reserve(series.size());
    for (const auto& s : series) {
        auto it = s.points.find(t);
        if (it == s.points.end()) {
            throw TargetError("target series '" + s.class_label + "' has no point at t=" + std::to_string(t));
        }
        out.push_back({it->second, s.class_label, s.polarity, 1.0});
    }
    return out;
}

KnnTargetProvider::KnnTargetProvider(const Corpus& corpus, std::size_t k, PolarityMap polarity,
                                     std::vector<double> weights, WarningHandler warn)
    : corpus_(corpus), k_(k), polarity_(std::move(polarity)), weights_(std::move(weights)), warn_(std::move(warn)) {
    if (k_ == 0) {
        throw ConfigError("k must be at least 1");
    }
    if (polarity_.empty()) {
        throw ConfigError("polarity map is empty; no target classes selected");
    }
    for (const auto& [label, _] : polarity_) {
        if (!corpus_.has_class(label)) {
            throw ConfigError("polarity map names class '" + label + "' which is not in the corpus");
        }
    }
}

std::vector<TargetSpec> KnnTargetProvider::targets_for(const FeatureVector& x_t, std::int64_t) const {
    return knn_targets(corpus_, x_t, k_, polarity_, weights_, warn_);
}

FixedTargetProvider::FixedTargetProvider(std::vector<TargetSeries> series) : series_(std::move(series)) {
    if (series_.empty()) {
        throw TargetError("no target series supplied");
    }
}

std::vector<TargetSpec> FixedTargetProvider::targets_for(const FeatureVector&, std::int64_t t_index) const {
    return fixed_targets(series_, t_index);
}

// ---------------------------------------------------------------------------
// Corpus tables and persistence

CorpusIndex corpus_from_table(const CsvTable& table) {
    const auto label_col = table.column("label");
    if (table.rows.empty()) {
        throw CorpusError(table.source + ": corpus has no rows");
    }
    const std::string_view reserved[] = {"label"};
    const auto feature_cols = feature_columns(table, reserved);
    if (feature_cols.empty()) {
        throw ParseError(table.source + ": corpus has no feature columns");
    }
    auto schema = infer_schema(table, feature_cols);
    const auto& columns = schema.columns();

    std::vector<RawRecord> records;
    std::vector<std::optional<std::string>> labels;
    records.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row[label_col].empty()) {
            throw ParseError(table.source + ": row " + std::to_string(r + 1) + ", column label: empty");
        }
        RawRecord rec;
        rec.subject_id = row[label_col];
        rec.t_index = static_cast<std::int64_t>(r);
        for (std::size_t i = 0; i < columns.size(); ++i) {
            const auto& cell = row[feature_cols[i]];
            if (columns[i].kind == ColumnKind::Categorical) {
                rec.categorical[columns[i].name] = cell.empty() ? std::nullopt : std::optional(cell);
            } else if (cell.empty()) {
                rec.values.emplace_back();
            } else {
                // infer_schema guarantees numeric cells parse.
                rec.values.push_back(parse_number(cell));
            }
        }
        labels.emplace_back(row[label_col]);
        records.push_back(std::move(rec));
    }

    auto stats = ClassStats::compute(records, labels, schema);
    std::vector<FeatureVector> encoded;
    encoded.reserve(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        auto& rec = records[r];
        std::size_t numeric = 0;
        for (const auto& c : columns) {
            if (c.kind == ColumnKind::Numeric) {
                auto& v = rec.values[numeric];
                if (!v) {
                    v = stats.mean(labels[r], numeric);
                }
                if (!v) {
                    throw CorpusError(table.source + ": column " + c.name + " has no values");
                }
                ++numeric;
            } else {
                auto& v = rec.categorical[c.name];
                if (!v) {
                    v = stats.mode(labels[r], c.name);
                }
                if (!v) {
                    throw CorpusError(table.source + ": column " + c.name + " has no values");
                }
            }
        }
        encoded.push_back(schema.encode(rec));
    }

    auto normalizer = Normalizer::fit(encoded, schema.encoded_names());
    std::vector<LabeledPoint> points;
    points.reserve(encoded.size());
    for (std::size_t r = 0; r < encoded.size(); ++r) {
        points.push_back({normalizer.apply(encoded[r]), *labels[r]});
    }
    auto corpus = Corpus::build(std::move(points), {}, std::move(normalizer));
    return {std::move(schema), std::move(stats), std::move(corpus)};
}

std::string save_index(const CorpusIndex& index) {
    json points = json::array();
    for (const auto& row : index.corpus.rows()) {
        points.push_back(json{{"label", row.label}, {"x", std::vector<double>(row.x.values().begin(), row.x.values().end())}});
    }
    json doc = {
        {"format", "trace-corpus-index"},
        {"version", 1},
        {"schema", json::parse(index.schema.to_json())},
        {"class_stats", json::parse(index.stats.to_json())},
        {"normalizer", index.corpus.normalizer() ? json::parse(index.corpus.normalizer()->to_json()) : json(nullptr)},
        {"points", std::move(points)},
    };
    return doc.dump() + "\n";
}

CorpusIndex load_index(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("index: invalid JSON: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != "trace-corpus-index" || doc.at("version").get<int>() != 1) {
            throw ParseError("index: unsupported format or version");
        }
        auto schema = FeatureSchema::from_json(doc.at("schema").dump());
        auto stats = ClassStats::from_json(doc.at("class_stats").dump());
        std::optional<Normalizer> normalizer;
        if (!doc.at("normalizer").is_null()) {
            normalizer = Normalizer::from_json(doc.at("normalizer").dump());
        }
        std::vector<LabeledPoint> points;
        for (const auto& p : doc.at("points")) {
            points.push_back({FeatureVector(p.at("x").get<std::vector<double>>()), p.at("label").get<std::string>()});
        }
        auto corpus = Corpus::build(std::move(points), {}, std::move(normalizer));
        if (corpus.dim() != schema.encoded_dim()) {
            throw ParseError("index: point dimension does not match schema");
        }
        return {std::move(schema), std::move(stats), std::move(corpus)};
    } catch (const json::exception& e) {
        throw ParseError(std::string("index: ") + e.what());
    }
}

TargetSeries series_from_table(const CsvTable& table, std::string class_label, Polarity polarity,
                               const FeatureSchema& schema, Period period) {
    if (table.find("label") || table.find("subject_id")) {
        throw ParseError(table.source + ": target series must not carry label or subject_id columns");
    }
    // Reuse the trajectory reader with every row under one synthetic subject.
    CsvTable as_trajectory;
    as_trajectory.source = table.source;
    as_trajectory.header.push_back("subject_id");
    as_trajectory.header.insert(as_trajectory.header.end(), table.header.begin(), table.header.end());
    for (const auto& row : table.rows) {
        std::vector<std::string> cells{class_label};
        cells.insert(cells.end(), row.begin(), row.end());
        as_trajectory.rows.push_back(std::move(cells));
    }
    auto set = read_trajectory_table(as_trajectory, &schema, period);
    TargetSeries series{std::move(class_label), polarity, {}};
    if (set.subjects.empty()) {
        throw TargetError(table.source + ": target series has no rows");
    }
    for (auto& rec : impute(std::move(set.subjects.front().records), nullptr, std::nullopt)) {
        series.points.emplace(rec.t_index, schema.encode(rec));
    }
    return series;
}

} // namespace trace
