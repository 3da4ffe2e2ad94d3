#pragma once

#include "trace/csv.hpp"
#include "trace/kd_tree.hpp"
#include "trace/pipeline.hpp"
#include "trace/scoring.hpp"

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trace {

struct LabeledPoint {
    FeatureVector x;
    std::string label;
};

/// Labelled reference points with one exact nearest-neighbour index per
/// class. Immutable after construction.
class Corpus {
public:
    /// Throws CorpusError on an empty input or a declared class with no rows.
    static Corpus build(std::vector<LabeledPoint> rows, std::span<const std::string> declared_classes = {},
                        std::optional<Normalizer> normalizer = std::nullopt);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return rows_.size(); }
    const std::vector<LabeledPoint>& rows() const noexcept { return rows_; }
    std::vector<std::string> classes() const;
    bool has_class(const std::string& label) const { return by_class_.contains(label); }
    std::size_t class_size(const std::string& label) const;
    const std::optional<Normalizer>& normalizer() const noexcept { return normalizer_; }

    struct Match {
        const LabeledPoint* row;
        double distance_sq;
    };
    /// k nearest points of one class, ordered by distance then insertion order.
    std::vector<Match> nearest(const std::string& label, const FeatureVector& x, std::size_t k,
                               std::span<const double> weights = {}) const;

private:
    struct ClassIndex {
        std::vector<std::size_t> members; // row positions, insertion order
        KdTree tree;
    };

    std::size_t dim_ = 0;
    std::vector<LabeledPoint> rows_;
    std::map<std::string, ClassIndex> by_class_;
    std::optional<Normalizer> normalizer_;
};

inline Corpus build_index(std::vector<LabeledPoint> rows, std::span<const std::string> declared_classes = {}) {
    return Corpus::build(std::move(rows), declared_classes);
}

using WarningHandler = std::function<void(const std::string&)>;
using PolarityMap = std::map<std::string, Polarity>;

/// The k nearest corpus points of every class in `polarity`, tagged with the
/// class polarity. k larger than a class clamps to the class size (and warns).
std::vector<TargetSpec> knn_targets(const Corpus& corpus, const FeatureVector& x, std::size_t k,
                                    const PolarityMap& polarity, std::span<const double> weights = {},
                                    const WarningHandler& warn = {});

/// A fixed target point per time index.
struct TargetSeries {
    std::string class_label;
    Polarity polarity = Polarity::Desirable;
    std::map<std::int64_t, FeatureVector> points;
};

/// One target per series at time `t`. Throws TargetError when the list is
/// empty or some series has no point at `t`.
std::vector<TargetSpec> fixed_targets(std::span<const TargetSeries> series, std::int64_t t);

class KnnTargetProvider final : public TargetProvider {
public:
    KnnTargetProvider(const Corpus& corpus, std::size_t k, PolarityMap polarity,
                      std::vector<double> weights = {}, WarningHandler warn = {});

    std::vector<TargetSpec> targets_for(const FeatureVector& x_t, std::int64_t t_index) const override;

private:
    const Corpus& corpus_;
    std::size_t k_;
    PolarityMap polarity_;
    std::vector<double> weights_;
    WarningHandler warn_;
};

class FixedTargetProvider final : public TargetProvider {
public:
    explicit FixedTargetProvider(std::vector<TargetSeries> series);

    std::vector<TargetSpec> targets_for(const FeatureVector& x_t, std::int64_t t_index) const override;
    const std::vector<TargetSeries>& series() const noexcept { return series_; }

private:
    std::vector<TargetSeries> series_;
};

/// Everything needed to score trajectories against a labelled corpus:
/// raw column schema, imputation statistics and the normalized corpus.
struct CorpusIndex {
    FeatureSchema schema;
    ClassStats stats;
    Corpus corpus;
};

/// Reads a corpus table (feature columns plus a `label` column): imputes
/// missing cells with class means/modes, one-hot encodes, fits a min-max
/// normalizer and builds the per-class indices.
CorpusIndex corpus_from_table(const CsvTable& table);

std::string save_index(const CorpusIndex& index);
CorpusIndex load_index(std::string_view text);

/// Reads a target series table (`t` plus feature columns). Missing cells
/// are forward/backward filled.
TargetSeries series_from_table(const CsvTable& table, std::string class_label, Polarity polarity,
                               const FeatureSchema& schema, Period period = Period::Month);

} // namespace trace
