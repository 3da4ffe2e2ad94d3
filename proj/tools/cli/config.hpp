#pragma once

#include <trace/pipeline.hpp>
#include <trace/targets.hpp>

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace trace::cli {

enum class Mode { CorpusKnn, FixedSeries };

const char* to_string(Mode m) noexcept;

/// Run parameters. Loaded from a JSON object whose keys are exactly the
/// fields below (unknown keys are rejected):
///   lambda, k_neighbors, epsilon, polarity {class: "desirable"|"undesirable"},
///   feature_weights {feature: weight}, mode "corpus_knn"|"fixed_series",
///   period "day"|"month"|"year".
struct RunConfig {
    double lambda = 0.9;
    std::size_t k_neighbors = 3;
    double epsilon = kDefaultEpsilon;
    PolarityMap polarity;
    std::map<std::string, double> feature_weights;
    std::optional<Mode> mode;
    Period period = Period::Month;

    static RunConfig from_json(std::string_view text);
    void validate() const;
    std::string describe() const;
};

struct Overrides {
    std::optional<double> lambda;
    std::optional<std::size_t> k_neighbors;
    std::optional<double> epsilon;
};

/// Config file (if any) with flag overrides applied on top; both are logged.
RunConfig resolve_config(const std::optional<std::filesystem::path>& file, const Overrides& flags,
                         std::ostream& log);

/// Per-dimension weights in encoded order; empty when none were configured.
/// A weight named after a categorical column applies to all its one-hot slots.
std::vector<double> resolve_weights(const RunConfig& config, const FeatureSchema& schema);

} // namespace trace::cli
