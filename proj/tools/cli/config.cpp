#include "config.hpp"

#include <trace/csv.hpp>
#include <trace/error.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace trace::cli {

using nlohmann::json;

const char* to_string(Mode m) noexcept { return m == Mode::CorpusKnn ? "corpus_knn" : "fixed_series"; }

RunConfig RunConfig::from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("config: top level must be an object");
    }
    static const std::set<std::string> kKnown = {"lambda", "k_neighbors", "epsilon", "polarity",
                                                 "feature_weights", "mode", "period"};
    for (const auto& [key, _] : doc.items()) {
        if (!kKnown.contains(key)) {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }

    RunConfig cfg;
    try {
        if (doc.contains("lambda")) cfg.lambda = doc["lambda"].get<double>();
        if (doc.contains("k_neighbors")) {
            const auto k = doc["k_neighbors"].get<long long>();
            if (k < 1) throw ConfigError("config: k_neighbors must be a positive integer");
            cfg.k_neighbors = static_cast<std::size_t>(k);
        }
        if (doc.contains("epsilon")) cfg.epsilon = doc["epsilon"].get<double>();
        if (doc.contains("polarity")) {
            for (const auto& [label, value] : doc["polarity"].items()) {
                cfg.polarity[label] = parse_polarity(value.get<std::string>());
            }
        }
        if (doc.contains("feature_weights")) {
            cfg.feature_weights = doc["feature_weights"].get<std::map<std::string, double>>();
        }
        if (doc.contains("mode")) {
            const auto mode = doc["mode"].get<std::string>();
            if (mode == "corpus_knn") {
                cfg.mode = Mode::CorpusKnn;
            } else if (mode == "fixed_series") {
                cfg.mode = Mode::FixedSeries;
            } else {
                throw ConfigError("config: unknown mode '" + mode + "'");
            }
        }
        if (doc.contains("period")) cfg.period = parse_period(doc["period"].get<std::string>());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw ConfigError("config: lambda must lie in [0, 1]");
    }
    if (k_neighbors < 1) {
        throw ConfigError("config: k_neighbors must be at least 1");
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw ConfigError("config: epsilon must be a positive real");
    }
    for (const auto& [name, w] : feature_weights) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw ConfigError("config: feature weight for '" + name + "' must be positive");
        }
    }
}

std::string RunConfig::describe() const {
    std::ostringstream out;
    out << "lambda=" << format_number(lambda) << " k=" << k_neighbors << " epsilon=" << format_number(epsilon);
    if (mode) {
        out << " mode=" << to_string(*mode);
    }
    for (const auto& [label, p] : polarity) {
        out << " " << label << ":" << trace::to_string(p);
    }
    if (!feature_weights.empty()) {
        out << " feature_weights=" << feature_weights.size();
    }
    return out.str();
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& file, const Overrides& flags,
                         std::ostream& log) {
    RunConfig cfg;
    if (file) {
        std::ifstream in(*file);
        if (!in) {
            throw ConfigError("config: cannot open " + file->string());
        }
        std::ostringstream text;
        text << in.rdbuf();
        cfg = RunConfig::from_json(text.str());
        log << "config file " << file->string() << ": " << cfg.describe() << "\n";
    } else {
        log << "config defaults: " << cfg.describe() << "\n";
    }
    if (flags.lambda) {
        log << "flag override: lambda=" << format_number(*flags.lambda) << "\n";
        cfg.lambda = *flags.lambda;
    }
    if (flags.k_neighbors) {
        log << "flag override: k=" << *flags.k_neighbors << "\n";
        cfg.k_neighbors = *flags.k_neighbors;
    }
    if (flags.epsilon) {
        log << "flag override: epsilon=" << format_number(*flags.epsilon) << "\n";
        cfg.epsilon = *flags.epsilon;
    }
    cfg.validate();
    return cfg;
}

std::vector<double> resolve_weights(const RunConfig& config, const FeatureSchema& schema) {
    if (config.feature_weights.empty()) {
        return {};
    }
    std::vector<double> weights;
    std::set<std::string> used;
    for (const auto& column : schema.columns()) {
        const std::size_t slots = column.kind == ColumnKind::Numeric ? 1 : column.categories.size();
        double w = 1.0;
        if (auto it = config.feature_weights.find(column.name); it != config.feature_weights.end()) {
            w = it->second;
            used.insert(column.name);
        }
        weights.insert(weights.end(), slots, w);
    }
    for (const auto& [name, _] : config.feature_weights) {
        if (!used.contains(name)) {
            throw ConfigError("config: feature weight names unknown feature '" + name + "'");
        }
    }
    return weights;
}

} // namespace trace::cli
