#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace trace::cli {

/// Input files written for one synthetic scenario.
struct ScenarioFiles {
    std::filesystem::path trajectories;
    std::filesystem::path config;
    std::optional<std::filesystem::path> corpus;      // toy, icu
    std::optional<std::filesystem::path> targets_dir; // ssp
};

/// Seeded synthetic datasets:
///   toy -- three 2-D classes, one factual path stepping first towards the
///          undesired class, then towards the desired one;
///   icu -- 17-feature two-outcome cohort (cohort_size improving and
///          cohort_size deteriorating stays) with gaps and static features;
///   ssp -- 5 features, twice-monthly records over 2015-2022 and five fixed
///          monthly target series.
/// Throws ConfigError for an unknown scenario name.
ScenarioFiles generate_scenario(const std::string& scenario, std::uint64_t seed,
                                const std::filesystem::path& dir, std::size_t cohort_size = 500);

} // namespace trace::cli
