#pragma once

#include "config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace trace::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInput = 2;

struct BuildIndexRequest {
    std::filesystem::path corpus_csv;
    std::filesystem::path out_index;
};

/// Writes the index and a sibling `<stem>.normalizer.json`; prints class counts.
int cmd_build_index(const BuildIndexRequest& request, std::ostream& out, std::ostream& err);

struct ScoreRequest {
    std::filesystem::path trajectories_csv;
    std::optional<std::filesystem::path> index;
    std::optional<std::filesystem::path> targets_dir;
    std::filesystem::path out_dir;
    RunConfig config;
    bool per_feature = false;
    unsigned threads = 0; // 0: hardware concurrency
};

/// Outputs in `out_dir`: steps.jsonl, summary.csv, summary_<label>.csv,
/// wide.csv, wide_cumulative.csv, errors.csv, plus features.csv with
/// `per_feature` and rankings.csv in fixed-series mode.
int cmd_score(const ScoreRequest& request, std::ostream& out, std::ostream& err);

/// Welch's t-test on the `average` column of two summary files; JSON on `out`.
int cmd_compare(const std::filesystem::path& a, const std::filesystem::path& b, std::ostream& out,
                std::ostream& err);

struct DemoRequest {
    std::string scenario; // toy | icu | ssp
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
    Overrides overrides;
    std::size_t cohort_size = 500; // icu: subjects per outcome group
};

int cmd_demo(const DemoRequest& request, std::ostream& out, std::ostream& err);

} // namespace trace::cli
