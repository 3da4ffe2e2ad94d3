#include "commands.hpp"
#include "config.hpp"
#include "demo.hpp"

#include <trace/analytics.hpp>
#include <trace/csv.hpp>
#include <trace/error.hpp>
#include <trace/targets.hpp>

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

namespace trace::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("trace_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& text) {
        const auto path = dir_ / name;
        fs::create_directories(path.parent_path());
        std::ofstream(path, std::ios::binary) << text;
        return path;
    }
    static std::string read(const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }
    static std::size_t lines(const fs::path& path) {
        const auto text = read(path);
        return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

const char* kCorpus = "a,b,label\n0,0,good\n0.1,0,good\n0,0.1,good\n1,1,bad\n0.9,1,bad\n1,0.9,bad\n";
const char* kConfig = R"({"k_neighbors":2,"polarity":{"good":"desirable","bad":"undesirable"}})";

TEST_F(CliTest, BuildIndexPrintsClassCounts) {
    const auto corpus = write("corpus.csv", kCorpus);
    EXPECT_EQ(cmd_build_index({corpus, dir_ / "out" / "corpus.idx"}, out_, err_), kExitOk);
    EXPECT_NE(out_.str().find("class bad: 3"), std::string::npos);
    EXPECT_NE(out_.str().find("class good: 3"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir_ / "out" / "corpus.idx"));
    const auto norm = Normalizer::from_json(read(dir_ / "out" / "corpus.normalizer.json"));
    EXPECT_EQ(norm.dim(), 2u);
}

TEST_F(CliTest, BuildIndexMissingLabel) {
    const auto corpus = write("corpus.csv", "a,b\n1,2\n");
    EXPECT_EQ(cmd_build_index({corpus, dir_ / "x.idx"}, out_, err_), kExitInput);
    EXPECT_NE(err_.str().find("missing column: label"), std::string::npos);
}

TEST_F(CliTest, BuildIndexEmptyFile) {
    const auto corpus = write("corpus.csv", "");
    EXPECT_EQ(cmd_build_index({corpus, dir_ / "x.idx"}, out_, err_), kExitInput);
}

TEST_F(CliTest, BuildIndexRaggedRowNamesRow) {
    const auto corpus = write("corpus.csv", "a,label\n1,x\n2\n");
    EXPECT_EQ(cmd_build_index({corpus, dir_ / "x.idx"}, out_, err_), kExitInput);
    EXPECT_NE(err_.str().find("row 2"), std::string::npos);
}

ScoreRequest corpus_request(const fs::path& trajectories, const fs::path& index, const fs::path& out) {
    ScoreRequest r;
    r.trajectories_csv = trajectories;
    r.index = index;
    r.out_dir = out;
    r.config = RunConfig::from_json(kConfig);
    r.threads = 2;
    return r;
}

TEST_F(CliTest, ScoreCorpusModeMatchesLibrary) {
    const auto corpus = write("corpus.csv", kCorpus);
    const auto traj = write("traj.csv",
                            "subject_id,t,a,b,label\n"
                            "p,0,0.5,0.5,\np,1,0.3,0.4,\np,2,0.1,0.1,good\n"
                            "q,0,0.5,0.5,\nq,1,0.7,0.8,bad\n");
    ASSERT_EQ(cmd_build_index({corpus, dir_ / "c.idx"}, out_, err_), kExitOk);
    ASSERT_EQ(cmd_score(corpus_request(traj, dir_ / "c.idx", dir_ / "out"), out_, err_), kExitOk) << err_.str();

    // Same run through the library.
    const auto index = load_index(read(dir_ / "c.idx"));
    const auto set = read_trajectory_table(read_csv_file(traj), &index.schema);
    const KnnTargetProvider provider(index.corpus, 2,
                                     {{"good", Polarity::Desirable}, {"bad", Polarity::Undesirable}});
    std::ostringstream expected;
    for (const auto& subject : set.subjects) {
        const auto t = build_trajectory(subject, index.schema, &index.stats, &*index.corpus.normalizer());
        write_step_jsonl(expected, score_trajectory(t, provider, 0.9));
    }
    EXPECT_EQ(read(dir_ / "out" / "steps.jsonl"), expected.str());
    EXPECT_NE(expected.str().find("\"desirable\""), std::string::npos);
    EXPECT_NE(expected.str().find("\"undesirable\""), std::string::npos);

    const auto summary = read_csv_file(dir_ / "out" / "summary.csv");
    ASSERT_EQ(summary.rows.size(), 2u);
    EXPECT_EQ(summary.rows[0][summary.column("label")], "good");
    EXPECT_EQ(summary.rows[0][summary.column("scored")], "2");
    EXPECT_TRUE(fs::exists(dir_ / "out" / "summary_good.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "out" / "summary_bad.csv"));
    EXPECT_EQ(lines(dir_ / "out" / "errors.csv"), 1u);
    EXPECT_EQ(read_csv_file(dir_ / "out" / "wide.csv").header, (std::vector<std::string>{"t", "p", "q"}));
}

TEST_F(CliTest, ScoreRecordsPerSubjectErrors) {
    const auto corpus = write("corpus.csv", kCorpus);
    const auto traj = write("traj.csv", "subject_id,t,a,b\nlonely,0,0.5,0.5\nok,0,0.5,0.5\nok,1,0.2,0.2\n");
    ASSERT_EQ(cmd_build_index({corpus, dir_ / "c.idx"}, out_, err_), kExitOk);
    EXPECT_EQ(cmd_score(corpus_request(traj, dir_ / "c.idx", dir_ / "out"), out_, err_), kExitOk);
    const auto errors = read_csv_file(dir_ / "out" / "errors.csv");
    ASSERT_EQ(errors.rows.size(), 1u);
    EXPECT_EQ(errors.rows[0][0], "lonely");
    EXPECT_EQ(read_csv_file(dir_ / "out" / "summary.csv").rows.size(), 1u);
}

TEST_F(CliTest, ScoreDimensionMismatch) {
    const auto corpus = write("corpus.csv", kCorpus);
    const auto traj = write("traj.csv", "subject_id,t,a,b,c\np,0,1,1,1\np,1,2,2,2\n");
    ASSERT_EQ(cmd_build_index({corpus, dir_ / "c.idx"}, out_, err_), kExitOk);
    EXPECT_EQ(cmd_score(corpus_request(traj, dir_ / "c.idx", dir_ / "out"), out_, err_), kExitInput);
    EXPECT_NE(err_.str().find("3 feature columns, expected 2"), std::string::npos);
}

TEST_F(CliTest, ScoreRequiresExactlyOneTargetSource) {
    const auto traj = write("traj.csv", "subject_id,t,a\np,0,1\np,1,2\n");
    ScoreRequest r;
    r.trajectories_csv = traj;
    r.out_dir = dir_ / "out";
    EXPECT_EQ(cmd_score(r, out_, err_), kExitInput);
    r.index = dir_ / "a";
    r.targets_dir = dir_;
    EXPECT_EQ(cmd_score(r, out_, err_), kExitInput);
    r.targets_dir.reset();
    r.config.mode = Mode::FixedSeries;
    EXPECT_EQ(cmd_score(r, out_, err_), kExitInput);
}

TEST_F(CliTest, ScoreFixedSeriesGivesOneSeriesPerTarget) {
    std::string traj = "subject_id,t,a,b\n";
    std::string target = "t,a,b\n";
    for (int m = 1; m <= 9; ++m) {
        const auto month = "2020-0" + std::to_string(m);
        traj += "x," + month + "-03," + std::to_string(0.1 * m) + "," + std::to_string(0.05 * m) + "\n";
        traj += "y," + month + "-10," + std::to_string(0.2 * m) + ",\n";
        target += month + "," + std::to_string(0.1 * m + 0.3) + "," + std::to_string(0.05 * m + 0.2) + "\n";
    }
    const auto traj_path = write("traj.csv", traj);
    for (int s = 1; s <= 5; ++s) write("targets/SSP" + std::to_string(s) + ".csv", target);

    ScoreRequest r;
    r.trajectories_csv = traj_path;
    r.targets_dir = dir_ / "targets";
    r.out_dir = dir_ / "out";
    r.per_feature = true;
    ASSERT_EQ(cmd_score(r, out_, err_), kExitOk) << err_.str();
    const auto summary = read_csv_file(dir_ / "out" / "summary.csv");
    EXPECT_EQ(summary.rows.size(), 10u);
    for (int s = 1; s <= 5; ++s) {
        EXPECT_EQ(read_csv_file(dir_ / "out" / ("summary_SSP" + std::to_string(s) + ".csv")).rows.size(), 2u);
    }
    EXPECT_EQ(read_csv_file(dir_ / "out" / "rankings.csv").rows.size(), 10u);
    EXPECT_GT(read_csv_file(dir_ / "out" / "features.csv").rows.size(), 0u);
    EXPECT_EQ(read_csv_file(dir_ / "out" / "wide_cumulative.csv").header.size(), 11u);
}

TEST_F(CliTest, CompareIdenticalFiles) {
    const auto f = write("s.csv", "subject_id,average\na,0.1\nb,0.3\nc,0.2\n");
    EXPECT_EQ(cmd_compare(f, f, out_, err_), kExitOk);
    EXPECT_NE(out_.str().find("\"p\": 1.0"), std::string::npos) << out_.str();
    EXPECT_NE(out_.str().find("\"n_a\": 3"), std::string::npos);
}

TEST_F(CliTest, CompareErrors) {
    const auto good = write("good.csv", "average\n0.1\n0.2\n");
    const auto short_file = write("short.csv", "average\n0.1\n");
    const auto no_column = write("none.csv", "mean\n0.1\n0.2\n");
    const auto garbage = write("bad.csv", "average\n0.1\nabc\n");
    const auto ragged = write("ragged.csv", "average,x\n0.1\n");
    EXPECT_EQ(cmd_compare(good, short_file, out_, err_), kExitInput);
    EXPECT_EQ(cmd_compare(good, no_column, out_, err_), kExitInput);
    EXPECT_EQ(cmd_compare(garbage, good, out_, err_), kExitInput);
    EXPECT_EQ(cmd_compare(ragged, good, out_, err_), kExitInput);
    EXPECT_EQ(cmd_compare(dir_ / "missing.csv", good, out_, err_), kExitInput);
}

TEST_F(CliTest, DemoToySigns) {
    ASSERT_EQ(cmd_demo({"toy", 1, dir_ / "toy", {}, 500}, out_, err_), kExitOk) << err_.str();
    std::istringstream jsonl(read(dir_ / "toy" / "steps.jsonl"));
    std::string first, second;
    std::getline(jsonl, first);
    std::getline(jsonl, second);
    EXPECT_NE(first.find("\"combined\":-"), std::string::npos) << first;
    EXPECT_EQ(second.find("\"combined\":-"), std::string::npos) << second;
}

TEST_F(CliTest, DemoIcuSmallCohortRoundTripsThroughCompare) {
    ASSERT_EQ(cmd_demo({"icu", 3, dir_ / "icu", {}, 40}, out_, err_), kExitOk) << err_.str();
    EXPECT_NE(out_.str().find("cohort sizes: RFD=40 mortality=40"), std::string::npos) << out_.str();
    std::ostringstream cmp;
    ASSERT_EQ(cmd_compare(dir_ / "icu" / "summary_RFD.csv", dir_ / "icu" / "summary_mortality.csv", cmp, err_),
              kExitOk);
    EXPECT_EQ(cmp.str(), read(dir_ / "icu" / "compare.json"));
}

TEST_F(CliTest, DemoDeterministic) {
    ASSERT_EQ(cmd_demo({"ssp", 5, dir_ / "a", {}, 500}, out_, err_), kExitOk);
    ASSERT_EQ(cmd_demo({"ssp", 5, dir_ / "b", {}, 500}, out_, err_), kExitOk);
    for (const auto& entry : fs::recursive_directory_iterator(dir_ / "a")) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), dir_ / "a");
        EXPECT_EQ(read(entry.path()), read(dir_ / "b" / rel)) << rel;
    }
    ASSERT_EQ(cmd_demo({"ssp", 6, dir_ / "c", {}, 500}, out_, err_), kExitOk);
    EXPECT_NE(read(dir_ / "a" / "steps.jsonl"), read(dir_ / "c" / "steps.jsonl"));
}

TEST_F(CliTest, DemoSspRanksPathwaysByConstruction) {
    ASSERT_EQ(cmd_demo({"ssp", 2, dir_ / "ssp", {}, 500}, out_, err_), kExitOk);
    const auto ranks = read_csv_file(dir_ / "ssp" / "rankings.csv");
    std::vector<std::string> norway;
    for (const auto& row : ranks.rows) {
        if (row[0] == "norway") norway.push_back(row[2]);
    }
    EXPECT_EQ(norway, (std::vector<std::string>{"SSP5", "SSP1", "SSP4", "SSP2", "SSP3"}));
}

TEST_F(CliTest, DemoUnknownScenario) {
    EXPECT_EQ(cmd_demo({"mars", 1, dir_ / "m", {}, 500}, out_, err_), kExitInput);
    EXPECT_THROW(generate_scenario("mars", 1, dir_ / "m"), ConfigError);
}

TEST(Config, DefaultsAndParsing) {
    const RunConfig defaults;
    EXPECT_EQ(defaults.lambda, 0.9);
    EXPECT_EQ(defaults.k_neighbors, 3u);
    EXPECT_EQ(defaults.epsilon, 1e-9);
    const auto cfg = RunConfig::from_json(
        R"({"lambda":0.5,"k_neighbors":4,"epsilon":1e-6,"mode":"fixed_series","period":"year",)"
        R"("polarity":{"A":"desirable","B":"undesirable"},"feature_weights":{"x":2}})");
    EXPECT_EQ(cfg.lambda, 0.5);
    EXPECT_EQ(cfg.k_neighbors, 4u);
    EXPECT_EQ(cfg.mode, Mode::FixedSeries);
    EXPECT_EQ(cfg.period, Period::Year);
    EXPECT_EQ(cfg.polarity.at("B"), Polarity::Undesirable);
    EXPECT_EQ(cfg.feature_weights.at("x"), 2.0);
}

TEST(Config, RejectsInvalid) {
    EXPECT_THROW(RunConfig::from_json(R"({"lamda":0.5})"), ConfigError);
    EXPECT_THROW(RunConfig::from_json(R"({"lambda":1.5})"), ConfigError);
    EXPECT_THROW(RunConfig::from_json(R"({"k_neighbors":0})"), ConfigError);
    EXPECT_THROW(RunConfig::from_json(R"({"k_neighbors":"three"})"), ConfigError);
    EXPECT_THROW(RunConfig::from_json(R"({"epsilon":-1})"), ConfigError);
    EXPECT_THROW(RunConfig::from_json(R"({"mode":"other"})"), ConfigError);
    EXPECT_THROW(RunConfig::from_json(R"({"polarity":{"A":"maybe"}})"), ConfigError);
    EXPECT_THROW(RunConfig::from_json(R"({"feature_weights":{"x":0}})"), ConfigError);
    EXPECT_THROW(RunConfig::from_json("[1]"), ConfigError);
    EXPECT_THROW(RunConfig::from_json("{"), ConfigError);
}

TEST(Config, FlagsOverrideFileAndBothAreLogged) {
    const auto path = fs::temp_directory_path() / "trace_cfg_override.json";
    std::ofstream(path) << R"({"lambda":0.5,"k_neighbors":7})";
    Overrides flags;
    flags.lambda = 0.8;
    std::ostringstream log;
    const auto cfg = resolve_config(path, flags, log);
    fs::remove(path);
    EXPECT_EQ(cfg.lambda, 0.8);
    EXPECT_EQ(cfg.k_neighbors, 7u);
    EXPECT_NE(log.str().find("lambda=0.5"), std::string::npos);
    EXPECT_NE(log.str().find("flag override: lambda=0.8"), std::string::npos);
    flags.lambda = 2.0;
    EXPECT_THROW(resolve_config(std::nullopt, flags, log), ConfigError);
}

TEST(Config, FeatureWeightsExpandOverOneHotSlots) {
    const FeatureSchema schema({{"a", ColumnKind::Numeric, {}}, {"k", ColumnKind::Categorical, {"u", "v"}}});
    RunConfig cfg;
    cfg.feature_weights = {{"k", 3.0}};
    EXPECT_EQ(resolve_weights(cfg, schema), (std::vector<double>{1.0, 3.0, 3.0}));
    cfg.feature_weights = {{"zzz", 3.0}};
    EXPECT_THROW(resolve_weights(cfg, schema), ConfigError);
    EXPECT_TRUE(resolve_weights(RunConfig{}, schema).empty());
}

} // namespace
} // namespace trace::cli
