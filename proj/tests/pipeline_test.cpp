#include <trace/error.hpp>
#include <trace/pipeline.hpp>

#include "support/generators.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace trace {
namespace {

using testing::Gen;
using Cells = std::vector<std::optional<double>>;

std::vector<RawRecord> column(const Cells& cells) {
    std::vector<RawRecord> out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out.push_back({"s", static_cast<std::int64_t>(i), {cells[i]}, {}});
    }
    return out;
}

Cells values_of(const std::vector<RawRecord>& records) {
    Cells out;
    for (const auto& r : records) out.push_back(r.values.at(0));
    return out;
}

ClassStats stats_with_mean(double mean) {
    const FeatureSchema schema({{"x", ColumnKind::Numeric, {}}});
    const std::vector<RawRecord> records{{"a", 0, {mean}, {}}};
    const std::vector<std::optional<std::string>> labels{std::string("c")};
    return ClassStats::compute(records, labels, schema);
}

TEST(Impute, ForwardFill) { EXPECT_EQ(values_of(impute(column({5, {}, {}}), nullptr, {})), (Cells{5, 5, 5})); }

TEST(Impute, BackwardFillLeadingGap) {
    EXPECT_EQ(values_of(impute(column({{}, {}, 7}), nullptr, {})), (Cells{7, 7, 7}));
}

TEST(Impute, MixedGaps) {
    EXPECT_EQ(values_of(impute(column({{}, 2, {}, 4, {}}), nullptr, {})), (Cells{2, 2, 2, 4, 4}));
}

TEST(Impute, ClassMeanForEmptyColumn) {
    const auto stats = stats_with_mean(4.2);
    EXPECT_EQ(values_of(impute(column({{}, {}, {}}), &stats, std::string("c"))), (Cells{4.2, 4.2, 4.2}));
}

TEST(Impute, UnknownClassFallsBackToPooled) {
    const auto stats = stats_with_mean(4.2);
    EXPECT_EQ(values_of(impute(column({{}, {}}), &stats, std::string("other"))), (Cells{4.2, 4.2}));
}

TEST(Impute, Errors) {
    EXPECT_THROW(impute(column({{}, {}}), nullptr, {}), ImputeError);
    auto unsorted = column({1, 2});
    unsorted[1].t_index = 0;
    EXPECT_THROW(impute(unsorted, nullptr, {}), ImputeError);
}

TEST(Impute, CategoricalModes) {
    const FeatureSchema schema({{"ward", ColumnKind::Categorical, {"a", "b"}}});
    std::vector<RawRecord> train{{"p", 0, {}, {{"ward", "b"}}}, {"p", 1, {}, {{"ward", "b"}}},
                                 {"q", 0, {}, {{"ward", "a"}}}};
    const std::vector<std::optional<std::string>> labels{std::string("c"), std::string("c"), std::string("d")};
    const auto stats = ClassStats::compute(train, labels, schema);
    EXPECT_EQ(stats.mode(std::string("c"), "ward"), "b");
    std::vector<RawRecord> subject{{"z", 0, {}, {{"ward", std::nullopt}}}, {"z", 1, {}, {{"ward", std::nullopt}}}};
    const auto filled = impute(subject, &stats, std::string("d"));
    EXPECT_EQ(filled[1].categorical.at("ward"), "a");
}

TEST(ClassStats, JsonRoundTrip) {
    const FeatureSchema schema({{"x", ColumnKind::Numeric, {}}, {"k", ColumnKind::Categorical, {"u", "v"}}});
    const std::vector<RawRecord> records{{"a", 0, {1.5}, {{"k", "u"}}}, {"b", 0, {{}}, {{"k", "v"}}}};
    const std::vector<std::optional<std::string>> labels{std::string("c"), std::string("d")};
    const auto stats = ClassStats::compute(records, labels, schema);
    const auto copy = ClassStats::from_json(stats.to_json());
    EXPECT_EQ(copy.to_json(), stats.to_json());
    EXPECT_EQ(copy.mean(std::string("c"), 0), 1.5);
    EXPECT_EQ(copy.mean(std::string("d"), 0), 1.5); // pooled
    EXPECT_EQ(copy.mode(std::string("d"), "k"), "v");
}

TEST(ImputeProperty, IdempotentAndPreservesObservations) {
    Gen gen(81);
    const auto stats = stats_with_mean(-1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + gen.index(12), width = 1 + gen.index(5);
        std::vector<RawRecord> records;
        for (std::size_t i = 0; i < n; ++i) {
            RawRecord r{"s", static_cast<std::int64_t>(3 * i), {}, {}};
            for (std::size_t j = 0; j < width; ++j) {
                r.values.push_back(gen.chance(0.3) ? std::nullopt : std::optional(gen.uniform(-5, 5)));
            }
            records.push_back(r);
        }
        const ClassStats* s = width == 1 ? &stats : nullptr;
        std::vector<RawRecord> once;
        try {
            once = impute(records, s, std::string("c"));
        } catch (const ImputeError&) {
            continue; // a whole column missing with no statistic to fall back on
        }
        EXPECT_EQ(impute(once, s, std::string("c")), once);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < width; ++j) {
                ASSERT_TRUE(once[i].values[j]);
                if (records[i].values[j]) {
                    EXPECT_EQ(once[i].values[j], records[i].values[j]);
                }
            }
        }
    }
}

TEST(Normalizer, Examples) {
    const Normalizer n({{"f", 10, 20}, {"c", 3, 3}});
    EXPECT_EQ(n.apply({15, 3}), (FeatureVector{0.5, 0.5}));
    EXPECT_EQ(n.apply({10, 99})[0], 0.0);
    EXPECT_EQ(n.apply({25, 99}), (FeatureVector{1.5, 0.5}));
    EXPECT_EQ(n.invert({0.5, 0.5}), (FeatureVector{15, 3}));
    EXPECT_THROW(n.apply({1, 2, 3}), DimensionError);
    EXPECT_THROW(Normalizer({{"bad", 2, 1}}), ConfigError);
}

TEST(Normalizer, FitAndJson) {
    const std::vector<FeatureVector> rows{{1, 5}, {3, 5}, {2, 5}};
    const auto n = Normalizer::fit(rows, {"a", "b"});
    EXPECT_EQ(n.ranges()[0].min, 1.0);
    EXPECT_EQ(n.ranges()[0].max, 3.0);
    EXPECT_EQ(n.to_json(), R"({"features":[{"max":3.0,"min":1.0,"name":"a"},{"max":5.0,"min":5.0,"name":"b"}]})");
    const auto back = Normalizer::from_json(n.to_json());
    EXPECT_EQ(back.apply({2, 5}), n.apply({2, 5}));
    EXPECT_THROW(Normalizer::fit(std::vector<FeatureVector>{}), CorpusError);
    EXPECT_THROW(Normalizer::from_json("[]"), ParseError);
}

TEST(NormalizerProperty, RoundTrip) {
    Gen gen(82);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t dim = 1 + gen.index(17);
        std::vector<FeatureVector> rows;
        for (int i = 0; i < 10; ++i) rows.push_back(gen.point(dim, -50, 50));
        const auto n = Normalizer::fit(rows);
        for (int i = 0; i < 10; ++i) {
            const auto x = gen.point(dim, -80, 80);
            const auto back = n.invert(n.apply(x));
            const auto u = gen.point(dim, -0.5, 1.5);
            const auto again = n.apply(n.invert(u));
            for (std::size_t d = 0; d < dim; ++d) {
                EXPECT_NEAR(back[d], x[d], 1e-12 * std::max(1.0, std::abs(x[d])));
                EXPECT_NEAR(again[d], u[d], 1e-12);
            }
        }
    }
}

TEST(Period, Keys) {
    EXPECT_EQ(period_key("2020-03", Period::Month), 2020 * 12 + 2);
    EXPECT_EQ(period_key("2020-03-17T10:00:00", Period::Month), 2020 * 12 + 2);
    EXPECT_EQ(period_key("1970-01-02", Period::Day), 1);
    EXPECT_EQ(period_key("2021", Period::Year), 2021);
    EXPECT_THROW(period_key("2020-13", Period::Month), ParseError);
    EXPECT_THROW(period_key("2021-02-29", Period::Day), ParseError);
    EXPECT_THROW(period_key("2020", Period::Month), ParseError);
    EXPECT_EQ(parse_period("month"), Period::Month);
    EXPECT_THROW(parse_period("week"), ConfigError);
}

TEST(GroupBy, MissingAwareMean) {
    const std::vector<TimestampedRecord> records{
        {"s", "2020-01-05", {2, {}}, {}},
        {"s", "2020-01-20", {4, 6}, {}},
        {"s", "2020-02-11", {7, {}}, {}},
        {"r", "2020-01-01", {1, 1}, {}},
    };
    const auto grouped = group_by(records);
    ASSERT_EQ(grouped.size(), 3u);
    EXPECT_EQ(grouped[0].subject_id, "r");
    EXPECT_EQ(grouped[1].values, (Cells{3, 6}));
    EXPECT_EQ(grouped[2].values, (Cells{7, std::nullopt}));
    EXPECT_EQ(grouped[2].t_index, 2020 * 12 + 1);
}

TEST(GroupBy, CategoricalMode) {
    const std::vector<TimestampedRecord> records{
        {"s", "2020-01-05", {}, {{"k", "b"}}},
        {"s", "2020-01-06", {}, {{"k", "a"}}},
        {"s", "2020-01-07", {}, {{"k", std::nullopt}}},
    };
    EXPECT_EQ(group_by(records)[0].categorical.at("k"), "a");
}

TEST(ReadTrajectoryTable, IntegerTime) {
    const auto table = parse_csv("subject_id,t,a,b,label\np,1,1,,x\np,0,2,3,x\nq,0,5,5,\nq,1,6,6,y\n");
    const auto set = read_trajectory_table(table);
    ASSERT_EQ(set.subjects.size(), 2u);
    EXPECT_EQ(set.subjects[0].subject_id, "p");
    EXPECT_EQ(set.subjects[0].records[0].t_index, 0);
    EXPECT_EQ(set.subjects[0].records[1].values[1], std::nullopt);
    EXPECT_EQ(set.subjects[1].label, "y");
    EXPECT_EQ(set.schema.column_names(), (std::vector<std::string>{"a", "b"}));
}

TEST(ReadTrajectoryTable, TimestampsAreGrouped) {
    const auto table = parse_csv("subject_id,t,a\np,2020-01-05,1\np,2020-01-20,3\np,2020-02-01,5\n");
    const auto set = read_trajectory_table(table);
    ASSERT_EQ(set.subjects[0].records.size(), 2u);
    EXPECT_EQ(set.subjects[0].records[0].values[0], 2.0);
}

TEST(ReadTrajectoryTable, Errors) {
    const FeatureSchema schema({{"a", ColumnKind::Numeric, {}}});
    try {
        read_trajectory_table(parse_csv("subject_id,t,a,b\np,0,1,2\n"), &schema);
        FAIL();
    } catch (const DimensionError& e) {
        EXPECT_NE(std::string(e.what()).find("has 2 feature columns, expected 1"), std::string::npos);
    }
    EXPECT_THROW(read_trajectory_table(parse_csv("subject_id,t,b\np,0,1\n"), &schema), DimensionError);
    EXPECT_THROW(read_trajectory_table(parse_csv("subject_id,t,a\np,0,1\np,0,2\n")), ParseError);
    EXPECT_THROW(read_trajectory_table(parse_csv("t,a\n0,1\n")), ParseError);
    EXPECT_THROW(read_trajectory_table(parse_csv("subject_id,t,a\np,,1\n")), ParseError);
}

TEST(BuildTrajectory, ImputesEncodesNormalizes) {
    const auto table = parse_csv("subject_id,t,a,k\np,0,,u\np,1,4,\np,2,6,v\n");
    const auto set = read_trajectory_table(table);
    const Normalizer n({{"a", 0, 8}, {"k=u", 0, 1}, {"k=v", 0, 1}});
    const auto traj = build_trajectory(set.subjects[0], set.schema, nullptr, &n);
    ASSERT_EQ(traj.size(), 3u);
    EXPECT_EQ(traj.points()[0].x, (FeatureVector{0.5, 1, 0}));
    EXPECT_EQ(traj.points()[1].x, (FeatureVector{0.5, 1, 0}));
    EXPECT_EQ(traj.points()[2].x, (FeatureVector{0.75, 0, 1}));
}

TEST(Schema, JsonRoundTripAndUnknownCategory) {
    const FeatureSchema schema({{"a", ColumnKind::Numeric, {}}, {"k", ColumnKind::Categorical, {"u", "v"}}});
    EXPECT_EQ(FeatureSchema::from_json(schema.to_json()).encoded_names(), schema.encoded_names());
    const RawRecord r{"s", 0, {1.0}, {{"k", "w"}}};
    EXPECT_EQ(schema.encode(r), (FeatureVector{1, 0, 0}));
}

TEST(PipelineProperty, Deterministic) {
    Gen gen(83);
    std::string text = "subject_id,t,a,b\n";
    for (int s = 0; s < 5; ++s) {
        for (int t = 0; t < 6; ++t) {
            text += "s" + std::to_string(s) + "," + std::to_string(t) + ",";
            if (!gen.chance(0.3) || t == 0) text += format_number(gen.uniform());
            text += ",";
            if (!gen.chance(0.3) || t == 5) text += format_number(gen.uniform());
            text += "\n";
        }
    }
    auto run = [&] {
        const auto set = read_trajectory_table(parse_csv(text));
        std::string out;
        for (const auto& subject : set.subjects) {
            const auto trajectory = build_trajectory(subject, set.schema, nullptr, nullptr);
            for (const auto& p : trajectory.points()) {
                for (double v : p.x.values()) out += format_number(v) + ",";
            }
        }
        return out;
    };
    EXPECT_EQ(run(), run());
}

} // namespace
} // namespace trace
