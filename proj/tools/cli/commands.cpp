#include "commands.hpp"

#include "demo.hpp"

#include <trace/analytics.hpp>
#include <trace/csv.hpp>
#include <trace/error.hpp>
#include <trace/pipeline.hpp>
#include <trace/scoring.hpp>
#include <trace/targets.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

namespace trace::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

int report(std::ostream& err, const std::exception& e) {
    err << "error: " << e.what() << "\n";
    const bool input = dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
                       dynamic_cast<const DimensionError*>(&e) || dynamic_cast<const CorpusError*>(&e) ||
                       dynamic_cast<const TargetError*>(&e);
    return input ? kExitInput : kExitRuntime;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        return report(err, e);
    }
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    return out;
}

std::string file_safe(const std::string& label) {
    std::string out = label;
    for (auto& c : out) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '_' || c == '.';
        if (!ok) c = '_';
    }
    return out.empty() ? "_" : out;
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

// Collects warnings from worker threads; reported once each, sorted.
class Warnings {
public:
    WarningHandler handler() {
        return [this](const std::string& msg) {
            std::lock_guard lock(mutex_);
            seen_.insert(msg);
        };
    }
    void flush(std::ostream& err) const {
        for (const auto& msg : seen_) err << "warning: " << msg << "\n";
    }

private:
    std::mutex mutex_;
    std::set<std::string> seen_;
};

// ---------------------------------------------------------------------------
// build-index

struct BuildResult {
    CorpusIndex index;
};

BuildResult run_build_index(const BuildIndexRequest& request, std::ostream& out) {
    auto table = read_csv_file(request.corpus_csv);
    auto index = corpus_from_table(table);
    if (request.out_index.has_parent_path()) {
        fs::create_directories(request.out_index.parent_path());
    }
    open_out(request.out_index) << save_index(index);
    const auto normalizer_path =
        request.out_index.parent_path() / (request.out_index.stem().string() + ".normalizer.json");
    open_out(normalizer_path) << index.corpus.normalizer()->to_json() << "\n";

    out << "corpus: " << index.corpus.size() << " rows, " << index.corpus.dim() << " dimensions\n";
    for (const auto& label : index.corpus.classes()) {
        out << "class " << label << ": " << index.corpus.class_size(label) << "\n";
    }
    return {std::move(index)};
}

// ---------------------------------------------------------------------------
// score

struct SeriesResult {
    std::string series; // empty in corpus mode
    std::optional<TrajectoryScore> score;
    std::optional<ScoreSeries> summary;
    std::map<std::size_t, TrajectoryScore> features;
    std::string error;
};

struct SubjectResult {
    std::string subject_id;
    std::optional<std::string> label;
    std::vector<SeriesResult> series;
    std::string error; // set when the trajectory itself could not be built
};

struct ScoreRun {
    Mode mode = Mode::CorpusKnn;
    std::vector<std::string> feature_names;
    std::vector<SubjectResult> subjects;
    std::vector<std::string> series_names; // fixed mode
};

void score_one(SeriesResult& result, const Trajectory& traj, const TargetProvider& provider, const RunConfig& config,
               const ScoreOptions& options, bool per_feature) {
    try {
        const LambdaSchedule lambda(config.lambda);
        result.score = score_trajectory(traj, provider, lambda, options);
        if (per_feature) {
            result.features = feature_scores(traj, provider, lambda, options);
        }
        result.summary = aggregate(*result.score);
    } catch (const Error& e) {
        result.error = e.what();
    }
}

Mode resolve_mode(const ScoreRequest& request) {
    if (request.index.has_value() == request.targets_dir.has_value()) {
        throw ConfigError("score: give exactly one of --index or --targets-dir");
    }
    const Mode mode = request.index ? Mode::CorpusKnn : Mode::FixedSeries;
    if (request.config.mode && *request.config.mode != mode) {
        throw ConfigError(std::string("score: config mode is ") + to_string(*request.config.mode) +
                          " but the flags select " + to_string(mode));
    }
    return mode;
}

ScoreRun run_corpus_mode(const ScoreRequest& request, const CsvTable& table, Warnings& warnings) {
    const auto& config = request.config;
    const auto index = load_index(read_text(*request.index));
    if (config.polarity.empty()) {
        throw ConfigError("score: corpus mode needs a polarity map in the config");
    }
    for (const auto& [label, _] : config.polarity) {
        if (!index.corpus.has_class(label)) {
            throw ConfigError("score: polarity names class '" + label + "' which the index does not contain");
        }
    }
    const auto records = read_trajectory_table(table, &index.schema, config.period);
    const ScoreOptions options{resolve_weights(config, index.schema), config.epsilon};
    const KnnTargetProvider provider(index.corpus, config.k_neighbors, config.polarity, options.feature_weights,
                                     warnings.handler());
    const Normalizer* normalizer = index.corpus.normalizer() ? &*index.corpus.normalizer() : nullptr;

    ScoreRun run;
    run.mode = Mode::CorpusKnn;
    run.feature_names = index.schema.encoded_names();
    run.subjects.resize(records.subjects.size());
    parallel_for(records.subjects.size(), request.threads, [&](std::size_t i) {
        const auto& subject = records.subjects[i];
        auto& result = run.subjects[i];
        result.subject_id = subject.subject_id;
        result.label = subject.label;
        try {
            const auto traj = build_trajectory(subject, index.schema, &index.stats, normalizer);
            result.series.emplace_back();
            score_one(result.series.back(), traj, provider, config, options, request.per_feature);
        } catch (const Error& e) {
            result.error = e.what();
        }
    });
    return run;
}

ScoreRun run_fixed_mode(const ScoreRequest& request, const CsvTable& table) {
    const auto& config = request.config;
    const auto records = read_trajectory_table(table, nullptr, config.period);
    const auto& schema = records.schema;

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(*request.targets_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw TargetError("score: no *.csv target series in " + request.targets_dir->string());
    }
    std::vector<TargetSeries> series;
    for (const auto& file : files) {
        const auto label = file.stem().string();
        const auto it = config.polarity.find(label);
        series.push_back(series_from_table(read_csv_file(file), label,
                                           it == config.polarity.end() ? Polarity::Desirable : it->second, schema,
                                           config.period));
    }

    std::vector<RawRecord> all;
    std::vector<std::optional<std::string>> labels;
    for (const auto& subject : records.subjects) {
        for (const auto& r : subject.records) {
            all.push_back(r);
            labels.push_back(subject.label);
        }
    }
    const auto stats = ClassStats::compute(all, labels, schema);
    const ScoreOptions options{resolve_weights(config, schema), config.epsilon};

    ScoreRun run;
    run.mode = Mode::FixedSeries;
    run.feature_names = schema.encoded_names();
    for (const auto& s : series) run.series_names.push_back(s.class_label);
    run.subjects.resize(records.subjects.size());
    parallel_for(records.subjects.size(), request.threads, [&](std::size_t i) {
        const auto& subject = records.subjects[i];
        auto& result = run.subjects[i];
        result.subject_id = subject.subject_id;
        result.label = subject.label;
        try {
            const auto raw = build_trajectory(subject, schema, &stats, nullptr);
            // Each subject is normalized on its own, together with the target
            // series it is compared against.
            std::vector<FeatureVector> rows;
            for (const auto& p : raw.points()) rows.push_back(p.x);
            for (const auto& s : series) {
                for (const auto& [_, x] : s.points) rows.push_back(x);
            }
            const auto normalizer = Normalizer::fit(rows, schema.encoded_names());
            std::vector<TrajectoryPoint> points;
            for (const auto& p : raw.points()) points.push_back({p.t_index, normalizer.apply(p.x)});
            const Trajectory traj(raw.subject_id(), std::move(points), raw.label());

            for (const auto& s : series) {
                TargetSeries scaled{s.class_label, s.polarity, {}};
                for (const auto& [t, x] : s.points) scaled.points.emplace(t, normalizer.apply(x));
                const FixedTargetProvider provider({std::move(scaled)});
                result.series.push_back({s.class_label, {}, {}, {}, {}});
                score_one(result.series.back(), traj, provider, config, options, request.per_feature);
            }
        } catch (const Error& e) {
            result.error = e.what();
        }
    });
    return run;
}

const std::vector<std::string> kSummaryHeader = {"subject_id", "series",  "label",
                                                 "steps",      "scored",  "skipped",
                                                 "average",    "cumulative", "desirable_average",
                                                 "undesirable_average"};

std::vector<std::string> summary_row(const SubjectResult& subject, const SeriesResult& s) {
    return {subject.subject_id,
            s.series,
            subject.label.value_or(""),
            std::to_string(s.score->steps.size()),
            std::to_string(s.score->scored_count()),
            std::to_string(s.score->skipped_count),
            format_number(s.summary->average),
            format_number(s.summary->cumulative.back()),
            optional_number(s.summary->desirable_average),
            optional_number(s.summary->undesirable_average)};
}

struct ScoreOutcome {
    ScoreRun run;
    std::size_t scored = 0;
    std::size_t errors = 0;
};

void write_outputs(const ScoreOutcome& outcome, const fs::path& dir, bool per_feature) {
    const auto& run = outcome.run;
    fs::create_directories(dir);

    auto steps = open_out(dir / "steps.jsonl");
    auto summary = open_out(dir / "summary.csv");
    auto errors = open_out(dir / "errors.csv");
    write_csv_row(summary, kSummaryHeader);
    write_csv_row(errors, std::vector<std::string>{"subject_id", "series", "error"});

    std::map<std::string, std::vector<std::vector<std::string>>> grouped;
    std::vector<std::pair<std::string, ScoreSeries>> wide;
    for (const auto& subject : run.subjects) {
        if (!subject.error.empty()) {
            write_csv_row(errors, std::vector<std::string>{subject.subject_id, "", subject.error});
            continue;
        }
        for (const auto& s : subject.series) {
            if (!s.error.empty()) {
                write_csv_row(errors, std::vector<std::string>{subject.subject_id, s.series, s.error});
                continue;
            }
            write_step_jsonl(steps, *s.score, s.series);
            auto row = summary_row(subject, s);
            write_csv_row(summary, row);
            const auto group = run.mode == Mode::FixedSeries ? s.series : subject.label.value_or("");
            if (!group.empty()) grouped[group].push_back(std::move(row));
            wide.emplace_back(s.series.empty() ? subject.subject_id : subject.subject_id + ":" + s.series,
                              *s.summary);
        }
    }
    for (const auto& [group, rows] : grouped) {
        auto out = open_out(dir / ("summary_" + file_safe(group) + ".csv"));
        write_csv_row(out, kSummaryHeader);
        for (const auto& row : rows) write_csv_row(out, row);
    }
    {
        auto out = open_out(dir / "wide.csv");
        write_wide_csv(out, wide, false);
    }
    {
        auto out = open_out(dir / "wide_cumulative.csv");
        write_wide_csv(out, wide, true);
    }

    if (per_feature) {
        auto out = open_out(dir / "features.csv");
        write_csv_row(out, std::vector<std::string>{"subject_id", "series", "feature", "t", "score"});
        for (const auto& subject : run.subjects) {
            for (const auto& s : subject.series) {
                if (!s.error.empty()) continue;
                for (const auto& [dim, score] : s.features) {
                    for (const auto& step : score.steps) {
                        if (step.skipped()) continue;
                        write_csv_row(out, std::vector<std::string>{subject.subject_id, s.series,
                                                                    run.feature_names.at(dim),
                                                                    std::to_string(step.t_index),
                                                                    format_number(step.combined)});
                    }
                }
            }
        }
    }

    if (run.mode == Mode::FixedSeries) {
        auto out = open_out(dir / "rankings.csv");
        write_csv_row(out, std::vector<std::string>{"subject_id", "rank", "series", "average"});
        for (const auto& subject : run.subjects) {
            std::vector<std::pair<std::string, double>> averages;
            for (const auto& s : subject.series) {
                if (s.error.empty()) averages.emplace_back(s.series, s.summary->average);
            }
            if (averages.empty()) continue;
            const auto order = rank_targets(averages);
            for (std::size_t r = 0; r < order.size(); ++r) {
                const auto it = std::find_if(averages.begin(), averages.end(),
                                             [&](const auto& a) { return a.first == order[r]; });
                write_csv_row(out, std::vector<std::string>{subject.subject_id, std::to_string(r + 1), order[r],
                                                            format_number(it->second)});
            }
        }
    }
}

ScoreOutcome run_score(const ScoreRequest& request, std::ostream& out, std::ostream& err) {
    const Mode mode = resolve_mode(request);
    const auto table = read_csv_file(request.trajectories_csv);
    Warnings warnings;
    ScoreOutcome outcome;
    outcome.run = mode == Mode::CorpusKnn ? run_corpus_mode(request, table, warnings) : run_fixed_mode(request, table);
    warnings.flush(err);

    for (const auto& subject : outcome.run.subjects) {
        if (!subject.error.empty()) {
            ++outcome.errors;
            continue;
        }
        for (const auto& s : subject.series) {
            s.error.empty() ? ++outcome.scored : ++outcome.errors;
        }
    }
    write_outputs(outcome, request.out_dir, request.per_feature);
    out << "scored " << outcome.scored << " series over " << outcome.run.subjects.size() << " subjects ("
        << outcome.errors << " errors, see errors.csv)\n";
    if (outcome.errors > 0) {
        err << "warning: " << outcome.errors << " subject/series could not be scored\n";
    }
    return outcome;
}

// ---------------------------------------------------------------------------
// compare

std::vector<double> read_averages(const fs::path& path) {
    const auto table = read_csv_file(path);
    const auto col = table.column("average");
    std::vector<double> values;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto v = parse_number(table.rows[r][col]);
        if (!v) {
            throw ParseError(table.source + ": row " + std::to_string(r + 1) + ", column average: '" +
                             table.rows[r][col] + "' is not a number");
        }
        values.push_back(*v);
    }
    if (values.size() < 2) {
        throw ParseError(table.source + ": need at least 2 rows, found " + std::to_string(values.size()));
    }
    return values;
}

std::string comparison_json(const GroupComparison& g) {
    ordered_json doc;
    doc["mean_a"] = g.mean_a;
    doc["sd_a"] = g.sd_a;
    doc["n_a"] = g.n_a;
    doc["mean_b"] = g.mean_b;
    doc["sd_b"] = g.sd_b;
    doc["n_b"] = g.n_b;
    doc["t"] = g.t_stat;
    doc["dof"] = g.dof;
    doc["p"] = g.p_value;
    return doc.dump(2) + "\n";
}

GroupComparison run_compare(const fs::path& a, const fs::path& b) {
    const auto va = read_averages(a);
    const auto vb = read_averages(b);
    try {
        return welch_t_test(va, vb);
    } catch (const StatsError& e) {
        throw ParseError(std::string("compare: ") + e.what());
    }
}

} // namespace

int cmd_build_index(const BuildIndexRequest& request, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        run_build_index(request, out);
        return kExitOk;
    });
}

int cmd_score(const ScoreRequest& request, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        err << "score: " << request.config.describe() << "\n";
        const auto outcome = run_score(request, out, err);
        return outcome.scored > 0 ? kExitOk : kExitRuntime;
    });
}

int cmd_compare(const fs::path& a, const fs::path& b, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        out << comparison_json(run_compare(a, b));
        return kExitOk;
    });
}

int cmd_demo(const DemoRequest& request, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto input_dir = request.out_dir / "input";
        const auto files = generate_scenario(request.scenario, request.seed, input_dir, request.cohort_size);
        out << "demo " << request.scenario << " (seed " << request.seed << "): inputs in " << input_dir.string()
            << "\n";

        ScoreRequest score;
        score.trajectories_csv = files.trajectories;
        score.out_dir = request.out_dir;
        score.config = resolve_config(files.config, request.overrides, err);
        score.per_feature = request.scenario == "ssp";
        if (files.corpus) {
            const auto index_path = request.out_dir / "index.json";
            run_build_index({*files.corpus, index_path}, out);
            score.index = index_path;
        } else {
            score.targets_dir = files.targets_dir;
        }
        const auto outcome = run_score(score, out, err);

        if (request.scenario == "toy") {
            for (const auto& s : outcome.run.subjects.front().series) {
                for (const auto& step : s.score->steps) {
                    out << "step " << step.from_t_index << "->" << step.t_index
                        << ": combined=" << format_number(step.combined);
                    for (const auto& [label, v] : step.per_class) out << " " << label << "=" << format_number(v);
                    out << "\n";
                }
            }
        } else if (request.scenario == "icu") {
            std::map<std::string, std::size_t> cohort;
            for (const auto& subject : outcome.run.subjects) ++cohort[subject.label.value_or("")];
            out << "cohort sizes:";
            for (const auto& [label, n] : cohort) out << " " << label << "=" << n;
            out << "\n";
            const auto cmp = run_compare(request.out_dir / "summary_RFD.csv", request.out_dir / "summary_mortality.csv");
            const auto json = comparison_json(cmp);
            open_out(request.out_dir / "compare.json") << json;
            out << "RFD vs mortality average TraCE score:\n" << json;
        } else {
            for (const auto& subject : outcome.run.subjects) {
                std::vector<std::pair<std::string, double>> averages;
                for (const auto& s : subject.series) {
                    if (s.error.empty()) averages.emplace_back(s.series, s.summary->average);
                }
                out << subject.subject_id << " ranking:";
                for (const auto& name : rank_targets(averages)) out << " " << name;
                out << "\n";
            }
        }
        return kExitOk;
    });
}

} // namespace trace::cli
