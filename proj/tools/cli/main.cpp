#include "commands.hpp"
#include "config.hpp"

#include <trace/error.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_overrides(CLI::App* cmd, trace::cli::Overrides& o) {
    cmd->add_option_function<double>("--lambda", [&o](double v) { o.lambda = v; }, "Weight of R1 in [0, 1]");
    cmd->add_option_function<std::size_t>("--k", [&o](std::size_t v) { o.k_neighbors = v; },
                                          "Nearest neighbours per class")
        ->check(CLI::PositiveNumber);
    cmd->add_option_function<double>("--epsilon", [&o](double v) { o.epsilon = v; }, "Degeneracy tolerance");
}

} // namespace

int main(int argc, char** argv) {
    using namespace trace::cli;

    CLI::App app{"TraCE trajectory counterfactual scores"};
    app.require_subcommand(1);

    BuildIndexRequest build;
    auto* build_cmd = app.add_subcommand("build-index", "Build a per-class nearest-neighbour index from a corpus");
    build_cmd->add_option("corpus", build.corpus_csv, "Corpus CSV (features plus label)")->required();
    build_cmd->add_option("--out", build.out_index, "Index file to write")->required();

    ScoreRequest score;
    std::optional<std::filesystem::path> score_config;
    Overrides score_overrides;
    auto* score_cmd = app.add_subcommand("score", "Score trajectories against corpus or fixed targets");
    score_cmd->add_option("trajectories", score.trajectories_csv, "Trajectory CSV")->required();
    score_cmd->add_option("--index", score.index, "Index built by build-index (corpus kNN mode)");
    score_cmd->add_option("--targets-dir", score.targets_dir, "Directory of target series CSVs (fixed mode)");
    score_cmd->add_option("--config", score_config, "JSON run configuration");
    score_cmd->add_option("--out", score.out_dir, "Output directory")->required();
    score_cmd->add_flag("--per-feature", score.per_feature, "Also score each feature on its own");
    score_cmd->add_option("--threads", score.threads, "Worker threads (0: all cores)");
    add_overrides(score_cmd, score_overrides);

    std::filesystem::path compare_a, compare_b;
    auto* compare_cmd = app.add_subcommand("compare", "Welch's t-test on two summary CSVs");
    compare_cmd->add_option("a", compare_a, "First summary CSV")->required();
    compare_cmd->add_option("b", compare_b, "Second summary CSV")->required();

    DemoRequest demo;
    auto* demo_cmd = app.add_subcommand("demo", "Generate a seeded synthetic scenario and run it end to end");
    demo_cmd->add_option("--scenario", demo.scenario, "toy | icu | ssp")
        ->required()
        ->check(CLI::IsMember({"toy", "icu", "ssp"}));
    demo_cmd->add_option("--seed", demo.seed, "Generator seed")->required();
    demo_cmd->add_option("--out", demo.out_dir, "Output directory (default: demo-<scenario>-<seed>)");
    demo_cmd->add_option("--cohort-size", demo.cohort_size, "icu: subjects per outcome group")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
    add_overrides(demo_cmd, demo.overrides);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    if (*build_cmd) {
        return cmd_build_index(build, std::cout, std::cerr);
    }
    if (*score_cmd) {
        try {
            score.config = resolve_config(score_config, score_overrides, std::cerr);
        } catch (const trace::Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitInput;
        }
        return cmd_score(score, std::cout, std::cerr);
    }
    if (*compare_cmd) {
        return cmd_compare(compare_a, compare_b, std::cout, std::cerr);
    }
    if (demo.out_dir.empty()) {
        demo.out_dir = "demo-" + demo.scenario + "-" + std::to_string(demo.seed);
    }
    return cmd_demo(demo, std::cout, std::cerr);
}
