#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "fraudkit/error.hpp"

namespace fraudkit::cli {

namespace {

void add_common(CLI::App* app, CommonOptions& c, bool data_required = true) {
    auto* data = app->add_option("--data", c.data, "input CSV with a header row");
    if (data_required) data->required();
    app->add_option("--label-col", c.label_col, "label column (0 normal, 1 fraud)")->capture_default_str();
    app->add_option("--time-col", c.time_col, "timestamp column in seconds");
    app->add_option("--seed", c.seed, "random seed")->capture_default_str();
    app->add_option("--out", c.out, "output path (stdout when omitted)");
    app->add_option("--threads", c.threads, "worker threads, 0 for all cores")->capture_default_str();
    app->add_flag("--timing", c.timing, "include wall time in the report");
}

void add_forest(CLI::App* app, ForestOptions& f) {
    app->add_option("--trees", f.trees, "trees per forest")->capture_default_str();
    app->add_option("--max-depth", f.max_depth, "maximum tree depth, -1 unbounded")->capture_default_str();
    app->add_option("--min-leaf", f.min_leaf, "minimum samples per leaf")->capture_default_str();
    app->add_option("--mtry", f.mtry, "features per split, 0 for round(sqrt(p))")->capture_default_str();
}

void emit(const Json& report, const std::string& out) {
    const std::string text = report.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    require(static_cast<bool>(f), ErrorKind::io_failure, "cannot write " + out);
    f << text;
}

int exit_code_for(ErrorKind kind) {
    // everything except a failed write is a problem with the input or flags
    return kind == ErrorKind::io_failure ? 1 : 2;
}

} // namespace

int main_entry(int argc, char** argv) {
    CLI::App app{"fraudkit: imbalanced fraud detection experiments"};
    app.require_subcommand(1);

    CommonOptions common;
    KsubOptions ksub;
    GraphOptions graph;
    PipelineOptions pipe;
    AggregateOptions agg;

    auto* ksub_cmd = app.add_subcommand("ksub", "stratified k-fold evaluation of K-SUB");
    add_common(ksub_cmd, common);
    ksub_cmd->add_option("--k", ksub.k, "number of majority segments")->capture_default_str();
    ksub_cmd->add_option("--folds", ksub.folds, "cross-validation folds")->capture_default_str();
    add_forest(ksub_cmd, ksub.forest);

    auto* graph_cmd = app.add_subcommand("graphssl", "graph p-Laplacian semi-supervised classification");
    add_common(graph_cmd, common);
    graph_cmd->add_option("--p", graph.p, "p values: 2, 1.2,1.5 or 1.0..2.0")->capture_default_str();
    graph_cmd->add_option("--p-step", graph.p_step, "step for a p range")->capture_default_str();
    graph_cmd->add_option("--mu", graph.mu, "fitting weight")->capture_default_str();
    graph_cmd->add_option("--t", graph.t, "Gaussian kernel width")->capture_default_str();
    graph_cmd->add_option("--knn", graph.knn, "neighbours per node")->capture_default_str();
    graph_cmd->add_option("--undersample", graph.undersample, "cluster-centroids, random or none")
        ->capture_default_str();
    graph_cmd->add_option("--ratio", graph.ratio, "minority/majority ratio after undersampling")
        ->capture_default_str();
    graph_cmd->add_option("--epsilon", graph.epsilon, "local variation smoothing")->capture_default_str();
    graph_cmd->add_option("--max-iters", graph.max_iters, "iteration cap")->capture_default_str();
    graph_cmd->add_option("--tol", graph.tol, "stop when the largest update is below this")
        ->capture_default_str();
    graph_cmd->add_option("--test-count", graph.test_count, "test rows, 0 for 514/1722 of the data")
        ->capture_default_str();

    auto* pipe_cmd = app.add_subcommand("pipeline", "multi-horizon pipeline with never/daily updates");
    add_common(pipe_cmd, common);
    pipe_cmd->add_option("--frames", pipe.frames, "equal-duration time frames")->capture_default_str();
    pipe_cmd->add_option("--train-frames", pipe.train_frames, "frames in the training phase")
        ->capture_default_str();
    pipe_cmd->add_option("--windows", pipe.windows, "horizon window lengths in frames")->capture_default_str();
    pipe_cmd->add_option("--update", pipe.update, "daily, never or both")->capture_default_str();
    pipe_cmd->add_option("--k", pipe.k, "K-SUB segments per model")->capture_default_str();
    pipe_cmd->add_option("--folds", pipe.folds, "stratified folds over transactions")->capture_default_str();
    pipe_cmd->add_option("--frame-log", pipe.frame_log, "per-frame CSV log (default <out>.frames.csv)");
    add_forest(pipe_cmd, pipe.forest);

    auto* agg_cmd = app.add_subcommand("aggregate", "append sliding-window spending aggregates");
    add_common(agg_cmd, common);
    agg_cmd->add_option("--group-by", agg.group_by, "grouping column, e.g. a card id")->required();
    agg_cmd->add_option("--amount-col", agg.amount_col, "amount column")->capture_default_str();
    agg_cmd->add_option("--windows", agg.windows, "window lengths in hours")->capture_default_str();
    agg_cmd->add_option("--functions", agg.functions, "avg, sum, count")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*ksub_cmd) emit(run_ksub(common, ksub), common.out);
        else if (*graph_cmd) emit(run_graphssl(common, graph), common.out);
        else if (*pipe_cmd) emit(run_pipeline_command(common, pipe), common.out);
        else if (*agg_cmd) run_aggregate(common, agg);
        return 0;
    } catch (const Error& e) {
        std::cerr << "fraudkit: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "fraudkit: " << e.what() << "\n";
        return 1;
    }
}

} // namespace fraudkit::cli

int main(int argc, char** argv) { return fraudkit::cli::main_entry(argc, argv); }
