#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fraudkit/dataset.hpp"
#include "fraudkit/error.hpp"
#include "fraudkit/features.hpp"
#include "fraudkit/graphssl.hpp"
#include "fraudkit/imbalance.hpp"
#include "fraudkit/pipeline.hpp"
#include "fraudkit/rng.hpp"

namespace fraudkit::cli {

namespace {

using Clock = std::chrono::steady_clock;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty()) out.push_back(t);
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    require(used == s.size() && !s.empty(), ErrorKind::invalid_argument,
            "cannot parse " + what + " value '" + s + "'");
    return v;
}

double round10(double v) { return std::round(v * 1e10) / 1e10; }

CsvOptions csv_options(const CommonOptions& c) {
    CsvOptions o;
    o.label_column = c.label_col;
    if (!c.time_col.empty()) o.time_column = c.time_col;
    return o;
}

ForestParams forest_params(const ForestOptions& f, unsigned threads) {
    ForestParams p;
    p.n_trees = f.trees;
    p.max_depth = f.max_depth;
    p.min_leaf = f.min_leaf;
    p.n_features_per_split = f.mtry;
    p.threads = threads;
    require(p.n_trees >= 1, ErrorKind::invalid_argument, "--trees must be >= 1");
    require(p.min_leaf >= 1, ErrorKind::invalid_argument, "--min-leaf must be >= 1");
    return p;
}

Json common_json(const CommonOptions& c) {
    Json j;
    j["data"] = c.data;
    j["label_col"] = c.label_col;
    j["time_col"] = c.time_col;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    return j;
}

Json forest_json(const ForestOptions& f) {
    return Json{{"trees", f.trees}, {"max_depth", f.max_depth}, {"min_leaf", f.min_leaf}, {"mtry", f.mtry}};
}

Json counts_json(const ConfusionCounts& c) {
    return Json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

Json metrics_json(const MetricReport& m) {
    Json j;
    j["accuracy"] = m.accuracy;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    j["auc"] = m.auc ? Json(*m.auc) : Json(nullptr);
    j["counts"] = counts_json(m.counts);
    return j;
}

Json phase_json(const PhaseSummary& p) {
    return Json{{"mean_f1", p.mean_f1}, {"std_f1", p.std_f1}, {"frame_std", p.frame_std},
                {"frames", p.frames}, {"degenerate_frames", p.degenerate_frames}};
}

void add_timing(Json& report, const CommonOptions& c, Clock::time_point start) {
    if (!c.timing) return;
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    report["wall_seconds"] = static_cast<long long>(std::llround(secs));
}

LabeledDataset load(const CommonOptions& c) {
    require(!c.data.empty(), ErrorKind::invalid_argument, "--data is required");
    auto ds = load_csv(c.data, csv_options(c));
    ds.validate();
    return ds;
}

} // namespace

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(parse_double(item, what));
    return out;
}

std::vector<double> parse_p_values(const std::string& text, double step) {
    std::vector<double> out;
    const auto range = text.find("..");
    if (range != std::string::npos) {
        const double lo = parse_double(trim(text.substr(0, range)), "--p");
        const double hi = parse_double(trim(text.substr(range + 2)), "--p");
        require(step > 0.0, ErrorKind::invalid_argument, "--p-step must be positive");
        require(hi >= lo, ErrorKind::invalid_argument, "--p range is empty");
        const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
        for (long long i = 0; i <= count; ++i) out.push_back(round10(lo + static_cast<double>(i) * step));
    } else {
        for (double v : parse_number_list(text, "--p")) out.push_back(round10(v));
    }
    require(!out.empty(), ErrorKind::invalid_argument, "--p lists no values");
    for (double p : out)
        require(p >= 1.0 && std::isfinite(p), ErrorKind::invalid_argument,
                "p must be >= 1, got " + std::to_string(p));
    return out;
}

Json run_ksub(const CommonOptions& common, const KsubOptions& opt) {
    const auto start = Clock::now();
    require(opt.k >= 1, ErrorKind::invalid_argument, "--k must be >= 1");
    require(opt.folds >= 2, ErrorKind::invalid_argument, "--folds must be >= 2");
    const auto forest = forest_params(opt.forest, common.threads);
    const auto ds = load(common);

    const auto cv = cross_validate_ksub(ds, opt.k, opt.folds, forest, common.seed);

    Json report;
    report["command"] = "ksub";
    Json cfg = common_json(common);
    cfg["k"] = opt.k;
    cfg["folds"] = opt.folds;
    cfg["forest"] = forest_json(opt.forest);
    report["config"] = cfg;
    report["rows"] = ds.size();
    report["positives"] = ds.count_label(1);
    Json folds = Json::array();
    for (std::size_t f = 0; f < cv.folds.size(); ++f) {
        Json fj = metrics_json(cv.folds[f]);
        fj["fold"] = f;
        folds.push_back(fj);
    }
    report["folds"] = folds;
    report["mean_f1"] = cv.mean_f1;
    report["std_f1"] = cv.std_f1;
    add_timing(report, common, start);
    return report;
}

Json run_graphssl(const CommonOptions& common, const GraphOptions& opt) {
    const auto start = Clock::now();
    GraphExperimentConfig cfg;
    cfg.p_values = parse_p_values(opt.p, opt.p_step);
    cfg.knn = opt.knn;
    cfg.t = opt.t;
    cfg.solver.mu = opt.mu;
    cfg.solver.epsilon = opt.epsilon;
    cfg.solver.max_iters = opt.max_iters;
    cfg.solver.tol = opt.tol;
    cfg.solver.validate();
    cfg.test_count = opt.test_count;
    cfg.split_seed = derive_seed(common.seed, 0x73706c6974ULL);
    require(opt.undersample == "cluster-centroids" || opt.undersample == "random" ||
                opt.undersample == "none",
            ErrorKind::invalid_argument, "--undersample must be cluster-centroids, random or none");

    const auto raw = load(common);
    LabeledDataset ds;
    if (opt.undersample == "cluster-centroids")
        ds = cluster_centroids(raw, opt.ratio, KMeansParams{}, derive_seed(common.seed, 0x63656e74ULL));
    else if (opt.undersample == "random")
        ds = random_undersample(raw, opt.ratio, derive_seed(common.seed, 0x72616e64ULL));
    else
        ds = raw;

    const auto res = run_graph_experiment(ds, cfg);

    Json report;
    report["command"] = "graphssl";
    Json c = common_json(common);
    c["p"] = cfg.p_values;
    c["mu"] = opt.mu;
    c["t"] = opt.t;
    c["knn"] = opt.knn;
    c["undersample"] = opt.undersample;
    c["ratio"] = opt.ratio;
    c["epsilon"] = opt.epsilon;
    c["max_iters"] = opt.max_iters;
    c["tol"] = opt.tol;
    c["test_count"] = res.test_count;
    report["config"] = c;
    report["rows"] = ds.size();
    report["train_rows"] = res.train_count;
    report["test_rows"] = res.test_count;
    report["graph_edges"] = res.n_edges;
    Json rows = Json::array();
    for (const auto& r : res.rows) {
        Json rj;
        rj["p"] = r.p;
        rj["accuracy"] = r.test.accuracy;
        rj["iterations"] = r.iterations;
        rj["converged"] = r.converged;
        rj["test"] = metrics_json(r.test);
        rows.push_back(rj);
    }
    report["results"] = rows;
    add_timing(report, common, start);
    return report;
}

Json run_pipeline_command(const CommonOptions& common_in, const PipelineOptions& opt) {
    const auto start = Clock::now();
    CommonOptions common = common_in;
    if (common.time_col.empty()) common.time_col = "Time";

    std::vector<int> windows;
    for (double w : parse_number_list(opt.windows, "--windows")) {
        require(w >= 1 && w == std::floor(w), ErrorKind::invalid_argument,
                "--windows entries must be positive integers");
        windows.push_back(static_cast<int>(w));
    }
    require(!windows.empty(), ErrorKind::invalid_argument, "--windows lists no values");
    require(opt.update == "both" || opt.update == "never" || opt.update == "daily",
            ErrorKind::invalid_argument, "--update must be daily, never or both");

    PipelineConfig cfg;
    cfg.n_frames = opt.frames;
    cfg.train_frames = opt.train_frames;
    cfg.k_segments = opt.k;
    cfg.folds = opt.folds;
    cfg.forest = forest_params(opt.forest, common.threads);
    cfg.seed = common.seed;
    cfg.horizons.clear();
    for (int w : windows) cfg.horizons.push_back({w, UpdateStrategy::every_frame});
    cfg.validate();

    const auto ds = load(common);

    std::vector<UpdateStrategy> strategies;
    if (opt.update != "daily") strategies.push_back(UpdateStrategy::never);
    if (opt.update != "never") strategies.push_back(UpdateStrategy::every_frame);

    Json table = Json::array();
    std::ostringstream log;
    log << "strategy,fold,frame,phase,rows,positives,degenerate,model,trained_first,trained_last,"
           "f1,precision,recall,accuracy\n";
    auto put = [&log](double v) {
        std::ostringstream s;
        s.precision(17);
        s << v;
        log << s.str();
    };
    std::vector<PipelineResult> runs;
    for (auto strategy : strategies) {
        PipelineConfig run_cfg = cfg;
        for (auto& h : run_cfg.horizons) h.update = strategy;
        runs.push_back(run_pipeline(ds, run_cfg));
        const auto& res = runs.back();
        for (const auto& fr : res.frames) {
            auto row = [&](const std::string& model, const MetricReport& m, int first, int last) {
                log << to_string(strategy) << ',' << fr.fold << ',' << fr.frame << ','
                    << (fr.test_phase ? "test" : "train") << ',' << fr.rows << ',' << fr.positives
                    << ',' << (fr.degenerate ? 1 : 0) << ',' << model << ',' << first << ',' << last
                    << ',';
                put(m.f1);
                log << ',';
                put(m.precision);
                log << ',';
                put(m.recall);
                log << ',';
                put(m.accuracy);
                log << '\n';
            };
            for (std::size_t h = 0; h < fr.horizons.size(); ++h)
                row(std::to_string(run_cfg.horizons[h].window_frames), fr.horizons[h],
                    fr.trained_on[h].first, fr.trained_on[h].second);
            if (fr.ensemble) row("ensemble", *fr.ensemble, -1, -1);
        }
    }
    auto summary_json = [](const std::string& model, const HorizonSummary& s) {
        Json j;
        j["model"] = model;
        j["strategy"] = to_string(s.update);
        j["updates_on_test"] = s.updates;
        j["train"] = phase_json(s.train);
        j["test"] = phase_json(s.test);
        return j;
    };
    for (std::size_t w = 0; w < windows.size(); ++w)
        for (const auto& res : runs)
            table.push_back(summary_json(std::to_string(windows[w]), res.horizons[w]));
    for (const auto& res : runs)
        if (res.ensemble) table.push_back(summary_json("ensemble", *res.ensemble));

    std::string log_path = opt.frame_log;
    if (log_path.empty() && !common.out.empty()) log_path = common.out + ".frames.csv";
    if (!log_path.empty()) {
        std::ofstream f(log_path, std::ios::binary);
        require(static_cast<bool>(f), ErrorKind::io_failure, "cannot write " + log_path);
        f << log.str();
    }

    Json report;
    report["command"] = "pipeline";
    Json c = common_json(common);
    c["frames"] = opt.frames;
    c["train_frames"] = opt.train_frames;
    c["windows"] = windows;
    c["update"] = opt.update;
    c["k"] = opt.k;
    c["folds"] = opt.folds;
    c["forest"] = forest_json(opt.forest);
    report["config"] = c;
    report["rows"] = ds.size();
    report["positives"] = ds.count_label(1);
    report["frame_boundaries"] = runs.front().frame_boundaries;
    report["summary"] = table;
    add_timing(report, common, start);
    return report;
}

Json run_aggregate(const CommonOptions& common_in, const AggregateOptions& opt) {
    CommonOptions common = common_in;
    if (common.time_col.empty()) common.time_col = "Time";
    AggregationSpec spec;
    spec.group_by = opt.group_by;
    spec.windows_hours = parse_number_list(opt.windows, "--windows");
    spec.functions.clear();
    for (const auto& name : split_list(opt.functions)) spec.functions.push_back(parse_aggregate_fn(name));
    require(!spec.group_by.empty(), ErrorKind::invalid_argument, "--group-by is required");
    spec.validate();

    const auto ds = load(common);
    const auto out = aggregate(ds, opt.amount_col, spec);
    const std::string csv = format_csv(out, csv_options(common));
    if (common.out.empty()) {
        std::cout << csv;
    } else {
        std::ofstream f(common.out, std::ios::binary);
        require(static_cast<bool>(f), ErrorKind::io_failure, "cannot write " + common.out);
        f << csv;
    }

    Json summary;
    summary["command"] = "aggregate";
    summary["rows"] = out.size();
    summary["added_columns"] = out.n_features() - ds.n_features();
    return summary;
}

} // namespace fraudkit::cli
