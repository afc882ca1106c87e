#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace fraudkit::cli {

using Json = nlohmann::ordered_json;

struct CommonOptions {
    std::string data;
    std::string label_col = "Class";
    std::string time_col;
    std::uint64_t seed = 0;
    std::string out;
    unsigned threads = 1;
    bool timing = false;
};

struct ForestOptions {
    int trees = 100;
    int max_depth = -1;
    std::size_t min_leaf = 1;
    std::size_t mtry = 0;
};

struct KsubOptions {
    int k = 3;
    int folds = 5;
    ForestOptions forest;
};

struct GraphOptions {
    std::string p = "1.0..2.0";
    double p_step = 0.1;
    double mu = 1.0;
    double t = 0.1;
    std::size_t knn = 5;
    std::string undersample = "cluster-centroids";
    double ratio = 0.4;
    double epsilon = 1e-10;
    int max_iters = 1000;
    double tol = 1e-6;
    std::size_t test_count = 0;
};

struct PipelineOptions {
    int frames = 48;
    int train_frames = 24;
    std::string windows = "1,2,3";
    std::string update = "both";
    int k = 5;
    int folds = 5;
    std::string frame_log;
    ForestOptions forest;
};

struct AggregateOptions {
    std::string group_by;
    std::string amount_col = "Amount";
    std::string windows = "1,3,6,12,18,24,72,168";
    std::string functions = "avg,sum,count";
};

/// Expands "2", "1.0,1.5,2" or "1.0..2.0" (with `step`) into p values rounded
/// to 10 decimals.
std::vector<double> parse_p_values(const std::string& text, double step);
std::vector<double> parse_number_list(const std::string& text, const std::string& what);

Json run_ksub(const CommonOptions& common, const KsubOptions& opt);
Json run_graphssl(const CommonOptions& common, const GraphOptions& opt);
/// Also writes the per-frame CSV log when a path is resolved.
Json run_pipeline_command(const CommonOptions& common, const PipelineOptions& opt);
/// Writes the augmented CSV to common.out (stdout when empty) and returns a
/// short summary.
Json run_aggregate(const CommonOptions& common, const AggregateOptions& opt);

/// Entry point shared by the executable; returns the process exit code.
int main_entry(int argc, char** argv);

} // namespace fraudkit::cli
