#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fraudkit/dataset.hpp"
#include "fraudkit/forest.hpp"
#include "fraudkit/imbalance.hpp"
#include "fraudkit/metrics.hpp"

namespace fraudkit {

enum class UpdateStrategy { never, every_frame };

/// "never" or "daily"
const char* to_string(UpdateStrategy s) noexcept;
/// Accepts "never", "daily", "every_frame".
UpdateStrategy parse_update_strategy(const std::string& name);

struct HorizonSpec {
    int window_frames = 1;
    UpdateStrategy update = UpdateStrategy::every_frame;
};

struct PipelineConfig {
    int n_frames = 48;
    int train_frames = 24;
    std::vector<HorizonSpec> horizons{{1, UpdateStrategy::every_frame},
                                      {2, UpdateStrategy::every_frame},
                                      {3, UpdateStrategy::every_frame}};
    int k_segments = 5;
    ForestParams forest;
    int folds = 5; ///< 1 scores every row with models trained on every row
    std::uint64_t seed = 0;

    void validate() const;
};

/// Model used for one horizon over one training window. A window without one
/// of the classes yields a constant scorer.
struct WindowModel {
    std::optional<KSubEnsemble> ensemble;
    double constant_score = 0.0;
    int first_frame = 0;
    int last_frame = -1;

    double score(std::span<const double> x) const;
};

struct FrameRecord {
    int fold = 0;
    int frame = 0;
    bool test_phase = false;
    bool degenerate = false; ///< no fraud among the scored rows
    std::size_t rows = 0;
    std::size_t positives = 0;
    std::vector<MetricReport> horizons;
    /// training window [first, last] of the model each horizon scored with
    std::vector<std::pair<int, int>> trained_on;
    std::optional<MetricReport> ensemble; ///< present with >= 2 horizons
};

struct PhaseSummary {
    double mean_f1 = 0.0;   ///< mean over folds of the per-fold frame-average F1
    double std_f1 = 0.0;    ///< sample std of the per-fold averages
    double frame_std = 0.0; ///< sample std over all scored (fold, frame) F1 values
    std::size_t frames = 0;
    std::size_t degenerate_frames = 0;
};

struct HorizonSummary {
    int window_frames = 0;
    UpdateStrategy update = UpdateStrategy::every_frame;
    PhaseSummary train;
    PhaseSummary test;
    int updates = 0; ///< retrains during the testing phase
};

struct PipelineResult {
    std::vector<FrameRecord> frames;
    std::vector<HorizonSummary> horizons;
    std::optional<HorizonSummary> ensemble;
    std::vector<double> frame_boundaries;
};

/// Scores every frame from the longest window onwards. During the first
/// `train_frames` frames every horizon uses a model trained on the frames
/// just before the scored one. Afterwards every_frame horizons keep retraining
/// on the `window` frames preceding the scored frame, while never horizons
/// keep the model trained on the window ending at frame train_frames - 1.
PipelineResult run_pipeline(const LabeledDataset& ds, const PipelineConfig& cfg);

/// Row of the never/daily comparison table.
struct StrategyRow {
    std::string model; ///< window length, or "ensemble"
    HorizonSummary summary;
};

/// Runs the pipeline once per strategy with every listed window and returns
/// window x strategy rows followed by one ensemble row per strategy.
std::vector<StrategyRow> compare_update_strategies(const LabeledDataset& ds,
                                                   const PipelineConfig& base,
                                                   const std::vector<int>& windows);

struct SyntheticStreamConfig {
    int n_frames = 48;
    std::size_t rows_per_frame = 200;
    std::size_t n_features = 4;
    double fraud_threshold = 1.2816; ///< fraud iff x0 > threshold (about 10%)
    int flip_frame = -1;             ///< from this frame on fraud iff x0 < -threshold
    double label_noise = 0.0;        ///< probability of flipping a label
    std::uint64_t seed = 0;
};

/// Gaussian features; frame f occupies [3600 f, 3600 (f+1)) seconds so that
/// equal-width frame splitting recovers the generating frames.
LabeledDataset make_synthetic_stream(const SyntheticStreamConfig& cfg);

} // namespace fraudkit
