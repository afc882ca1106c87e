#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fraudkit/matrix.hpp"

namespace fraudkit {

/// Feature matrix with binary labels (1 = fraud / minority) and optional
/// per-sample timestamps in seconds.
struct LabeledDataset {
    Matrix features;
    std::vector<int> labels;
    std::optional<std::vector<double>> timestamps;
    std::vector<std::string> feature_names;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t n_features() const noexcept { return features.cols(); }
    std::size_t count_label(int label) const;

    /// Throws Error if any structural invariant is broken: row/label/timestamp
    /// counts, binary labels, at least one feature, all values finite.
    void validate() const;

    /// Rows `indices` (repeats allowed) in the given order.
    LabeledDataset subset(std::span<const std::size_t> indices) const;

    /// Index of a named feature column, or nullopt.
    std::optional<std::size_t> feature_index(const std::string& name) const;
};

struct CsvOptions {
    std::string label_column = "Class";
    std::optional<std::string> time_column;
};

/// Reads a headered CSV with '.' decimals. Every column other than the label
/// and time columns becomes a feature, in header order. Surrounding double
/// quotes on headers and cells are stripped.
LabeledDataset load_csv(const std::filesystem::path& path, const CsvOptions& options);

/// Same parser over in-memory text; `source` names the input in messages.
LabeledDataset parse_csv(const std::string& text, const CsvOptions& options,
                         const std::string& source = "<memory>");

/// Writes features, then the label column, then the time column if present.
/// Doubles are printed in shortest round-trip form.
void write_csv(const std::filesystem::path& path, const LabeledDataset& ds,
               const CsvOptions& options);
std::string format_csv(const LabeledDataset& ds, const CsvOptions& options);

struct FoldAssignment {
    std::vector<int> fold_of;
    int k = 0;

    std::vector<std::size_t> test_indices(int fold) const;
    std::vector<std::size_t> train_indices(int fold) const;
};

/// Each class is shuffled independently with the seed and dealt round-robin;
/// the negatives continue the deal where the positives stopped so that fold
/// sizes are also balanced to within one.
FoldAssignment stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed);
inline FoldAssignment stratified_kfold(const LabeledDataset& ds, int k, std::uint64_t seed) {
    return stratified_kfold(ds.labels, k, seed);
}

struct HoldoutSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Random stratified train/test split with exactly `test_count` test rows.
/// Per-class test counts follow the class proportions (largest remainder).
HoldoutSplit stratified_holdout(std::span<const int> labels, std::size_t test_count,
                                std::uint64_t seed);

struct TimeFrameSplit {
    std::vector<int> frame_of;
    int n_frames = 0;
    std::vector<double> boundaries; // n_frames + 1 entries

    std::vector<std::size_t> members(int frame) const;
};

/// Equal-duration half-open frames [b_i, b_{i+1}) over the timestamp range;
/// the maximum timestamp is clamped into the last frame.
TimeFrameSplit split_time_frames(const LabeledDataset& ds, int n_frames);

} // namespace fraudkit
