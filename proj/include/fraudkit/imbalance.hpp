#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fraudkit/dataset.hpp"
#include "fraudkit/forest.hpp"
#include "fraudkit/kmeans.hpp"
#include "fraudkit/metrics.hpp"

namespace fraudkit {

/// Disjoint cover of the majority-class row indices by K segments whose sizes
/// differ by at most one (the first |majority| mod K segments hold one extra).
struct SegmentPartition {
    std::vector<std::vector<std::size_t>> segments;
    int majority_label = 0;

    std::size_t k() const noexcept { return segments.size(); }
};

/// The class with more rows; label 0 on a tie.
int majority_label(std::span<const int> labels);

SegmentPartition partition_majority(const LabeledDataset& ds, int k, std::uint64_t seed);

/// Rows of the training set of member `member`: its segment, then every
/// minority row in ascending order.
std::vector<std::size_t> member_training_rows(const SegmentPartition& partition,
                                              std::span<const int> labels, std::size_t member);

enum class VoteRule {
    mean_probability, ///< mean of member scores, class 1 iff mean >= 0.5
};

struct KSubPrediction {
    int label = 0;
    double score = 0.0;
};

/// K-Segments Under Bagging: one forest per majority segment, each trained on
/// that segment merged with the whole minority class.
struct KSubEnsemble {
    std::vector<ForestModel> members;
    VoteRule vote = VoteRule::mean_probability;
    std::size_t n_features = 0;

    KSubPrediction predict(std::span<const double> x) const;
    std::vector<double> scores(const Matrix& x) const;
};

/// Combines per-member scores under the vote rule; exposed so the rule can be
/// checked without trained forests.
KSubPrediction combine_votes(std::span<const double> member_scores, VoteRule rule);

KSubEnsemble train_ksub(const LabeledDataset& ds, int k, const ForestParams& forest,
                        std::uint64_t seed);
inline KSubPrediction predict_ksub(const KSubEnsemble& e, std::span<const double> x) {
    return e.predict(x);
}

/// Keeps every minority row and ceil(|minority| / ratio) majority rows drawn
/// without replacement. Output rows keep their original relative order.
LabeledDataset random_undersample(const LabeledDataset& ds, double ratio, std::uint64_t seed);

/// Majority rows replaced by the k-means centroids of the majority class with
/// k = ceil(|minority| / ratio). Minority rows come first, verbatim and in
/// original order, followed by the centroids labelled as majority. Features
/// are used unscaled. Timestamps are dropped.
LabeledDataset cluster_centroids(const LabeledDataset& ds, double ratio,
                                 const KMeansParams& kmeans_params, std::uint64_t seed);

/// Majority rows that a given minority/majority ratio asks for.
std::size_t undersample_target(std::size_t minority, double ratio);

/// Under Bagging baseline: `bags` forests, each on all minority rows plus
/// |minority| majority rows drawn with replacement. Used only as a reference
/// point in evaluations.
KSubEnsemble train_under_bagging(const LabeledDataset& ds, int bags, const ForestParams& forest,
                                 std::uint64_t seed);

struct CrossValidationResult {
    std::vector<MetricReport> folds;
    double mean_f1 = 0.0;
    double std_f1 = 0.0;
    std::vector<double> fold_seconds;
};

/// Stratified k-fold evaluation of K-SUB: member forests are trained on the
/// training folds and scored on the held-out fold.
CrossValidationResult cross_validate_ksub(const LabeledDataset& ds, int k_segments, int folds,
                                          const ForestParams& forest, std::uint64_t seed);

/// Mean and sample standard deviation (denominator n-1; 0 when n < 2).
std::pair<double, double> mean_std(std::span<const double> values);

} // namespace fraudkit
