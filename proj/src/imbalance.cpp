#include "fraudkit/imbalance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "fraudkit/parallel.hpp"
#include "fraudkit/rng.hpp"

namespace fraudkit {

namespace {

std::vector<std::size_t> rows_with_label(std::span<const int> labels, int label) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) out.push_back(i);
    return out;
}

} // namespace

int majority_label(std::span<const int> labels) {
    const auto ones = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    return ones > labels.size() - ones ? 1 : 0;
}

SegmentPartition partition_majority(const LabeledDataset& ds, int k, std::uint64_t seed) {
    require(k >= 1, ErrorKind::invalid_argument, "K must be >= 1");
    SegmentPartition part;
    part.majority_label = majority_label(ds.labels);
    auto major = rows_with_label(ds.labels, part.majority_label);
    require(major.size() >= static_cast<std::size_t>(k), ErrorKind::insufficient_data,
            "K=" + std::to_string(k) + " exceeds majority class size " + std::to_string(major.size()));

    Rng rng(derive_seed(seed, 0x7365676d656e74ULL));
    shuffle(std::span<std::size_t>(major), rng);

    const std::size_t base = major.size() / static_cast<std::size_t>(k);
    const std::size_t extra = major.size() % static_cast<std::size_t>(k);
    part.segments.resize(static_cast<std::size_t>(k));
    auto it = major.begin();
    for (std::size_t s = 0; s < part.segments.size(); ++s) {
        const std::size_t len = base + (s < extra ? 1 : 0);
        part.segments[s].assign(it, it + static_cast<std::ptrdiff_t>(len));
        it += static_cast<std::ptrdiff_t>(len);
    }
    return part;
}

std::vector<std::size_t> member_training_rows(const SegmentPartition& partition,
                                              std::span<const int> labels, std::size_t member) {
    require(member < partition.k(), ErrorKind::invalid_argument, "member index out of range");
    std::vector<std::size_t> rows = partition.segments[member];
    const auto minority = rows_with_label(labels, 1 - partition.majority_label);
    rows.insert(rows.end(), minority.begin(), minority.end());
    return rows;
}

KSubPrediction combine_votes(std::span<const double> member_scores, VoteRule rule) {
    require(!member_scores.empty(), ErrorKind::invalid_argument, "no member scores to combine");
    switch (rule) {
    case VoteRule::mean_probability: {
        // summed in sorted order so the result does not depend on member order
        std::vector<double> sorted(member_scores.begin(), member_scores.end());
        std::sort(sorted.begin(), sorted.end());
        double sum = 0.0;
        for (double s : sorted) sum += s;
        KSubPrediction p;
        p.score = sum / static_cast<double>(sorted.size());
        p.label = p.score >= 0.5 ? 1 : 0;
        return p;
    }
    }
    fail(ErrorKind::invalid_argument, "unknown vote rule");
}

KSubPrediction KSubEnsemble::predict(std::span<const double> x) const {
    require(x.size() == n_features, ErrorKind::dimension_mismatch,
            "expected " + std::to_string(n_features) + " features, got " + std::to_string(x.size()));
    std::vector<double> member_scores;
    member_scores.reserve(members.size());
    for (const auto& m : members) member_scores.push_back(m.predict_proba(x));
    return combine_votes(member_scores, vote);
}

std::vector<double> KSubEnsemble::scores(const Matrix& x) const {
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i)).score;
    return out;
}

KSubEnsemble train_ksub(const LabeledDataset& ds, int k, const ForestParams& forest,
                        std::uint64_t seed) {
    const std::size_t pos = ds.count_label(1);
    require(pos > 0 && pos < ds.size(), ErrorKind::insufficient_data,
            "K-SUB needs both classes present");
    const auto part = partition_majority(ds, k, seed);

    KSubEnsemble ens;
    ens.n_features = ds.n_features();
    ens.members.resize(part.k());
    // members are trained one after another; the forest fans out over trees
    for (std::size_t m = 0; m < part.k(); ++m) {
        const auto rows = member_training_rows(part, ds.labels, m);
        ens.members[m] = train_forest(ds.subset(rows), forest, derive_seed(seed, 1000 + m));
    }
    return ens;
}

KSubEnsemble train_under_bagging(const LabeledDataset& ds, int bags, const ForestParams& forest,
                                 std::uint64_t seed) {
    require(bags >= 1, ErrorKind::invalid_argument, "bags must be >= 1");
    const int major_label = majority_label(ds.labels);
    const auto major = rows_with_label(ds.labels, major_label);
    const auto minor = rows_with_label(ds.labels, 1 - major_label);
    require(!minor.empty() && !major.empty(), ErrorKind::insufficient_data,
            "under bagging needs both classes present");

    KSubEnsemble ens;
    ens.n_features = ds.n_features();
    for (int b = 0; b < bags; ++b) {
        Rng rng(derive_seed(seed, 5000 + static_cast<std::uint64_t>(b)));
        std::vector<std::size_t> rows = minor;
        for (std::size_t i = 0; i < minor.size(); ++i)
            rows.push_back(major[uniform_index(rng, major.size())]);
        ens.members.push_back(
            train_forest(ds.subset(rows), forest, derive_seed(seed, 6000 + static_cast<std::uint64_t>(b))));
    }
    return ens;
}

std::size_t undersample_target(std::size_t minority, double ratio) {
    require(ratio > 0.0 && std::isfinite(ratio), ErrorKind::invalid_argument,
            "undersampling ratio must be positive");
    const double exact = static_cast<double>(minority) / ratio;
    // 492 / 0.4 must give 1230, not 1231, despite 0.4 being inexact
    return static_cast<std::size_t>(std::ceil(exact * (1.0 - 1e-12)));
}

LabeledDataset random_undersample(const LabeledDataset& ds, double ratio, std::uint64_t seed) {
    const int major_label = majority_label(ds.labels);
    auto major = rows_with_label(ds.labels, major_label);
    const auto minor = rows_with_label(ds.labels, 1 - major_label);
    require(!minor.empty(), ErrorKind::insufficient_data, "minority class is empty");
    const std::size_t keep = undersample_target(minor.size(), ratio);
    require(keep <= major.size(), ErrorKind::insufficient_data,
            "ratio asks for " + std::to_string(keep) + " majority rows but only " +
                std::to_string(major.size()) + " exist");

    Rng rng(derive_seed(seed, 0x72616e646f6dULL));
    shuffle(std::span<std::size_t>(major), rng);
    std::vector<std::size_t> rows = minor;
    rows.insert(rows.end(), major.begin(), major.begin() + static_cast<std::ptrdiff_t>(keep));
    std::sort(rows.begin(), rows.end());
    return ds.subset(rows);
}

LabeledDataset cluster_centroids(const LabeledDataset& ds, double ratio,
                                 const KMeansParams& kmeans_params, std::uint64_t seed) {
    const int major_label = majority_label(ds.labels);
    const auto major = rows_with_label(ds.labels, major_label);
    const auto minor = rows_with_label(ds.labels, 1 - major_label);
    require(!minor.empty(), ErrorKind::insufficient_data, "minority class is empty");
    const std::size_t k = undersample_target(minor.size(), ratio);
    require(k >= 1 && k <= major.size(), ErrorKind::insufficient_data,
            "ratio asks for " + std::to_string(k) + " centroids but only " +
                std::to_string(major.size()) + " majority rows exist");

    const LabeledDataset majority = ds.subset(major);
    const auto km = kmeans(majority.features, k, kmeans_params, seed);

    LabeledDataset out = ds.subset(minor);
    out.timestamps.reset();
    for (std::size_t c = 0; c < k; ++c) {
        out.features.append_row(km.centroids.row(c));
        out.labels.push_back(major_label);
    }
    return out;
}

std::pair<double, double> mean_std(std::span<const double> values) {
    if (values.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

CrossValidationResult cross_validate_ksub(const LabeledDataset& ds, int k_segments, int folds,
                                          const ForestParams& forest, std::uint64_t seed) {
    const auto assignment = stratified_kfold(ds, folds, seed);
    CrossValidationResult res;
    std::vector<double> f1s;
    for (int f = 0; f < folds; ++f) {
        const auto start = std::chrono::steady_clock::now();
        const auto train_rows = assignment.train_indices(f);
        const auto test_rows = assignment.test_indices(f);
        const auto model = train_ksub(ds.subset(train_rows), k_segments, forest,
                                      derive_seed(seed, 100 + static_cast<std::uint64_t>(f)));
        const auto test = ds.subset(test_rows);
        std::vector<int> preds(test.size());
        std::vector<double> scores(test.size());
        for (std::size_t i = 0; i < test.size(); ++i) {
            const auto p = model.predict(test.features.row(i));
            preds[i] = p.label;
            scores[i] = p.score;
        }
        res.folds.push_back(evaluate(test.labels, preds, scores));
        f1s.push_back(res.folds.back().f1);
        res.fold_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    std::tie(res.mean_f1, res.std_f1) = mean_std(f1s);
    return res;
}

} // namespace fraudkit
