#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace fraudkit {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const noexcept { return tp + fp + fn + tn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
        tp += o.tp; fp += o.fp; fn += o.fn; tn += o.tn;
        return *this;
    }
    bool operator==(const ConfusionCounts&) const = default;
};

struct PrecisionRecallF1 {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct MetricReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::optional<double> auc;
    ConfusionCounts counts;
};

/// Positive class is 1. Both inputs must be binary and of equal length.
ConfusionCounts confusion(std::span<const int> labels, std::span<const int> predictions);

/// Zero denominators yield 0 for the affected quantity.
PrecisionRecallF1 precision_recall_f1(const ConfusionCounts& c) noexcept;

double f_beta(double precision, double recall, double beta);

double accuracy(std::span<const int> labels, std::span<const int> predictions);
double accuracy(const ConfusionCounts& c);

/// Mann-Whitney rank statistic: probability that a random positive outscores
/// a random negative, ties counted one half.
double roc_auc(std::span<const int> labels, std::span<const double> scores);

/// All metrics at once; AUC is filled when scores are given and both classes
/// are present.
MetricReport evaluate(std::span<const int> labels, std::span<const int> predictions,
                      std::span<const double> scores = {});

} // namespace fraudkit
