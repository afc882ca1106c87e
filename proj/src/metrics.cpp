#include "fraudkit/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "fraudkit/error.hpp"

namespace fraudkit {

namespace {

void require_binary(std::span<const int> v, const char* what) {
    for (int x : v)
        require(x == 0 || x == 1, ErrorKind::non_binary_label,
                std::string(what) + " must be 0/1, got " + std::to_string(x));
}

double ratio_or_zero(std::size_t num, std::size_t den) noexcept {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

ConfusionCounts confusion(std::span<const int> labels, std::span<const int> predictions) {
    require(labels.size() == predictions.size(), ErrorKind::dimension_mismatch,
            "labels and predictions differ in length");
    require_binary(labels, "labels");
    require_binary(predictions, "predictions");
    ConfusionCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) (predictions[i] == 1 ? c.tp : c.fn)++;
        else (predictions[i] == 1 ? c.fp : c.tn)++;
    }
    return c;
}

PrecisionRecallF1 precision_recall_f1(const ConfusionCounts& c) noexcept {
    PrecisionRecallF1 out;
    out.precision = ratio_or_zero(c.tp, c.tp + c.fp);
    out.recall = ratio_or_zero(c.tp, c.tp + c.fn);
    const double denom = out.precision + out.recall;
    out.f1 = denom == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / denom;
    return out;
}

double f_beta(double precision, double recall, double beta) {
    require(beta > 0.0, ErrorKind::invalid_argument, "beta must be positive");
    require(precision >= 0.0 && precision <= 1.0 && recall >= 0.0 && recall <= 1.0,
            ErrorKind::invalid_argument, "precision and recall must lie in [0,1]");
    const double b2 = beta * beta;
    const double denom = b2 * precision + recall;
    return denom == 0.0 ? 0.0 : (1.0 + b2) * precision * recall / denom;
}

double accuracy(std::span<const int> labels, std::span<const int> predictions) {
    require(!labels.empty(), ErrorKind::invalid_argument, "accuracy of empty input");
    return accuracy(confusion(labels, predictions));
}

double accuracy(const ConfusionCounts& c) {
    require(c.total() > 0, ErrorKind::invalid_argument, "accuracy of empty input");
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double roc_auc(std::span<const int> labels, std::span<const double> scores) {
    require(labels.size() == scores.size(), ErrorKind::dimension_mismatch,
            "labels and scores differ in length");
    require_binary(labels, "labels");
    const std::size_t n = labels.size();
    const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const std::size_t n_neg = n - n_pos;
    require(n_pos > 0 && n_neg > 0, ErrorKind::insufficient_data,
            "AUC needs both classes present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // sum of (1-based, tie-averaged) ranks of the positives
    double pos_rank_sum = 0.0;
    for (std::size_t lo = 0; lo < n;) {
        std::size_t hi = lo;
        while (hi < n && scores[order[hi]] == scores[order[lo]]) ++hi;
        const double avg_rank = 0.5 * static_cast<double>(lo + 1 + hi);
        for (std::size_t k = lo; k < hi; ++k)
            if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
        lo = hi;
    }
    const double np = static_cast<double>(n_pos);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

MetricReport evaluate(std::span<const int> labels, std::span<const int> predictions,
                      std::span<const double> scores) {
    MetricReport r;
    r.counts = confusion(labels, predictions);
    r.accuracy = accuracy(r.counts);
    const auto prf = precision_recall_f1(r.counts);
    r.precision = prf.precision;
    r.recall = prf.recall;
    r.f1 = prf.f1;
    if (!scores.empty()) {
        const std::size_t pos = r.counts.tp + r.counts.fn;
        if (pos > 0 && pos < labels.size()) r.auc = roc_auc(labels, scores);
    }
    return r;
}

} // namespace fraudkit
