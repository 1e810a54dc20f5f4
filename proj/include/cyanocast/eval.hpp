#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cyanocast/dataset.hpp"

namespace cyano {

// Strict threshold: a probability exactly at the threshold maps to 0.
std::vector<std::uint8_t> binarize(const std::vector<double>& probs,
                                   double threshold = 0.5);

struct ConfusionCounts {
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    void add(std::uint8_t pred, std::uint8_t target);
    std::size_t total() const { return tp + tn + fp + fn; }
};

// Zero denominators yield 0 with the matching degenerate flag raised.
struct BasicMetrics {
    double accuracy = 0, precision = 0, recall = 0, f1 = 0;
    bool precision_degenerate = false;
    bool recall_degenerate = false;
    bool f1_degenerate = false;
    bool any_degenerate() const {
        return precision_degenerate || recall_degenerate || f1_degenerate;
    }
};

BasicMetrics metrics_from_counts(const ConfusionCounts& c);

// All prediction slots pooled into one confusion matrix.
BasicMetrics micro_metrics(const std::vector<std::uint8_t>& preds,
                           const std::vector<std::uint8_t>& targets);

// Support-weighted average of per-class metrics; slots interleave classes
// with the given stride. Classes without positives carry no weight; if no
// class has positives the result is 0 with the degenerate flag set.
struct WeightedMetrics {
    double precision = 0, recall = 0, f1 = 0;
    bool degenerate = false;
};

WeightedMetrics weighted_metrics(const std::vector<std::uint8_t>& preds,
                                 const std::vector<std::uint8_t>& targets,
                                 int n_classes);

// Rank-based area under the ROC curve with midranks for ties; absent when
// only one class is present.
std::optional<double> auc_score(const std::vector<double>& scores,
                                const std::vector<std::uint8_t>& targets);

// Probability of detection over one sample's label block. Days without any
// event fall back to the correct-rejection rate so the series is total.
struct PodValue {
    double value = 0;
    bool event_day = false;
};

PodValue pod_sample(const std::vector<std::uint8_t>& preds,
                    const std::vector<std::uint8_t>& targets);

// Repeats the anchor-day class vector across the whole horizon.
std::vector<std::uint8_t> persistence_forecast(
    const std::array<std::uint8_t, kClassCount>& anchor_labels, int horizon);

// Elementwise mean across member probability vectors.
std::vector<double> ensemble_mean(
    const std::vector<std::vector<double>>& member_probs);

}  // namespace cyano
