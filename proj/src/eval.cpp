#include "cyanocast/eval.hpp"

#include <algorithm>
#include <numeric>

#include "cyanocast/errors.hpp"

namespace cyano {

std::vector<std::uint8_t> binarize(const std::vector<double>& probs,
                                   double threshold) {
    std::vector<std::uint8_t> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i)
        out[i] = probs[i] > threshold ? 1 : 0;
    return out;
}

void ConfusionCounts::add(std::uint8_t pred, std::uint8_t target) {
    if (pred && target)
        ++tp;
    else if (pred && !target)
        ++fp;
    else if (!pred && target)
        ++fn;
    else
        ++tn;
}

BasicMetrics metrics_from_counts(const ConfusionCounts& c) {
    BasicMetrics m;
    const std::size_t total = c.total();
    m.accuracy = total ? static_cast<double>(c.tp + c.tn) /
                             static_cast<double>(total)
                       : 0.0;
    if (c.tp + c.fp)
        m.precision = static_cast<double>(c.tp) /
                      static_cast<double>(c.tp + c.fp);
    else
        m.precision_degenerate = true;
    if (c.tp + c.fn)
        m.recall =
            static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    else
        m.recall_degenerate = true;
    if (m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    else
        m.f1_degenerate = true;
    return m;
}

BasicMetrics micro_metrics(const std::vector<std::uint8_t>& preds,
                           const std::vector<std::uint8_t>& targets) {
    if (preds.size() != targets.size())
        throw std::invalid_argument("micro_metrics: length mismatch");
    ConfusionCounts c;
    for (std::size_t i = 0; i < preds.size(); ++i)
        c.add(preds[i], targets[i]);
    return metrics_from_counts(c);
}

WeightedMetrics weighted_metrics(const std::vector<std::uint8_t>& preds,
                                 const std::vector<std::uint8_t>& targets,
                                 int n_classes) {
    if (preds.size() != targets.size())
        throw std::invalid_argument("weighted_metrics: length mismatch");
    if (n_classes < 1 || preds.size() % static_cast<std::size_t>(n_classes))
        throw std::invalid_argument(
            "weighted_metrics: slots do not tile the class count");
    WeightedMetrics out;
    double total_weight = 0.0;
    for (int cls = 0; cls < n_classes; ++cls) {
        ConfusionCounts c;
        for (std::size_t i = static_cast<std::size_t>(cls); i < preds.size();
             i += static_cast<std::size_t>(n_classes))
            c.add(preds[i], targets[i]);
        const double support = static_cast<double>(c.tp + c.fn);
        if (support == 0.0) continue;
        const BasicMetrics m = metrics_from_counts(c);
        out.precision += support * m.precision;
        out.recall += support * m.recall;
        out.f1 += support * m.f1;
        total_weight += support;
    }
    if (total_weight == 0.0) {
        out.degenerate = true;
        return out;
    }
    out.precision /= total_weight;
    out.recall /= total_weight;
    out.f1 /= total_weight;
    return out;
}

std::optional<double> auc_score(const std::vector<double>& scores,
                                const std::vector<std::uint8_t>& targets) {
    if (scores.size() != targets.size())
        throw std::invalid_argument("auc: length mismatch");
    std::size_t pos = 0;
    for (std::uint8_t t : targets) pos += t ? 1 : 0;
    const std::size_t neg = targets.size() - pos;
    if (pos == 0 || neg == 0) return std::nullopt;

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) {
                  return scores[a] < scores[b];
              });

    // Midranks: tied scores share the mean of their 1-based positions.
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() &&
               scores[order[j + 1]] == scores[order[i]])
            ++j;
        const double midrank =
            (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k)
            if (targets[order[k]]) pos_rank_sum += midrank;
        i = j + 1;
    }
    const double p = static_cast<double>(pos);
    const double n = static_cast<double>(neg);
    return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

PodValue pod_sample(const std::vector<std::uint8_t>& preds,
                    const std::vector<std::uint8_t>& targets) {
    if (preds.size() != targets.size() || targets.empty())
        throw std::invalid_argument("pod: bad block");
    std::size_t hits = 0, misses = 0, rejections = 0, negatives = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i]) {
            (preds[i] ? hits : misses) += 1;
        } else {
            ++negatives;
            if (!preds[i]) ++rejections;
        }
    }
    PodValue out;
    if (hits + misses > 0) {
        out.event_day = true;
        out.value = static_cast<double>(hits) /
                    static_cast<double>(hits + misses);
    } else {
        out.event_day = false;
        out.value = static_cast<double>(rejections) /
                    static_cast<double>(negatives);
    }
    return out;
}

std::vector<std::uint8_t> persistence_forecast(
    const std::array<std::uint8_t, kClassCount>& anchor_labels, int horizon) {
    if (horizon < 1)
        throw std::invalid_argument("persistence: horizon must be positive");
    std::vector<std::uint8_t> out;
    out.reserve(static_cast<std::size_t>(horizon) * kClassCount);
    for (int h = 0; h < horizon; ++h)
        out.insert(out.end(), anchor_labels.begin(), anchor_labels.end());
    return out;
}

std::vector<double> ensemble_mean(
    const std::vector<std::vector<double>>& member_probs) {
    if (member_probs.empty())
        throw std::invalid_argument("ensemble: no members");
    const std::size_t n = member_probs.front().size();
    std::vector<double> out(n, 0.0);
    for (const auto& member : member_probs) {
        if (member.size() != n)
            throw std::invalid_argument("ensemble: member size mismatch");
        for (std::size_t i = 0; i < n; ++i) out[i] += member[i];
    }
    for (double& v : out) v /= static_cast<double>(member_probs.size());
    return out;
}

}  // namespace cyano
