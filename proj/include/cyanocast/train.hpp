#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cyanocast/dataset.hpp"
#include "cyanocast/model.hpp"
#include "cyanocast/tensor.hpp"

namespace cyano {

struct TrainConfig {
    double lr = 5e-4;
    double weight_decay = 0.09;
    int epochs = 70;
    double restart_period = 5.0;
    double lr_min_ratio = 0.01;  // lr_min = lr * lr_min_ratio
    double clip_norm = 3.0;
    double label_smoothing = 0.05;
    double prob_floor = 1e-7;
    int batch_size = 32;
    int patience = 10;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const;
};

// Mean binary cross-entropy over every output slot. Targets are smoothed to
// y(1-eps) + eps/2 and probabilities clamped to [floor, 1-floor] before the
// logs, so the node is differentiable and finite everywhere.
nn::TensorPtr bce_loss(const nn::TensorPtr& probs,
                       const std::vector<std::uint8_t>& targets,
                       double label_smoothing, double prob_floor);

// Cosine annealing with warm restarts. `epoch` counts from zero and may be
// fractional; the cycle restarts at every multiple of the period, where the
// rate returns to cfg.lr.
double lr_schedule(double epoch, const TrainConfig& cfg);

// Global L2 clipping across all parameter gradients: when the joint norm
// exceeds max_norm every gradient is scaled by max_norm / norm. Returns the
// pre-clip norm.
double clip_gradients(const std::vector<nn::TensorPtr>& params,
                      double max_norm);

// AdamW with decoupled decay: the value shrinks by lr*wd*value before the
// bias-corrected adaptive update, so decay never routes through the moments.
class AdamW {
  public:
    AdamW(const std::vector<nn::TensorPtr>& params, const TrainConfig& cfg);

    void step(const std::vector<nn::TensorPtr>& params, double lr_t);
    std::int64_t steps() const { return t_; }

  private:
    double wd_, beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

struct EpochStats {
    int epoch = 0;  // 1-based
    double lr = 0;
    double train_loss = 0;
    double val_f1 = 0;
    bool improved = false;
};

struct TrainResult {
    std::vector<EpochStats> history;
    int best_epoch = 0;
    double best_val_f1 = 0;
};

// Forward pass without dropout; returns the flat probability vector.
std::vector<double> predict_probs(const Model& model,
                                  const SequenceSample& sample);

// Micro-F1 of thresholded predictions over every sample's label block.
double validation_micro_f1(const Model& model,
                           const std::vector<SequenceSample>& val);

// Mini-batch training loop with per-epoch validation, strict-improvement
// best-state tracking, and early stopping once `patience` epochs pass
// without a new best. The model is left holding the best-epoch weights.
TrainResult fit(Model& model, const std::vector<SequenceSample>& train,
                const std::vector<SequenceSample>& val,
                const TrainConfig& cfg);

void write_history_csv(const std::string& path,
                       const std::vector<EpochStats>& history);

}  // namespace cyano
