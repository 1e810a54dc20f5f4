#include "cyanocast/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "cyanocast/errors.hpp"
#include "cyanocast/eval.hpp"
#include "cyanocast/rng.hpp"
#include "cyanocast/text_io.hpp"

namespace cyano {

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw ConfigError("train: lr must be positive");
    if (weight_decay < 0.0)
        throw ConfigError("train: weight_decay must be non-negative");
    if (epochs < 1) throw ConfigError("train: epochs must be at least 1");
    if (!(restart_period > 0.0))
        throw ConfigError("train: restart_period must be positive");
    if (!(lr_min_ratio > 0.0) || lr_min_ratio > 1.0)
        throw ConfigError("train: lr_min_ratio must be in (0, 1]");
    if (!(clip_norm > 0.0))
        throw ConfigError("train: clip_norm must be positive");
    if (label_smoothing < 0.0 || label_smoothing >= 0.5)
        throw ConfigError("train: label_smoothing must be in [0, 0.5)");
    if (!(prob_floor > 0.0) || prob_floor >= 0.5)
        throw ConfigError("train: prob_floor must be in (0, 0.5)");
    if (batch_size < 1)
        throw ConfigError("train: batch_size must be at least 1");
    if (patience < 1) throw ConfigError("train: patience must be at least 1");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        throw ConfigError("train: betas must be in [0, 1)");
    if (!(adam_eps > 0.0))
        throw ConfigError("train: adam_eps must be positive");
}

nn::TensorPtr bce_loss(const nn::TensorPtr& probs,
                       const std::vector<std::uint8_t>& targets,
                       double label_smoothing, double prob_floor) {
    const std::size_t n = probs->value.size();
    if (targets.size() != n)
        throw std::invalid_argument("bce_loss: target size mismatch");
    std::vector<double> smooth(n), inverse(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = targets[i] ? 1.0 : 0.0;
        smooth[i] = y * (1.0 - label_smoothing) + label_smoothing / 2.0;
        inverse[i] = 1.0 - smooth[i];
    }
    const auto y = nn::leaf_from(probs->rows, probs->cols, std::move(smooth));
    const auto y_inv =
        nn::leaf_from(probs->rows, probs->cols, std::move(inverse));
    const auto p = nn::clamp_op(probs, prob_floor, 1.0 - prob_floor);
    const auto log_p = nn::log_op(p);
    const auto log_q = nn::log_op(nn::affine(p, -1.0, 1.0));
    const auto ll = nn::add(nn::mul(y, log_p), nn::mul(y_inv, log_q));
    return nn::affine(nn::mean_all(ll), -1.0, 0.0);
}

double lr_schedule(double epoch, const TrainConfig& cfg) {
    double tau = std::fmod(epoch, cfg.restart_period);
    if (tau < 0.0) tau += cfg.restart_period;
    const double lr_min = cfg.lr * cfg.lr_min_ratio;
    return lr_min +
           0.5 * (cfg.lr - lr_min) *
               (1.0 + std::cos(std::numbers::pi * tau / cfg.restart_period));
}

double clip_gradients(const std::vector<nn::TensorPtr>& params,
                      double max_norm) {
    double sumsq = 0.0;
    for (const auto& p : params)
        for (double g : p->grad) sumsq += g * g;
    const double norm = std::sqrt(sumsq);
    if (norm > max_norm) {
        const double scale = max_norm / norm;
        for (const auto& p : params)
            for (double& g : p->grad) g *= scale;
    }
    return norm;
}

AdamW::AdamW(const std::vector<nn::TensorPtr>& params,
             const TrainConfig& cfg)
    : wd_(cfg.weight_decay),
      beta1_(cfg.beta1),
      beta2_(cfg.beta2),
      eps_(cfg.adam_eps) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& p : params) {
        m_.emplace_back(p->value.size(), 0.0);
        v_.emplace_back(p->value.size(), 0.0);
    }
}

void AdamW::step(const std::vector<nn::TensorPtr>& params, double lr_t) {
    if (params.size() != m_.size())
        throw std::invalid_argument("adamw: parameter set changed");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& value = params[i]->value;
        const auto& grad = params[i]->grad;
        if (value.size() != m_[i].size())
            throw std::invalid_argument("adamw: parameter shape changed");
        for (std::size_t j = 0; j < value.size(); ++j) {
            value[j] -= lr_t * wd_ * value[j];
            m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * grad[j];
            v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * grad[j] * grad[j];
            const double m_hat = m_[i][j] / bc1;
            const double v_hat = v_[i][j] / bc2;
            value[j] -= lr_t * m_hat / (std::sqrt(v_hat) + eps_);
        }
    }
}

std::vector<double> predict_probs(const Model& model,
                                  const SequenceSample& sample) {
    std::mt19937_64 unused(0);
    return model_forward(model, sample.x, false, unused).probs->value;
}

double validation_micro_f1(const Model& model,
                           const std::vector<SequenceSample>& val) {
    std::vector<std::uint8_t> preds, targets;
    preds.reserve(val.size() * kHorizon * kClassCount);
    targets.reserve(val.size() * kHorizon * kClassCount);
    for (const auto& s : val) {
        const auto bits = binarize(predict_probs(model, s), 0.5);
        preds.insert(preds.end(), bits.begin(), bits.end());
        targets.insert(targets.end(), s.y.begin(), s.y.end());
    }
    return micro_metrics(preds, targets).f1;
}

TrainResult fit(Model& model, const std::vector<SequenceSample>& train,
                const std::vector<SequenceSample>& val,
                const TrainConfig& cfg) {
    cfg.validate();
    if (train.empty()) throw DataError("fit: training split is empty");
    if (val.empty()) throw DataError("fit: validation split is empty");

    const auto params = model.parameters();
    AdamW opt(params, cfg);
    auto shuffle_rng = seeded_rng(cfg.seed, 1);
    auto dropout_rng = seeded_rng(cfg.seed, 2);

    std::vector<std::vector<double>> best;
    best.reserve(params.size());
    for (const auto& p : params) best.push_back(p->value);
    double best_f1 = -1.0;  // any real F1 strictly improves on this
    int streak = 0;

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult out;
    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double lr_t = lr_schedule(static_cast<double>(epoch - 1), cfg);
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t end = std::min(order.size(), start + batch);
            nn::zero_grad(params);
            for (std::size_t k = start; k < end; ++k) {
                const auto& s = train[order[k]];
                const auto fwd = model_forward(model, s.x, true, dropout_rng);
                const auto loss = bce_loss(fwd.probs, s.y,
                                           cfg.label_smoothing,
                                           cfg.prob_floor);
                if (!std::isfinite(loss->value[0]))
                    throw NumericalError("fit: non-finite training loss");
                nn::backward(loss);
                loss_sum += loss->value[0];
            }
            const double inv_n = 1.0 / static_cast<double>(end - start);
            for (const auto& p : params)
                for (double& g : p->grad) g *= inv_n;
            clip_gradients(params, cfg.clip_norm);
            opt.step(params, lr_t);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.lr = lr_t;
        stats.train_loss = loss_sum / static_cast<double>(train.size());
        stats.val_f1 = validation_micro_f1(model, val);
        stats.improved = stats.val_f1 > best_f1;
        out.history.push_back(stats);

        if (stats.improved) {
            best_f1 = stats.val_f1;
            out.best_epoch = epoch;
            for (std::size_t i = 0; i < params.size(); ++i)
                best[i] = params[i]->value;
            streak = 0;
        } else if (++streak >= cfg.patience) {
            break;
        }
    }

    for (std::size_t i = 0; i < params.size(); ++i)
        params[i]->value = best[i];
    out.best_val_f1 = best_f1;
    return out;
}

void write_history_csv(const std::string& path,
                       const std::vector<EpochStats>& history) {
    std::string text = "epoch,loss,lr,val_f1\n";
    for (const auto& h : history) {
        text += std::to_string(h.epoch);
        text += ',';
        text += fmt_double(h.train_loss);
        text += ',';
        text += fmt_double(h.lr);
        text += ',';
        text += fmt_double(h.val_f1);
        text += '\n';
    }
    atomic_write_file(path, text);
}

}  // namespace cyano
