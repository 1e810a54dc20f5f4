#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cyanocast/tensor.hpp"

namespace cyano {

struct ModelConfig {
    int seq_len = 15;
    int features = 19;
    int horizon = 14;
    int classes = 5;

    int d_model = 64;
    int heads = 8;
    std::array<int, 3> snb_hidden{128, 128, 128};
    int lstm_hidden = 64;
    double dropout = 0.1;
    double leaky_slope = 0.01;

    int output_size() const { return horizon * classes; }
    void validate() const;
};

// Deterministic sin/cos position table, seq_len x d_model. Requires an even
// d_model.
std::vector<double> positional_encoding(int seq_len, int d_model);

// Attention -> stabilization -> recurrence forecaster. One encoder block:
// bias-free embedding plus positional encoding, affine layer norm, bias-free
// multi-head self-attention with residual, a second affine layer norm, a
// three-layer stabilization stack (linear, parameter-free layer norm, leaky
// relu, dropout) with a linear projection back to d_model and residual, then
// a bidirectional LSTM whose end states feed the sigmoid output head.
struct Model {
    ModelConfig cfg;

    nn::TensorPtr embed;                    // features x d_model, no bias
    nn::TensorPtr ln1_gain, ln1_bias;       // 1 x d_model
    std::vector<nn::TensorPtr> wq, wk, wv;  // per head, d_model x head_dim
    nn::TensorPtr attn_proj;                // d_model x d_model, no bias
    nn::TensorPtr ln2_gain, ln2_bias;
    std::vector<nn::TensorPtr> snb_w, snb_b;  // 3 hidden layers + output
    nn::TensorPtr lstm_fw_wx, lstm_fw_wh, lstm_fw_b;  // gate order i,f,g,o
    nn::TensorPtr lstm_bw_wx, lstm_bw_wh, lstm_bw_b;
    nn::TensorPtr head_w, head_b;  // 2*lstm_hidden x (horizon*classes)
    nn::TensorPtr pos_enc;         // constant, not a parameter

    static Model init(const ModelConfig& cfg, std::uint64_t seed);

    // Stable order; checkpoints and the optimizer both rely on it.
    std::vector<std::pair<std::string, nn::TensorPtr>> named_parameters()
        const;
    std::vector<nn::TensorPtr> parameters() const;
    std::size_t parameter_count() const;
};

// Closed-form size of the parameter vector for a given configuration.
std::size_t expected_parameter_count(const ModelConfig& cfg);

struct ForwardResult {
    nn::TensorPtr logits;  // 1 x horizon*classes
    nn::TensorPtr probs;   // sigmoid(logits)
};

// x is the flattened seq_len x features input, row-major. The rng feeds the
// dropout masks and is only consumed when training is true.
ForwardResult model_forward(const Model& model, const std::vector<double>& x,
                            bool training, std::mt19937_64& rng);

// Pieces exposed for direct testing.
nn::TensorPtr multi_head_attention(const Model& model,
                                   const nn::TensorPtr& e_norm);
nn::TensorPtr stabilization_stack(const Model& model,
                                  const nn::TensorPtr& theta, bool training,
                                  std::mt19937_64& rng);
nn::TensorPtr bilstm_end_state(const Model& model, const nn::TensorPtr& seq);

}  // namespace cyano
