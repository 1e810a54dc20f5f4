#include "cyanocast/model.hpp"

#include <algorithm>
#include <cmath>

#include "cyanocast/errors.hpp"

namespace cyano {

using namespace nn;

void ModelConfig::validate() const {
    if (seq_len < 1 || features < 1 || horizon < 1 || classes < 1)
        throw ConfigError("model: data dimensions must be positive");
    if (d_model < 2 || d_model % 2 != 0)
        throw ConfigError(
            "model: d_model must be even for the position table");
    if (heads < 1 || d_model % heads != 0)
        throw ConfigError("model: heads must divide d_model");
    for (int h : snb_hidden)
        if (h < 1) throw ConfigError("model: stabilization width must be "
                                     "positive");
    if (lstm_hidden < 1) throw ConfigError("model: lstm width must be positive");
    if (dropout < 0.0 || dropout >= 1.0)
        throw ConfigError("model: dropout must be in [0,1)");
    if (leaky_slope <= 0.0 || leaky_slope >= 1.0)
        throw ConfigError("model: leaky slope must be in (0,1)");
}

std::vector<double> positional_encoding(int seq_len, int d_model) {
    if (d_model % 2 != 0)
        throw ConfigError("position table needs an even width");
    std::vector<double> pe(static_cast<std::size_t>(seq_len) * d_model);
    for (int pos = 0; pos < seq_len; ++pos)
        for (int i = 0; i < d_model / 2; ++i) {
            const double rate =
                std::pow(10000.0, -2.0 * i / static_cast<double>(d_model));
            const double angle = pos * rate;
            pe[static_cast<std::size_t>(pos) * d_model + 2 * i] =
                std::sin(angle);
            pe[static_cast<std::size_t>(pos) * d_model + 2 * i + 1] =
                std::cos(angle);
        }
    return pe;
}

namespace {

// Xavier uniform over +-sqrt(6/(fan_in+fan_out)); one shared stream in
// parameter order keeps initialization reproducible.
void fill_xavier(const TensorPtr& w, std::mt19937_64& rng) {
    const double bound =
        std::sqrt(6.0 / static_cast<double>(w->rows + w->cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : w->value) v = dist(rng);
}

}  // namespace

Model Model::init(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Model m;
    m.cfg = cfg;
    const int D = cfg.d_model;
    const int Hd = D / cfg.heads;
    const int Hl = cfg.lstm_hidden;
    std::mt19937_64 rng(seed);

    m.embed = leaf(cfg.features, D);
    fill_xavier(m.embed, rng);
    m.ln1_gain = leaf(1, D);
    std::fill(m.ln1_gain->value.begin(), m.ln1_gain->value.end(), 1.0);
    m.ln1_bias = leaf(1, D);
    for (int h = 0; h < cfg.heads; ++h) {
        m.wq.push_back(leaf(D, Hd));
        fill_xavier(m.wq.back(), rng);
        m.wk.push_back(leaf(D, Hd));
        fill_xavier(m.wk.back(), rng);
        m.wv.push_back(leaf(D, Hd));
        fill_xavier(m.wv.back(), rng);
    }
    m.attn_proj = leaf(D, D);
    fill_xavier(m.attn_proj, rng);
    m.ln2_gain = leaf(1, D);
    std::fill(m.ln2_gain->value.begin(), m.ln2_gain->value.end(), 1.0);
    m.ln2_bias = leaf(1, D);

    int prev = D;
    for (int i = 0; i < 3; ++i) {
        m.snb_w.push_back(leaf(prev, cfg.snb_hidden[static_cast<std::size_t>(i)]));
        fill_xavier(m.snb_w.back(), rng);
        m.snb_b.push_back(leaf(1, cfg.snb_hidden[static_cast<std::size_t>(i)]));
        prev = cfg.snb_hidden[static_cast<std::size_t>(i)];
    }
    m.snb_w.push_back(leaf(prev, D));
    fill_xavier(m.snb_w.back(), rng);
    m.snb_b.push_back(leaf(1, D));

    auto lstm_dir = [&](TensorPtr& wx, TensorPtr& wh, TensorPtr& b) {
        wx = leaf(D, 4 * Hl);
        fill_xavier(wx, rng);
        wh = leaf(Hl, 4 * Hl);
        fill_xavier(wh, rng);
        b = leaf(1, 4 * Hl);
        // Forget-gate bias starts at 1 so early cells keep their memory.
        for (int c = Hl; c < 2 * Hl; ++c)
            b->value[static_cast<std::size_t>(c)] = 1.0;
    };
    lstm_dir(m.lstm_fw_wx, m.lstm_fw_wh, m.lstm_fw_b);
    lstm_dir(m.lstm_bw_wx, m.lstm_bw_wh, m.lstm_bw_b);

    m.head_w = leaf(2 * Hl, cfg.output_size());
    fill_xavier(m.head_w, rng);
    m.head_b = leaf(1, cfg.output_size());

    m.pos_enc = leaf_from(cfg.seq_len, D, positional_encoding(cfg.seq_len, D));
    return m;
}

std::vector<std::pair<std::string, TensorPtr>> Model::named_parameters()
    const {
    std::vector<std::pair<std::string, TensorPtr>> out;
    out.emplace_back("embed", embed);
    out.emplace_back("ln1.gain", ln1_gain);
    out.emplace_back("ln1.bias", ln1_bias);
    for (std::size_t h = 0; h < wq.size(); ++h) {
        const std::string p = "attn." + std::to_string(h) + ".";
        out.emplace_back(p + "wq", wq[h]);
        out.emplace_back(p + "wk", wk[h]);
        out.emplace_back(p + "wv", wv[h]);
    }
    out.emplace_back("attn.proj", attn_proj);
    out.emplace_back("ln2.gain", ln2_gain);
    out.emplace_back("ln2.bias", ln2_bias);
    for (std::size_t i = 0; i < snb_w.size(); ++i) {
        const std::string p = "snb." + std::to_string(i) + ".";
        out.emplace_back(p + "w", snb_w[i]);
        out.emplace_back(p + "b", snb_b[i]);
    }
    out.emplace_back("lstm.fw.wx", lstm_fw_wx);
    out.emplace_back("lstm.fw.wh", lstm_fw_wh);
    out.emplace_back("lstm.fw.b", lstm_fw_b);
    out.emplace_back("lstm.bw.wx", lstm_bw_wx);
    out.emplace_back("lstm.bw.wh", lstm_bw_wh);
    out.emplace_back("lstm.bw.b", lstm_bw_b);
    out.emplace_back("head.w", head_w);
    out.emplace_back("head.b", head_b);
    return out;
}

std::vector<TensorPtr> Model::parameters() const {
    std::vector<TensorPtr> out;
    for (auto& [name, t] : named_parameters()) out.push_back(t);
    return out;
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const TensorPtr& t : parameters()) n += t->size();
    return n;
}

std::size_t expected_parameter_count(const ModelConfig& cfg) {
    const std::size_t D = static_cast<std::size_t>(cfg.d_model);
    const std::size_t F = static_cast<std::size_t>(cfg.features);
    const std::size_t Hl = static_cast<std::size_t>(cfg.lstm_hidden);
    const std::size_t out = static_cast<std::size_t>(cfg.output_size());
    std::size_t n = F * D;        // embedding
    n += 2 * D;                   // first layer norm
    n += 3 * D * D;               // per-head q,k,v stacks sum to d_model
    n += D * D;                   // attention output projection
    n += 2 * D;                   // second layer norm
    std::size_t prev = D;
    for (int h : cfg.snb_hidden) {
        n += prev * static_cast<std::size_t>(h) + static_cast<std::size_t>(h);
        prev = static_cast<std::size_t>(h);
    }
    n += prev * D + D;            // projection back to d_model
    n += 2 * (D * 4 * Hl + Hl * 4 * Hl + 4 * Hl);  // both lstm directions
    n += 2 * Hl * out + out;      // output head
    return n;
}

nn::TensorPtr multi_head_attention(const Model& model,
                                   const nn::TensorPtr& e_norm) {
    const int Hd = model.cfg.d_model / model.cfg.heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(Hd));
    TensorPtr ctx;
    for (int h = 0; h < model.cfg.heads; ++h) {
        const TensorPtr q = matmul(e_norm, model.wq[static_cast<std::size_t>(h)]);
        const TensorPtr k = matmul(e_norm, model.wk[static_cast<std::size_t>(h)]);
        const TensorPtr v = matmul(e_norm, model.wv[static_cast<std::size_t>(h)]);
        const TensorPtr scores =
            affine(matmul(q, transpose(k)), inv_sqrt, 0.0);
        const TensorPtr head = matmul(softmax_rows(scores), v);
        ctx = ctx ? concat_cols(ctx, head) : head;
    }
    return matmul(ctx, model.attn_proj);
}

nn::TensorPtr stabilization_stack(const Model& model,
                                  const nn::TensorPtr& theta, bool training,
                                  std::mt19937_64& rng) {
    TensorPtr z = theta;
    for (std::size_t i = 0; i < 3; ++i) {
        const TensorPtr lin = add_rowvec(matmul(z, model.snb_w[i]),
                                         model.snb_b[i]);
        z = dropout(leaky_relu(layer_norm_rows(lin), model.cfg.leaky_slope),
                    model.cfg.dropout, training, rng);
    }
    return add_rowvec(matmul(z, model.snb_w[3]), model.snb_b[3]);
}

namespace {

TensorPtr lstm_direction(const TensorPtr& seq, const TensorPtr& wx,
                         const TensorPtr& wh, const TensorPtr& b,
                         int hidden, bool reverse) {
    TensorPtr h = leaf(1, hidden);
    TensorPtr c = leaf(1, hidden);
    const int L = seq->rows;
    for (int step = 0; step < L; ++step) {
        const int t = reverse ? L - 1 - step : step;
        const TensorPtr xt = slice_row(seq, t);
        const TensorPtr pre =
            add(add(matmul(xt, wx), matmul(h, wh)), b);
        const TensorPtr gi = sigmoid(slice_cols(pre, 0, hidden));
        const TensorPtr gf = sigmoid(slice_cols(pre, hidden, 2 * hidden));
        const TensorPtr gg = tanh_op(slice_cols(pre, 2 * hidden, 3 * hidden));
        const TensorPtr go = sigmoid(slice_cols(pre, 3 * hidden, 4 * hidden));
        c = add(mul(gf, c), mul(gi, gg));
        h = mul(go, tanh_op(c));
    }
    return h;
}

}  // namespace

nn::TensorPtr bilstm_end_state(const Model& model, const nn::TensorPtr& seq) {
    const int Hl = model.cfg.lstm_hidden;
    const TensorPtr fw = lstm_direction(seq, model.lstm_fw_wx,
                                        model.lstm_fw_wh, model.lstm_fw_b,
                                        Hl, false);
    const TensorPtr bw = lstm_direction(seq, model.lstm_bw_wx,
                                        model.lstm_bw_wh, model.lstm_bw_b,
                                        Hl, true);
    return concat_cols(fw, bw);
}

ForwardResult model_forward(const Model& model, const std::vector<double>& x,
                            bool training, std::mt19937_64& rng) {
    const ModelConfig& cfg = model.cfg;
    if (x.size() != static_cast<std::size_t>(cfg.seq_len) * cfg.features)
        throw std::invalid_argument("model_forward: input length mismatch");

    const TensorPtr input = leaf_from(cfg.seq_len, cfg.features, x);
    const TensorPtr embedded =
        add(matmul(input, model.embed), model.pos_enc);
    const TensorPtr e_norm = add_rowvec(
        mul_rowvec(layer_norm_rows(embedded), model.ln1_gain),
        model.ln1_bias);

    const TensorPtr attended = multi_head_attention(model, e_norm);
    const TensorPtr residual = add(attended, e_norm);
    const TensorPtr theta = add_rowvec(
        mul_rowvec(layer_norm_rows(residual), model.ln2_gain),
        model.ln2_bias);

    const TensorPtr zeta = stabilization_stack(model, theta, training, rng);
    const TensorPtr encoded = add(theta, zeta);

    const TensorPtr end_state = bilstm_end_state(model, encoded);
    ForwardResult out;
    out.logits = add_rowvec(matmul(end_state, model.head_w), model.head_b);
    out.probs = sigmoid(out.logits);
    for (double v : out.probs->value)
        if (!std::isfinite(v))
            throw NumericalError("non-finite activation in forward pass");
    return out;
}

}  // namespace cyano
