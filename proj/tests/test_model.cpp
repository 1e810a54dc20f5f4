#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"

#include "cyanocast/errors.hpp"
#include "cyanocast/model.hpp"

using namespace cyano;

namespace {

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.seq_len = 3;
    cfg.features = 2;
    cfg.horizon = 2;
    cfg.classes = 2;
    cfg.d_model = 4;
    cfg.heads = 2;
    cfg.snb_hidden = {3, 3, 3};
    cfg.lstm_hidden = 3;
    return cfg;
}

nn::TensorPtr random_input(int rows, int cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    auto t = nn::leaf(rows, cols);
    for (double& v : t->value) v = dist(rng);
    return t;
}

void fill_zero(const nn::TensorPtr& t) {
    std::fill(t->value.begin(), t->value.end(), 0.0);
}

// Naive attention evaluation, written independently of the layer code: plain
// loops and an unshifted softmax.
std::vector<double> brute_force_attention(const Model& m,
                                          const std::vector<double>& e,
                                          int rows) {
    const int D = m.cfg.d_model;
    const int Hd = D / m.cfg.heads;
    std::vector<double> concat(static_cast<std::size_t>(rows) * D, 0.0);
    for (int h = 0; h < m.cfg.heads; ++h) {
        std::vector<double> q(static_cast<std::size_t>(rows) * Hd, 0.0);
        std::vector<double> k(q.size(), 0.0);
        std::vector<double> v(q.size(), 0.0);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < Hd; ++c)
                for (int d = 0; d < D; ++d) {
                    const double x = e[static_cast<std::size_t>(r) * D + d];
                    const std::size_t w =
                        static_cast<std::size_t>(d) * Hd + c;
                    const std::size_t o =
                        static_cast<std::size_t>(r) * Hd + c;
                    q[o] += x * m.wq[static_cast<std::size_t>(h)]->value[w];
                    k[o] += x * m.wk[static_cast<std::size_t>(h)]->value[w];
                    v[o] += x * m.wv[static_cast<std::size_t>(h)]->value[w];
                }
        for (int r = 0; r < rows; ++r) {
            std::vector<double> w(static_cast<std::size_t>(rows), 0.0);
            double denom = 0.0;
            for (int s = 0; s < rows; ++s) {
                double score = 0.0;
                for (int c = 0; c < Hd; ++c)
                    score += q[static_cast<std::size_t>(r) * Hd + c] *
                             k[static_cast<std::size_t>(s) * Hd + c];
                w[static_cast<std::size_t>(s)] =
                    std::exp(score / std::sqrt(static_cast<double>(Hd)));
                denom += w[static_cast<std::size_t>(s)];
            }
            for (int c = 0; c < Hd; ++c) {
                double acc = 0.0;
                for (int s = 0; s < rows; ++s)
                    acc += w[static_cast<std::size_t>(s)] / denom *
                           v[static_cast<std::size_t>(s) * Hd + c];
                concat[static_cast<std::size_t>(r) * D + h * Hd + c] = acc;
            }
        }
    }
    std::vector<double> out(static_cast<std::size_t>(rows) * D, 0.0);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < D; ++c)
            for (int d = 0; d < D; ++d)
                out[static_cast<std::size_t>(r) * D + c] +=
                    concat[static_cast<std::size_t>(r) * D + d] *
                    m.attn_proj->value[static_cast<std::size_t>(d) * D + c];
    return out;
}

}  // namespace

TEST_CASE("position table matches the sin/cos recurrence") {
    const int L = 10, D = 8;
    const auto pe = positional_encoding(L, D);
    REQUIRE(pe.size() == static_cast<std::size_t>(L * D));
    for (int i = 0; i < D / 2; ++i) {
        CHECK(pe[static_cast<std::size_t>(2 * i)] == 0.0);
        CHECK(pe[static_cast<std::size_t>(2 * i + 1)] == 1.0);
    }
    CHECK(pe[static_cast<std::size_t>(D)] ==
          doctest::Approx(0.8414709848).epsilon(1e-9));
    for (int p = 0; p < L; ++p)
        for (int i = 0; i < D / 2; ++i) {
            const double angle =
                p / std::pow(10000.0, 2.0 * i / static_cast<double>(D));
            CHECK(pe[static_cast<std::size_t>(p * D + 2 * i)] ==
                  doctest::Approx(std::sin(angle)).epsilon(1e-12));
            CHECK(pe[static_cast<std::size_t>(p * D + 2 * i + 1)] ==
                  doctest::Approx(std::cos(angle)).epsilon(1e-12));
        }
    CHECK_THROWS_AS((void)positional_encoding(4, 7), ConfigError);
}

TEST_CASE("affine layer norm standardizes each row before the shift") {
    auto constant = nn::leaf_from(1, 4, {3.5, 3.5, 3.5, 3.5});
    auto gain = nn::leaf_from(1, 4, {1.0, 1.0, 1.0, 1.0});
    auto bias = nn::leaf(1, 4);
    auto normed = nn::add_rowvec(
        nn::mul_rowvec(nn::layer_norm_rows(constant), gain), bias);
    for (double v : normed->value) CHECK(v == 0.0);

    auto pair = nn::layer_norm_rows(nn::leaf_from(1, 2, {-1.0, 1.0}));
    CHECK(pair->value[0] == doctest::Approx(-1.0).epsilon(2e-5));
    CHECK(pair->value[1] == doctest::Approx(1.0).epsilon(2e-5));

    std::mt19937_64 rng(3);
    auto x = random_input(1, 6, rng);
    auto g = nn::leaf_from(1, 6, std::vector<double>(6, 1.7));
    auto b = nn::leaf_from(1, 6, std::vector<double>(6, 0.25));
    auto shifted =
        nn::add_rowvec(nn::mul_rowvec(nn::layer_norm_rows(x), g), b);
    double mean = 0.0;
    for (double v : shifted->value) mean += v;
    mean /= 6.0;
    CHECK(mean == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("attention over a single step returns the projected value row") {
    ModelConfig cfg = tiny_config();
    cfg.heads = 1;
    Model m = Model::init(cfg, 5);
    // Identity projection exposes the raw head output.
    fill_zero(m.attn_proj);
    for (int d = 0; d < cfg.d_model; ++d)
        m.attn_proj->at(d, d) = 1.0;

    std::mt19937_64 rng(11);
    auto e = random_input(1, cfg.d_model, rng);
    auto out = multi_head_attention(m, e);
    REQUIRE(out->rows == 1);
    REQUIRE(out->cols == cfg.d_model);
    // Softmax of a 1x1 score matrix is exactly one, so the head returns v.
    for (int c = 0; c < cfg.d_model; ++c) {
        double v = 0.0;
        for (int d = 0; d < cfg.d_model; ++d)
            v += e->value[static_cast<std::size_t>(d)] * m.wv[0]->at(d, c);
        CHECK(out->at(0, c) == v);
    }
}

TEST_CASE("identical timesteps split attention weight evenly") {
    ModelConfig cfg = tiny_config();
    Model m = Model::init(cfg, 6);
    fill_zero(m.attn_proj);
    for (int d = 0; d < cfg.d_model; ++d)
        m.attn_proj->at(d, d) = 1.0;

    std::mt19937_64 rng(12);
    auto row = random_input(1, cfg.d_model, rng);
    auto e = nn::leaf(2, cfg.d_model);
    for (int c = 0; c < cfg.d_model; ++c) {
        e->at(0, c) = row->value[static_cast<std::size_t>(c)];
        e->at(1, c) = row->value[static_cast<std::size_t>(c)];
    }
    auto out = multi_head_attention(m, e);
    // Equal scores give exact 0.5 weights; averaging identical value rows
    // reproduces the row bit for bit.
    const auto single = multi_head_attention(m, row);
    for (int c = 0; c < cfg.d_model; ++c) {
        CHECK(out->at(0, c) == out->at(1, c));
        CHECK(out->at(0, c) == single->at(0, c));
    }
}

TEST_CASE("multi-head attention matches a brute-force evaluation") {
    ModelConfig cfg = tiny_config();
    cfg.d_model = 8;
    cfg.heads = 2;
    Model m = Model::init(cfg, 21);
    std::mt19937_64 rng(22);
    auto e = random_input(3, cfg.d_model, rng);
    auto fast = multi_head_attention(m, e);
    auto slow = brute_force_attention(m, e->value, 3);
    REQUIRE(fast->size() == slow.size());
    for (std::size_t i = 0; i < slow.size(); ++i)
        CHECK(fast->value[i] == doctest::Approx(slow[i]).epsilon(1e-9));
}

TEST_CASE("permuting input timesteps permutes attention output rows") {
    ModelConfig cfg = tiny_config();
    cfg.d_model = 8;
    Model m = Model::init(cfg, 31);
    std::mt19937_64 rng(32);
    auto e = random_input(4, cfg.d_model, rng);
    auto swapped = nn::leaf(4, cfg.d_model);
    swapped->value = e->value;
    for (int c = 0; c < cfg.d_model; ++c)
        std::swap(swapped->at(1, c), swapped->at(2, c));

    auto base = multi_head_attention(m, e);
    auto perm = multi_head_attention(m, swapped);
    const int remap[4] = {0, 2, 1, 3};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < cfg.d_model; ++c)
            CHECK(perm->at(remap[r], c) ==
                  doctest::Approx(base->at(r, c)).epsilon(1e-12));
}

TEST_CASE("zeroed projection turns the attention block into a passthrough") {
    ModelConfig cfg = tiny_config();
    Model m = Model::init(cfg, 41);
    fill_zero(m.attn_proj);
    std::mt19937_64 rng(42);
    auto e = random_input(3, cfg.d_model, rng);
    auto attended = multi_head_attention(m, e);
    for (double v : attended->value) CHECK(v == 0.0);
    auto residual = nn::add(attended, e);
    for (std::size_t i = 0; i < e->size(); ++i)
        CHECK(residual->value[i] == e->value[i]);
}

TEST_CASE("zeroed stabilization stack contributes nothing to the residual") {
    ModelConfig cfg = tiny_config();
    Model m = Model::init(cfg, 51);
    for (auto& w : m.snb_w) fill_zero(w);
    for (auto& b : m.snb_b) fill_zero(b);
    std::mt19937_64 rng(52);
    auto theta = random_input(3, cfg.d_model, rng);
    std::mt19937_64 drop_rng(1);
    auto zeta = stabilization_stack(m, theta, false, drop_rng);
    for (double v : zeta->value) CHECK(v == 0.0);
}

TEST_CASE("stabilization stack dropout is seed-driven in training mode") {
    ModelConfig cfg = tiny_config();
    cfg.dropout = 0.5;
    Model m = Model::init(cfg, 61);
    std::mt19937_64 rng(62);
    auto theta = random_input(3, cfg.d_model, rng);

    std::mt19937_64 eval_rng(0);
    auto a = stabilization_stack(m, theta, false, eval_rng);
    auto b = stabilization_stack(m, theta, false, eval_rng);
    CHECK(a->value == b->value);

    std::mt19937_64 r1(7), r2(7), r3(8);
    auto t1 = stabilization_stack(m, theta, true, r1);
    auto t2 = stabilization_stack(m, theta, true, r2);
    auto t3 = stabilization_stack(m, theta, true, r3);
    CHECK(t1->value == t2->value);
    CHECK(t1->value != t3->value);
}

TEST_CASE("zero-weight recurrence yields a zero end state") {
    ModelConfig cfg = tiny_config();
    Model m = Model::init(cfg, 71);
    for (auto* t : {&m.lstm_fw_wx, &m.lstm_fw_wh, &m.lstm_fw_b,
                    &m.lstm_bw_wx, &m.lstm_bw_wh, &m.lstm_bw_b})
        fill_zero(*t);
    std::mt19937_64 rng(72);
    auto seq = random_input(cfg.seq_len, cfg.d_model, rng);
    auto end = bilstm_end_state(m, seq);
    REQUIRE(end->rows == 1);
    REQUIRE(end->cols == 2 * cfg.lstm_hidden);
    for (double v : end->value) CHECK(v == 0.0);
}

TEST_CASE("single-step recurrence matches a hand-run cell") {
    ModelConfig cfg = tiny_config();
    cfg.seq_len = 1;
    cfg.d_model = 2;
    cfg.heads = 1;
    cfg.lstm_hidden = 2;
    Model m = Model::init(cfg, 81);
    // Same weights in both directions; a one-step sequence must then produce
    // two identical halves.
    m.lstm_bw_wx->value = m.lstm_fw_wx->value;
    m.lstm_bw_wh->value = m.lstm_fw_wh->value;
    m.lstm_bw_b->value = m.lstm_fw_b->value;

    auto seq = nn::leaf_from(1, 2, {0.3, -0.7});
    auto end = bilstm_end_state(m, seq);
    REQUIRE(end->cols == 4);

    const int H = cfg.lstm_hidden;
    auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    for (int j = 0; j < H; ++j) {
        double pre[4];
        for (int gate = 0; gate < 4; ++gate) {
            const int col = gate * H + j;
            pre[gate] = m.lstm_fw_b->value[static_cast<std::size_t>(col)];
            for (int k = 0; k < 2; ++k)
                pre[gate] += seq->value[static_cast<std::size_t>(k)] *
                             m.lstm_fw_wx->at(k, col);
        }
        const double cell = sig(pre[0]) * std::tanh(pre[2]);
        const double h = sig(pre[3]) * std::tanh(cell);
        CHECK(end->value[static_cast<std::size_t>(j)] ==
              doctest::Approx(h).epsilon(1e-12));
        CHECK(end->value[static_cast<std::size_t>(H + j)] ==
              doctest::Approx(h).epsilon(1e-12));
    }
}

TEST_CASE("parameter census matches the closed form") {
    ModelConfig def;
    Model m = Model::init(def, 1);
    CHECK(m.parameter_count() == 142534u);
    CHECK(expected_parameter_count(def) == 142534u);

    for (const ModelConfig& cfg :
         {tiny_config(), [] {
              ModelConfig c;
              c.seq_len = 5;
              c.features = 6;
              c.horizon = 3;
              c.classes = 4;
              c.d_model = 8;
              c.heads = 4;
              c.snb_hidden = {7, 5, 3};
              c.lstm_hidden = 4;
              return c;
          }()}) {
        Model t = Model::init(cfg, 2);
        CHECK(t.parameter_count() == expected_parameter_count(cfg));
    }

    const auto named = Model::init(def, 3).named_parameters();
    CHECK(named.size() == 22u + 3u * 8u);
    CHECK(named.front().first == "embed");
    CHECK(named.back().first == "head.b");
    std::set<std::string> names;
    for (const auto& [name, t] : named) names.insert(name);
    CHECK(names.size() == named.size());
    CHECK(names.count("pos_enc") == 0u);
}

TEST_CASE("initialization is a pure function of the seed") {
    ModelConfig cfg = tiny_config();
    Model a = Model::init(cfg, 7);
    Model b = Model::init(cfg, 7);
    Model c = Model::init(cfg, 8);
    const auto pa = a.named_parameters();
    const auto pb = b.named_parameters();
    const auto pc = c.named_parameters();
    bool any_diff = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i].second->value == pb[i].second->value);
        if (pa[i].second->value != pc[i].second->value) any_diff = true;
    }
    CHECK(any_diff);

    const double bound =
        std::sqrt(6.0 / static_cast<double>(cfg.features + cfg.d_model));
    for (double v : a.embed->value) CHECK(std::fabs(v) <= bound);

    for (double v : a.ln1_gain->value) CHECK(v == 1.0);
    for (double v : a.ln1_bias->value) CHECK(v == 0.0);
    for (double v : a.head_b->value) CHECK(v == 0.0);
    const int H = cfg.lstm_hidden;
    for (int col = 0; col < 4 * H; ++col) {
        const double expected = (col >= H && col < 2 * H) ? 1.0 : 0.0;
        CHECK(a.lstm_fw_b->value[static_cast<std::size_t>(col)] == expected);
        CHECK(a.lstm_bw_b->value[static_cast<std::size_t>(col)] == expected);
    }
}

TEST_CASE("forward pass emits bounded probabilities with the contracted shape") {
    ModelConfig cfg = tiny_config();
    cfg.dropout = 0.5;
    Model m = Model::init(cfg, 91);
    std::mt19937_64 rng(92);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(cfg.seq_len) *
                          cfg.features);
    for (double& v : x) v = dist(rng);

    std::mt19937_64 dummy(0);
    auto out = model_forward(m, x, false, dummy);
    REQUIRE(out.logits->rows == 1);
    REQUIRE(out.logits->cols == cfg.output_size());
    REQUIRE(out.probs->size() == static_cast<std::size_t>(cfg.output_size()));
    for (double p : out.probs->value) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }

    auto again = model_forward(m, x, false, dummy);
    CHECK(out.probs->value == again.probs->value);

    std::mt19937_64 r1(5), r2(5), r3(6);
    auto t1 = model_forward(m, x, true, r1);
    auto t2 = model_forward(m, x, true, r2);
    auto t3 = model_forward(m, x, true, r3);
    CHECK(t1.probs->value == t2.probs->value);
    CHECK(t1.probs->value != t3.probs->value);

    std::vector<double> short_x(x.begin(), x.end() - 1);
    CHECK_THROWS_AS((void)model_forward(m, short_x, false, dummy),
                    std::invalid_argument);
}

TEST_CASE("gradients reach every parameter and no outsider") {
    ModelConfig cfg = tiny_config();
    Model m = Model::init(cfg, 101);
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(cfg.seq_len) *
                          cfg.features);
    for (double& v : x) v = dist(rng);

    auto params = m.parameters();
    auto outsider = nn::leaf(2, 2);
    std::vector<nn::TensorPtr> all = params;
    all.push_back(outsider);
    nn::zero_grad(all);

    std::mt19937_64 dummy(0);
    auto loss = nn::mean_all(model_forward(m, x, false, dummy).probs);
    nn::backward(loss);

    for (const auto& p : params) {
        bool nonzero = false;
        for (double g : p->grad) {
            CHECK(std::isfinite(g));
            if (g != 0.0) nonzero = true;
        }
        CHECK(nonzero);
    }
    for (double g : outsider->grad) CHECK(g == 0.0);

    // Finite-difference spot check over a random sample of coordinates.
    auto loss_value = [&] {
        std::mt19937_64 d(0);
        return nn::mean_all(model_forward(m, x, false, d).probs)->value[0];
    };
    std::mt19937_64 pick(103);
    std::uniform_int_distribution<std::size_t> tensor_pick(0,
                                                           params.size() - 1);
    for (int trial = 0; trial < 30; ++trial) {
        const auto& p = params[tensor_pick(pick)];
        std::uniform_int_distribution<std::size_t> idx_pick(0, p->size() - 1);
        const std::size_t i = idx_pick(pick);
        const double saved = p->value[i];
        const double h = 1e-5;
        p->value[i] = saved + h;
        const double up = loss_value();
        p->value[i] = saved - h;
        const double down = loss_value();
        p->value[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double analytic = p->grad[i];
        const double tol = std::max(
            1e-5, 1e-3 * std::max(std::fabs(numeric), std::fabs(analytic)));
        CHECK(std::fabs(numeric - analytic) <= tol);
    }
}

TEST_CASE("config validation rejects inconsistent dimensions") {
    auto expect_config_error = [](auto mutate) {
        ModelConfig cfg = tiny_config();
        mutate(cfg);
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    };
    expect_config_error([](ModelConfig& c) { c.seq_len = 0; });
    expect_config_error([](ModelConfig& c) { c.features = 0; });
    expect_config_error([](ModelConfig& c) { c.d_model = 6; c.heads = 4; });
    expect_config_error([](ModelConfig& c) { c.d_model = 5; c.heads = 1; });
    expect_config_error([](ModelConfig& c) { c.snb_hidden = {0, 3, 3}; });
    expect_config_error([](ModelConfig& c) { c.lstm_hidden = 0; });
    expect_config_error([](ModelConfig& c) { c.dropout = 1.0; });
    expect_config_error([](ModelConfig& c) { c.dropout = -0.1; });
    expect_config_error([](ModelConfig& c) { c.leaky_slope = 0.0; });
    tiny_config().validate();
}
