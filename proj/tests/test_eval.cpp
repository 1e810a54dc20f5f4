#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "cyanocast/eval.hpp"

using namespace cyano;

namespace {

// O(p*n) pair counting; ties score one half. The implementation under test
// uses midranks, so agreement is the classic rank-sum identity.
double brute_force_auc(const std::vector<double>& scores,
                       const std::vector<std::uint8_t>& targets) {
    double wins = 0.0;
    std::size_t pos = 0, neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!targets[i]) continue;
        ++pos;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (targets[j]) continue;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    for (std::uint8_t t : targets) neg += t ? 0 : 1;
    return wins / (static_cast<double>(pos) * static_cast<double>(neg));
}

std::vector<std::uint8_t> random_bits(std::size_t n, double p_one,
                                      std::mt19937_64& rng) {
    std::bernoulli_distribution coin(p_one);
    std::vector<std::uint8_t> out(n);
    for (auto& b : out) b = coin(rng) ? 1 : 0;
    return out;
}

}  // namespace

TEST_CASE("binarization uses a strict threshold") {
    const auto bits = binarize({0.5, 0.9, 0.0, 0.500000001, 0.49}, 0.5);
    CHECK(bits == std::vector<std::uint8_t>{0, 1, 0, 1, 0});
    CHECK(binarize({0.2, 0.3}, 0.5) == std::vector<std::uint8_t>{0, 0});
}

TEST_CASE("pooled metrics match hand-computed confusion values") {
    // TP=2, FP=1, FN=1, TN=1.
    const std::vector<std::uint8_t> preds{1, 1, 1, 0, 0};
    const std::vector<std::uint8_t> targets{1, 1, 0, 1, 0};
    const auto m = micro_metrics(preds, targets);
    CHECK(m.accuracy == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(m.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(m.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(m.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK_FALSE(m.any_degenerate());

    const auto perfect = micro_metrics({1, 0, 1}, {1, 0, 1});
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    // All-negative predictions on mixed targets: no positive predictions,
    // so precision has a zero denominator.
    const auto degen = micro_metrics({0, 0, 0}, {1, 0, 1});
    CHECK(degen.precision == 0.0);
    CHECK(degen.precision_degenerate);
    CHECK(degen.f1 == 0.0);
}

TEST_CASE("micro F1 is the harmonic mean of precision and recall") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const auto preds = random_bits(40, 0.4, rng);
        const auto targets = random_bits(40, 0.3, rng);
        const auto m = micro_metrics(preds, targets);
        if (m.any_degenerate()) continue;
        const double harmonic =
            2.0 * m.precision * m.recall / (m.precision + m.recall);
        CHECK(std::fabs(m.f1 - harmonic) <= 1e-12);
    }
}

TEST_CASE("weighted metrics average per-class scores by support") {
    // Two classes interleaved with stride 2. Class 0: preds (1,0), targets
    // (1,1) -> P=1, R=1/2, F1=2/3, support 2. Class 1: preds (1,1), targets
    // (0,1) -> P=1/2, R=1, F1=2/3, support 1.
    const std::vector<std::uint8_t> preds{1, 1, 0, 1};
    const std::vector<std::uint8_t> targets{1, 0, 1, 1};
    const auto w = weighted_metrics(preds, targets, 2);
    CHECK(w.precision == doctest::Approx((2.0 * 1.0 + 0.5) / 3.0));
    CHECK(w.recall == doctest::Approx((2.0 * 0.5 + 1.0) / 3.0));
    CHECK(w.f1 == doctest::Approx(2.0 / 3.0));
    CHECK_FALSE(w.degenerate);

    // No positives anywhere: nothing carries weight.
    const auto empty = weighted_metrics({0, 1, 0, 0}, {0, 0, 0, 0}, 2);
    CHECK(empty.degenerate);
    CHECK(empty.f1 == 0.0);
}

TEST_CASE("rank-based area under the curve matches pair counting") {
    CHECK(auc_score({0.9, 0.1}, {1, 0}).value() == 1.0);
    CHECK(auc_score({0.5, 0.5, 0.5}, {1, 0, 1}).value() == 0.5);
    CHECK(auc_score({0.8, 0.6, 0.4}, {1, 0, 1}).value() ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK_FALSE(auc_score({0.3, 0.7}, {1, 1}).has_value());
    CHECK_FALSE(auc_score({0.3, 0.7}, {0, 0}).has_value());
    CHECK_FALSE(auc_score({}, {}).has_value());

    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> score_dist(0.0, 1.0);
    std::uniform_int_distribution<int> tie_dist(0, 4);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(tie_dist(rng)) * 10;
        std::vector<double> scores(n);
        // Quantized scores force frequent ties through the midrank path.
        for (double& s : scores) s = tie_dist(rng) / 4.0;
        auto targets = random_bits(n, 0.4, rng);
        const auto fast = auc_score(scores, targets);
        bool has_pos = false, has_neg = false;
        for (auto t : targets) (t ? has_pos : has_neg) = true;
        if (!has_pos || !has_neg) {
            CHECK_FALSE(fast.has_value());
            continue;
        }
        REQUIRE(fast.has_value());
        CHECK(fast.value() ==
              doctest::Approx(brute_force_auc(scores, targets))
                  .epsilon(1e-12));
    }
}

TEST_CASE("area under the curve ignores monotone score transforms") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> dist(0.01, 0.99);
    std::vector<double> scores(30);
    for (double& s : scores) s = dist(rng);
    const auto targets = random_bits(30, 0.5, rng);
    auto base = auc_score(scores, targets);
    REQUIRE(base.has_value());
    std::vector<double> logit(30), scaled(30);
    for (std::size_t i = 0; i < 30; ++i) {
        logit[i] = std::log(scores[i] / (1.0 - scores[i]));
        scaled[i] = 100.0 * scores[i] + 7.0;
    }
    CHECK(auc_score(logit, targets).value() ==
          doctest::Approx(base.value()).epsilon(1e-12));
    CHECK(auc_score(scaled, targets).value() ==
          doctest::Approx(base.value()).epsilon(1e-12));
}

TEST_CASE("hit rate covers event and quiet days") {
    // 8 hits out of 10 observed events.
    std::vector<std::uint8_t> preds, targets;
    for (int i = 0; i < 10; ++i) {
        targets.push_back(1);
        preds.push_back(i < 8 ? 1 : 0);
    }
    targets.push_back(0);
    preds.push_back(1);
    const auto pod = pod_sample(preds, targets);
    CHECK(pod.event_day);
    CHECK(pod.value == doctest::Approx(0.8).epsilon(1e-12));

    const auto full = pod_sample({1, 1, 0}, {1, 1, 0});
    CHECK(full.value == 1.0);

    // No observed events: the correct-rejection rate keeps the series total.
    const auto quiet = pod_sample({0, 0, 0, 1}, {0, 0, 0, 0});
    CHECK_FALSE(quiet.event_day);
    CHECK(quiet.value == doctest::Approx(0.75).epsilon(1e-12));
    const auto quiet_clean = pod_sample({0, 0}, {0, 0});
    CHECK(quiet_clean.value == 1.0);
}

TEST_CASE("hit rate equals recall restricted to observed-positive slots") {
    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 100; ++trial) {
        const auto preds = random_bits(70, 0.5, rng);
        const auto targets = random_bits(70, 0.4, rng);
        std::vector<std::uint8_t> pos_preds, pos_targets;
        for (std::size_t i = 0; i < targets.size(); ++i)
            if (targets[i]) {
                pos_preds.push_back(preds[i]);
                pos_targets.push_back(1);
            }
        if (pos_targets.empty()) continue;
        const auto pod = pod_sample(preds, targets);
        const auto recall = micro_metrics(pos_preds, pos_targets).recall;
        CHECK(pod.event_day);
        CHECK(pod.value == recall);
    }
}

TEST_CASE("persistence tiles the anchor labels across the horizon") {
    std::array<std::uint8_t, kClassCount> anchor{1, 0, 0, 0, 0};
    const auto tiled = persistence_forecast(anchor, 14);
    REQUIRE(tiled.size() == 14u * kClassCount);
    for (int h = 0; h < 14; ++h)
        for (int c = 0; c < kClassCount; ++c)
            CHECK(tiled[static_cast<std::size_t>(h * kClassCount + c)] ==
                  anchor[static_cast<std::size_t>(c)]);

    std::array<std::uint8_t, kClassCount> zero{};
    for (auto b : persistence_forecast(zero, 14)) CHECK(b == 0);

    // A constant series makes the day-1 persistence forecast perfect.
    std::array<std::uint8_t, kClassCount> steady{1, 1, 0, 0, 0};
    const auto f = persistence_forecast(steady, 1);
    const std::vector<std::uint8_t> day1(steady.begin(), steady.end());
    CHECK(micro_metrics(f, day1).f1 == 1.0);
}

TEST_CASE("ensemble averaging is an elementwise mean") {
    CHECK(ensemble_mean({{0.2}, {0.8}})[0] ==
          doctest::Approx(0.5).epsilon(1e-12));
    const auto three = ensemble_mean({{0.9}, {0.4}, {0.4}});
    CHECK(three[0] == doctest::Approx(0.5666666667).epsilon(1e-9));
    CHECK(binarize(three, 0.5) == std::vector<std::uint8_t>{1});

    const std::vector<double> same{0.1, 0.7, 0.3};
    const auto averaged = ensemble_mean({same, same, same});
    for (std::size_t i = 0; i < same.size(); ++i)
        CHECK(averaged[i] == doctest::Approx(same[i]).epsilon(1e-12));

    CHECK_THROWS_AS((void)ensemble_mean({}), std::invalid_argument);
    CHECK_THROWS_AS((void)ensemble_mean({{0.1, 0.2}, {0.3}}),
                    std::invalid_argument);
}
