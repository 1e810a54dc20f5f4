#include <random>

#include "cyanocast/impute.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cyano;

namespace {

// Single-pixel series builder: 'm' marks a missing day, 'x' an absent date,
// digits 0..9 observed values (scaled by 10 to stay interesting).
RasterSeries pixel_series(const char* pattern,
                          const char* start = "2021-06-01") {
    RasterSeries s;
    Date d = Date::parse(start);
    for (const char* c = pattern; *c; ++c, d = d + 1) {
        if (*c == 'x') continue;
        Grid g = Grid::all_missing(1, 1);
        if (*c != 'm')
            g.set_value(0, (*c - '0') * 10.0, Provenance::Observed, 0);
        s.push_day(d, g);
    }
    recompute_consec(s);
    return s;
}

std::vector<double> pixel_values(const RasterSeries& s) {
    std::vector<double> out;
    for (const Grid& g : s.grids)
        out.push_back(g.is_missing(0) ? -1.0 : g.values[0]);
    return out;
}

std::vector<char> pixel_provs(const RasterSeries& s) {
    std::vector<char> out;
    for (const Grid& g : s.grids)
        out.push_back(provenance_code(g.provenance[0]));
    return out;
}

void check_against_oracle(const RasterSeries& got, oracle::Timeline& want) {
    const std::size_t n = got.grids.front().size();
    for (std::size_t i = 0; i < got.days(); ++i) {
        const auto off = static_cast<std::size_t>(got.dates[i].serial() -
                                                  want.base);
        for (std::size_t p = 0; p < n; ++p) {
            const oracle::Cell& cell = want.pixels[p][off];
            const Grid& g = got.grids[i];
            REQUIRE(cell.present);
            CHECK(g.is_missing(p) == cell.miss);
            if (!cell.miss) {
                CHECK(g.values[p] == cell.value);
                CHECK(provenance_code(g.provenance[p]) == cell.prov);
            }
            CHECK(g.consec_imputed[p] == cell.consec);
        }
    }
}

}  // namespace

TEST_CASE("weighted window mean matches hand-computed values") {
    const std::array<double, 3> w{3, 2, 1};
    using W = std::array<std::optional<double>, 3>;
    // All three days valid: (3*12 + 2*6 + 1*0) / 6.
    CHECK(weighted_window_mean(W{12.0, 6.0, 0.0}, w, 2).value() == 8.0);
    // Most recent day missing, weights renormalize to 2 and 1.
    CHECK(weighted_window_mean(W{std::nullopt, 6.0, 3.0}, w, 2).value() ==
          5.0);
    // A single valid entry is below the default minimum.
    CHECK(!weighted_window_mean(W{4.0, std::nullopt, std::nullopt}, w, 2));
    CHECK(!weighted_window_mean(W{}, w, 2));
    // With the relaxed minimum a single entry passes through unweighted.
    CHECK(weighted_window_mean(W{std::nullopt, std::nullopt, 9.0}, w, 1)
              .value() == 9.0);
    CHECK(weighted_window_mean(W{6.0, 6.0, std::nullopt}, w, 2).value() ==
          6.0);
}

TEST_CASE("locf copies only directly observed previous days") {
    // Day 2 takes day 1's observed value; day 3 must not chain off the copy.
    RasterSeries s = locf_pass(pixel_series("5mm"));
    CHECK(pixel_values(s) == std::vector<double>{50, 50, -1});
    CHECK(pixel_provs(s) == std::vector<char>{'O', 'L', 'M'});
    CHECK(s.grids[1].consec_imputed[0] == 1);

    // An absent calendar date between source and gap blocks the copy.
    RasterSeries gap = locf_pass(pixel_series("5xm"));
    CHECK(pixel_values(gap) == std::vector<double>{50, -1});

    // A missing previous day blocks the copy.
    RasterSeries mm = locf_pass(pixel_series("m5"));
    CHECK(pixel_values(mm) == std::vector<double>{-1, 50});
}

TEST_CASE("weighted pass renormalizes and honors the run-length cap") {
    const ImputeConfig cfg;

    // Two valid window days out of three.
    RasterSeries s = weighted_window_pass(pixel_series("63m"), cfg);
    // (3*30 + 2*60) / 5 = 42.
    CHECK(pixel_values(s) == std::vector<double>{60, 30, 42});
    CHECK(pixel_provs(s)[2] == 'W');

    // One valid day is below the minimum.
    RasterSeries single = weighted_window_pass(pixel_series("m6m"), cfg);
    CHECK(pixel_values(single) == std::vector<double>{-1, 60, -1});

    // locf then weighted: the run stops at two imputed days, restarts after
    // an unfilled day.
    RasterSeries chain =
        weighted_window_pass(locf_pass(pixel_series("6mmmm")), cfg);
    CHECK(pixel_values(chain) == std::vector<double>{60, 60, 60, -1, 60});
    CHECK(pixel_provs(chain) ==
          std::vector<char>{'O', 'L', 'W', 'M', 'W'});
    std::vector<std::uint16_t> runs;
    for (const Grid& g : chain.grids) runs.push_back(g.consec_imputed[0]);
    CHECK(runs == std::vector<std::uint16_t>{0, 1, 2, 0, 1});
}

TEST_CASE("restoration bridges positive 3-to-7 day gaps day by day") {
    const ImputeConfig cfg;

    RasterSeries s = restore_continuity(pixel_series("5mmm5"), cfg);
    CHECK(pixel_values(s) == std::vector<double>{50, 50, 50, 50, 50});
    CHECK(pixel_provs(s) ==
          std::vector<char>{'O', 'R', 'R', 'R', 'O'});

    // A zero-valued flank is not bloom continuity.
    RasterSeries zero = restore_continuity(pixel_series("0mmm5"), cfg);
    CHECK(pixel_values(zero) == std::vector<double>{0, -1, -1, -1, 50});

    // Eight missing days exceed the window.
    RasterSeries wide = restore_continuity(pixel_series("5mmmmmmmm5"), cfg);
    CHECK(pixel_values(wide)[4] == -1.0);

    // Two missing days are left to the other passes.
    RasterSeries narrow = restore_continuity(pixel_series("5mm5"), cfg);
    CHECK(pixel_values(narrow) == std::vector<double>{50, -1, -1, 50});

    // Absent dates count toward the calendar gap; only present days fill.
    RasterSeries absent = restore_continuity(pixel_series("5xmxx5"), cfg);
    CHECK(pixel_values(absent) == std::vector<double>{50, 50, 50});
    CHECK(pixel_provs(absent) == std::vector<char>{'O', 'R', 'O'});
}

TEST_CASE("restoration walks forward so later days see restored values") {
    const ImputeConfig cfg;
    RasterSeries s = restore_continuity(pixel_series("63mmm3"), cfg);
    // Day 3 window: (3*30 + 2*60) / 5 = 42.
    // Day 4 window: (3*42 + 2*30 + 1*60) / 6 = 41.
    // Day 5 window: (3*41 + 2*42 + 1*30) / 6 = 39.5.
    CHECK(pixel_values(s) ==
          std::vector<double>{60, 30, 42, 41, 39.5, 30});
}

TEST_CASE("pipeline is monotone and logs per-stage missingness") {
    RasterSeries s = pixel_series("6mm5mmmmm3mxxm");
    std::vector<StageLog> log;
    const ImputeConfig cfg;
    RasterSeries out = impute_pipeline(s, cfg, true, &log);
    REQUIRE(log.size() == 3);
    CHECK(log[0].stage == "locf");
    CHECK(log[1].stage == "weighted_window");
    CHECK(log[2].stage == "restore");
    CHECK(log[0].missing_before == doctest::Approx(missing_fraction(s)));
    for (const StageLog& entry : log)
        CHECK(entry.missing_after <= entry.missing_before);
    CHECK(log[2].missing_after == doctest::Approx(missing_fraction(out)));
}

TEST_CASE("imputation config validation") {
    ImputeConfig cfg;
    cfg.window_weights = {0, 2, 1};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ImputeConfig{};
    cfg.min_valid_in_window = 4;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ImputeConfig{};
    cfg.restore_gap_min = 5;
    cfg.restore_gap_max = 4;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("imputation passes match the dense-timeline oracle") {
    std::mt19937_64 rng(7031);
    const ImputeConfig cfg;
    for (int trial = 0; trial < 25; ++trial) {
        // Random 5x4 series over ~45 days with absent dates and heavy gaps.
        RasterSeries s;
        Date d = Date::parse("2020-04-01");
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<int> dn(0, 253);
        int made = 0;
        while (made < 45) {
            if (unit(rng) < 0.12) {
                d = d + 1;
                continue;  // absent calendar day
            }
            Grid g = Grid::all_missing(5, 4);
            for (std::size_t p = 0; p < g.size(); ++p) {
                if (unit(rng) < 0.45) continue;
                // Mix zeros in so the positive-flank rule is exercised.
                const double v = unit(rng) < 0.25 ? 0.0 : dn(rng);
                g.set_value(p, v, Provenance::Observed, 0);
            }
            s.push_day(d, g);
            d = d + 1;
            ++made;
        }
        recompute_consec(s);

        oracle::Timeline t = oracle::timeline_from_series(s);
        oracle::timeline_locf(t);
        RasterSeries got = locf_pass(s);
        check_against_oracle(got, t);

        oracle::timeline_weighted(t, cfg.window_weights,
                                  cfg.min_valid_in_window,
                                  cfg.max_consecutive_imputed);
        got = weighted_window_pass(got, cfg);
        check_against_oracle(got, t);

        oracle::timeline_restore(t, cfg.window_weights, cfg.restore_gap_min,
                                 cfg.restore_gap_max);
        got = restore_continuity(got, cfg);
        check_against_oracle(got, t);
    }
}
