#include "cyanocast/impute.hpp"

#include "cyanocast/errors.hpp"

namespace cyano {

void ImputeConfig::validate() const {
    for (double w : window_weights)
        if (!(w > 0)) throw ConfigError("window weights must be positive");
    if (min_valid_in_window < 1 || min_valid_in_window > 3)
        throw ConfigError("min_valid_in_window must be in [1,3]");
    if (max_consecutive_imputed < 1)
        throw ConfigError("max_consecutive_imputed must be >= 1");
    if (restore_gap_min < 1 || restore_gap_max < restore_gap_min)
        throw ConfigError("restore gap bounds out of order");
}

std::optional<double> weighted_window_mean(
    const std::array<std::optional<double>, 3>& window,
    const std::array<double, 3>& weights, int min_valid) {
    double num = 0.0;
    double den = 0.0;
    int valid = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        if (!window[k]) continue;
        num += weights[k] * *window[k];
        den += weights[k];
        ++valid;
    }
    if (valid < min_valid) return std::nullopt;
    return num / den;
}

namespace {

// Series indices of calendar days date-1, date-2, date-3 relative to day i,
// or npos when that date is absent from the series.
constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);

std::array<std::size_t, 3> lookback_indices(const RasterSeries& s,
                                            std::size_t i) {
    std::array<std::size_t, 3> out{kAbsent, kAbsent, kAbsent};
    for (int k = 1; k <= 3; ++k) {
        const auto idx = s.index_of(s.dates[i] - k);
        if (idx) out[static_cast<std::size_t>(k - 1)] = *idx;
    }
    return out;
}

}  // namespace

RasterSeries locf_pass(const RasterSeries& series) {
    RasterSeries out = series;
    const std::size_t n =
        out.days() == 0 ? 0 : out.grids.front().size();
    for (std::size_t i = 0; i < out.days(); ++i) {
        const auto prev = out.index_of(out.dates[i] - 1);
        if (!prev) continue;
        Grid& today = out.grids[i];
        const Grid& yesterday = out.grids[*prev];
        for (std::size_t p = 0; p < n; ++p) {
            if (!today.is_missing(p)) continue;
            if (yesterday.provenance[p] != Provenance::Observed) continue;
            today.set_value(p, yesterday.values[p], Provenance::Locf, 1);
        }
    }
    recompute_consec(out);
    return out;
}

RasterSeries weighted_window_pass(const RasterSeries& series,
                                  const ImputeConfig& cfg) {
    cfg.validate();
    RasterSeries out = series;
    const std::size_t n =
        out.days() == 0 ? 0 : out.grids.front().size();
    for (std::size_t i = 0; i < out.days(); ++i) {
        const auto back = lookback_indices(out, i);
        Grid& today = out.grids[i];
        for (std::size_t p = 0; p < n; ++p) {
            if (!today.is_missing(p)) continue;
            // Days filled earlier in this same pass count as valid sources;
            // the run-length cap is what keeps chains from growing unbounded.
            if (back[0] != kAbsent &&
                out.grids[back[0]].consec_imputed[p] >=
                    cfg.max_consecutive_imputed)
                continue;
            std::array<std::optional<double>, 3> window;
            for (std::size_t k = 0; k < 3; ++k) {
                if (back[k] == kAbsent) continue;
                const Grid& g = out.grids[back[k]];
                if (!g.is_missing(p)) window[k] = g.values[p];
            }
            const auto mean = weighted_window_mean(window, cfg.window_weights,
                                                   cfg.min_valid_in_window);
            if (!mean) continue;
            const std::uint16_t prev_run =
                back[0] != kAbsent ? out.grids[back[0]].consec_imputed[p]
                                   : std::uint16_t{0};
            today.set_value(p, *mean, Provenance::Weighted,
                            static_cast<std::uint16_t>(prev_run + 1));
        }
    }
    recompute_consec(out);
    return out;
}

RasterSeries restore_continuity(const RasterSeries& series,
                                const ImputeConfig& cfg) {
    cfg.validate();
    RasterSeries out = series;
    if (out.days() == 0) return out;
    const std::size_t n = out.grids.front().size();

    for (std::size_t p = 0; p < n; ++p) {
        std::vector<std::size_t> valid;
        for (std::size_t i = 0; i < out.days(); ++i)
            if (!out.grids[i].is_missing(p)) valid.push_back(i);
        for (std::size_t v = 1; v < valid.size(); ++v) {
            const std::size_t a = valid[v - 1];
            const std::size_t b = valid[v];
            const std::int64_t gap = out.dates[b] - out.dates[a] - 1;
            if (gap < cfg.restore_gap_min || gap > cfg.restore_gap_max)
                continue;
            if (!(out.grids[a].values[p] > 0) ||
                !(out.grids[b].values[p] > 0))
                continue;
            // Walk the gap in date order so each filled day can feed the
            // next one's window.
            for (std::size_t i = a + 1; i < b; ++i) {
                if (!out.grids[i].is_missing(p)) continue;
                const auto back = lookback_indices(out, i);
                std::array<std::optional<double>, 3> window;
                for (std::size_t k = 0; k < 3; ++k) {
                    if (back[k] == kAbsent) continue;
                    const Grid& g = out.grids[back[k]];
                    if (!g.is_missing(p)) window[k] = g.values[p];
                }
                const auto mean = weighted_window_mean(
                    window, cfg.window_weights, 1);
                if (!mean) continue;
                const std::uint16_t prev_run =
                    back[0] != kAbsent ? out.grids[back[0]].consec_imputed[p]
                                       : std::uint16_t{0};
                out.grids[i].set_value(p, *mean, Provenance::Restored,
                                       static_cast<std::uint16_t>(prev_run +
                                                                  1));
            }
        }
    }
    recompute_consec(out);
    return out;
}

RasterSeries impute_pipeline(const RasterSeries& series,
                             const ImputeConfig& cfg, bool restore,
                             std::vector<StageLog>* log) {
    cfg.validate();
    auto run_stage = [&](const char* name, RasterSeries s,
                         auto&& fn) -> RasterSeries {
        const double before = missing_fraction(s);
        RasterSeries next = fn(std::move(s));
        const double after = missing_fraction(next);
        if (log) log->push_back({name, before, after});
        return next;
    };
    RasterSeries cur = run_stage("locf", series, [](RasterSeries s) {
        return locf_pass(s);
    });
    cur = run_stage("weighted_window", std::move(cur), [&](RasterSeries s) {
        return weighted_window_pass(s, cfg);
    });
    if (restore)
        cur = run_stage("restore", std::move(cur), [&](RasterSeries s) {
            return restore_continuity(s, cfg);
        });
    return cur;
}

}  // namespace cyano
