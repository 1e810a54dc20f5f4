#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cyanocast/series.hpp"

namespace cyano {

struct ImputeConfig {
    // Weight on calendar day t-1, t-2, t-3 of the temporal window.
    std::array<double, 3> window_weights{3.0, 2.0, 1.0};
    // The weighted pass needs at least this many valid window entries.
    int min_valid_in_window = 2;
    // A pixel whose previous day already sits on a run of this many imputed
    // days is not extended further by the weighted pass.
    int max_consecutive_imputed = 2;
    // Gap lengths (in calendar days) the restoration pass may bridge.
    int restore_gap_min = 3;
    int restore_gap_max = 7;

    void validate() const;
};

// Weighted mean over a 3-day lookback window, weights renormalized over the
// entries actually present. Index 0 is the most recent day (t-1). Returns
// nothing when fewer than min_valid entries are present.
std::optional<double> weighted_window_mean(
    const std::array<std::optional<double>, 3>& window,
    const std::array<double, 3>& weights, int min_valid);

// Pass 1: copy yesterday's directly observed value into today's gap.
RasterSeries locf_pass(const RasterSeries& series);

// Pass 2: fill remaining gaps with the renormalized weighted mean of the
// previous three calendar days, refusing to extend an imputation run beyond
// max_consecutive_imputed days.
RasterSeries weighted_window_pass(const RasterSeries& series,
                                  const ImputeConfig& cfg);

// Pass 3: bridge 3-to-7-day gaps whose flanks both show a positive value,
// walking the gap day by day with the same weighted window (any valid entry
// suffices here).
RasterSeries restore_continuity(const RasterSeries& series,
                                const ImputeConfig& cfg);

struct StageLog {
    std::string stage;
    double missing_before = 0.0;
    double missing_after = 0.0;
};

// locf -> weighted window -> optional restoration. Monotone: no pass ever
// increases the number of missing pixels.
RasterSeries impute_pipeline(const RasterSeries& series,
                             const ImputeConfig& cfg, bool restore,
                             std::vector<StageLog>* log = nullptr);

}  // namespace cyano
