#pragma once

#include <cstdint>
#include <set>
#include <string>

#include "cyanocast/series.hpp"

namespace cyano {

// Generator for a desk-scale segment with a known ground truth: bloom
// activity follows a two-state Markov chain confined to the peak months, and
// every active day draws the same multiset of positive intensity values so
// the per-bin pixel counts (and hence the exceedance labels) are exact
// functions of the hidden state when no pixels are knocked out.
struct SynthProfile {
    std::string segment_id = "synthetic_segment";
    int start_year = 2016;
    int end_year = 2024;
    std::set<int> peak_months{6, 7, 8, 9};
    int grid_width = 8;
    int grid_height = 8;

    double p_enter_active = 0.45;  // inactive -> active, peak months only
    double p_stay_active = 0.73;   // active -> active
    int active_pixels = 40;        // positive pixels on an active day
    int count_jitter = 0;          // up to this many actives dropped per day

    double ci_pixel_missing = 0.0;
    double ci_day_missing = 0.0;    // whole intensity grid knocked out
    double temp_pixel_missing = 0.25;
    double temp_day_missing = 0.3;  // whole temperature grid knocked out
    double shallow_fraction = 0.0;  // pixels under the depth cutoff

    void validate() const;
};

struct SynthData {
    RasterSeries ci;
    RasterSeries temp_day;
    RasterSeries temp_night;
    BathymetryGrid bathymetry;
};

SynthData synth_rasters(const SynthProfile& profile, std::uint64_t seed);

}  // namespace cyano
