#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "cyanocast/features.hpp"

namespace cyano {

constexpr int kSeqLen = 15;
constexpr int kHorizon = 14;

enum class Split { Train, Val, Test };

struct SplitSpec {
    std::vector<int> train_years;
    std::vector<int> val_years;
    std::vector<int> test_years;

    void validate() const;  // train non-empty, years pairwise disjoint
    std::optional<Split> split_of(int year) const;
};

// One training example: seq_len input days and horizon*classes exceedance
// labels. rows keeps the raw records while the sample lives in memory so
// augmentation can perturb and re-normalize; serialization drops them.
struct SequenceSample {
    std::vector<DailyRecord> rows;
    std::vector<double> x;          // seq_len * kFeatureCount, normalized
    std::vector<std::uint8_t> y;    // horizon * kClassCount, row h then class
    std::array<std::uint8_t, kClassCount> anchor_labels{};
    std::string segment_id;
    Date anchor_date;
    bool augmented = false;

    bool has_positive() const;
};

struct WindowConfig {
    int seq_len = kSeqLen;
    int horizon = kHorizon;
    void validate() const;
};

using CalibrationMap = std::map<std::string, SegmentCalibration>;

// Slides a window over each maximal run of consecutive calendar days.
// A sample needs seq_len input days plus horizon label days, all contiguous;
// the label for day t+h, class i is bin_count >= threshold_i. Records must
// all belong to the calibration's segment.
std::vector<SequenceSample> build_samples(std::vector<DailyRecord> records,
                                          const SegmentCalibration& calib,
                                          const WindowConfig& wc = {});

// Keeps samples anchored in the extended bloom months, drops positives
// outside them, then adds seed-sampled all-zero samples from the inactive
// months until all-zero samples no longer outnumber positive ones (or the
// supply runs out).
std::vector<SequenceSample> balance_samples(std::vector<SequenceSample> samples,
                                            const CalibrationMap& calibs,
                                            std::uint64_t seed);

// Count perturbation. Peak-month rows jitter counts well above threshold by
// up to 8 pixels and counts near or below it by up to 3; off-peak rows may
// only nudge mid-range counts upward by up to 2. Counts under 3 pixels and
// counts exactly at threshold never move; results clamp at zero.
void augment_bins(DailyRecord& rec, const SegmentCalibration& calib,
                  std::mt19937_64& rng);

// Temperature perturbation: min and max of each block shift independently by
// U[-0.1, +0.16] degrees, the mean by the average of the two shifts, the
// std scales with the range. Draws that break min <= mean <= max are redone
// up to 10 times, then the block is left untouched.
void augment_temperature(DailyRecord& rec, std::mt19937_64& rng);

// Rebuilds x from rows with the segment's normalization statistics.
void renormalize(SequenceSample& sample, const SegmentCalibration& calib);

// Augments a seeded half of the samples in place (labels untouched). Only
// the training split may be augmented.
std::vector<SequenceSample> augment_pass(std::vector<SequenceSample> samples,
                                         Split split,
                                         const CalibrationMap& calibs,
                                         std::uint64_t seed);

// Flat binary container with a fixed header; save/load/save is
// byte-identical. Raw rows are not persisted.
void save_samples(const std::vector<SequenceSample>& samples,
                  const WindowConfig& wc, const std::filesystem::path& path);
std::vector<SequenceSample> load_samples(const std::filesystem::path& path,
                                         WindowConfig* wc_out = nullptr);

}  // namespace cyano
