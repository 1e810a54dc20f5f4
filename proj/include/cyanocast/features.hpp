#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cyanocast/date.hpp"
#include "cyanocast/grid.hpp"

namespace cyano {

// Feature vector layout: 5 intensity-bin pixel counts, 5 daytime temperature
// statistics (min, max, mean, std, range), the same 5 for nighttime, then
// 4 calendar encodings (doy sin, doy cos, month/12, season/3).
constexpr int kFeatureCount = 19;
constexpr int kClassCount = 5;

// Nearest-rank order statistic of an ascending-sorted sample: the element
// with 1-based rank ceil(p*n).
double nearest_rank(const std::vector<double>& sorted_values, double p);

// Interior bin edges from the 20/40/60/80th percentiles of the positive
// training values. Bin i covers (edge[i-1], edge[i]] with edge0=0 and
// edge5=253; a value of exactly 0 falls in no bin.
std::array<double, 4> fit_bins(std::vector<double> positive_values);

// Bin index 0..4 for a positive value, -1 for zero.
int bin_of(double value, const std::array<double, 4>& edges);

// Pixel counts per bin over the non-missing pixels of one grid.
std::array<int, 5> bin_counts(const Grid& grid,
                              const std::array<double, 4>& edges);

// Per-bin activity thresholds from a history of daily counts: the median of
// the nonzero counts for bins 1 and 2, the 60th percentile for bin 3, one
// pixel for the rare high-intensity bins, everything clamped to >= 1.
std::array<int, 5> calibrate_thresholds(
    const std::vector<std::array<int, 5>>& daily_counts);

struct TempSummary {
    double min = 0, max = 0, mean = 0, stdev = 0, range = 0;
};

// Statistics over the non-missing pixels; population standard deviation.
std::optional<TempSummary> grid_summary(const Grid& grid);

std::array<double, 4> temporal_features(Date date);

struct DailyRecord {
    Date date;
    std::string segment_id;
    std::array<double, 5> bins{};      // pixel counts, kept as doubles so
                                       // augmentation can rewrite them
    std::array<double, 10> temp{};     // day then night summary
    std::array<double, 4> temporal{};
    bool temp_valid = true;            // false when carried forward

    std::array<double, kFeatureCount> features() const;
};

// Turns one day of rasters into a record. When neither temperature grid has
// a valid pixel the previous record's temperature block is carried forward;
// the first record of a series must have valid temperatures.
class RecordAssembler {
public:
    explicit RecordAssembler(const std::array<double, 4>& edges);

    DailyRecord assemble(const std::string& segment_id, Date date,
                         const Grid& ci, const Grid& temp_day,
                         const Grid& temp_night);

private:
    std::array<double, 4> edges_;
    std::optional<std::array<double, 10>> last_temp_;
};

struct NormStats {
    std::array<double, kFeatureCount> mean{};
    std::array<double, kFeatureCount> stdev{};
};

// Per-feature mean and population std over the given records.
NormStats fit_normalization(const std::vector<DailyRecord>& records);

// Z-score; a zero-variance feature maps to 0.
std::array<double, kFeatureCount> normalize(
    const std::array<double, kFeatureCount>& features, const NormStats& stats);

// Peak months plus the month preceding each (with December wrap).
std::set<int> extended_months(const std::set<int>& peak_months);

struct SegmentCalibration {
    std::string segment_id;
    std::array<double, 4> bin_edges{};
    std::array<int, 5> thresholds{1, 1, 1, 1, 1};
    std::set<int> peak_months;
    std::set<int> extended;
    NormStats norm;
};

void save_calibration(const SegmentCalibration& calib,
                      const std::filesystem::path& path);
SegmentCalibration load_calibration(const std::filesystem::path& path);

void save_records_csv(const std::vector<DailyRecord>& records,
                      const std::filesystem::path& path);
std::vector<DailyRecord> load_records_csv(const std::filesystem::path& path);

}  // namespace cyano
