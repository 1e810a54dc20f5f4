#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "cyanocast/date.hpp"
#include "cyanocast/grid.hpp"

namespace cyano {

// A dated stack of grids for one variable of one segment. Dates are sorted
// and unique but need not be contiguous; a date absent from the series is
// treated as an all-missing day by every consumer.
struct RasterSeries {
    std::vector<Date> dates;
    std::vector<Grid> grids;

    std::size_t days() const { return dates.size(); }
    int width() const { return grids.empty() ? 0 : grids.front().width; }
    int height() const { return grids.empty() ? 0 : grids.front().height; }

    // Index of an exact date, if present. Binary search over sorted dates.
    std::optional<std::size_t> index_of(Date d) const;

    void push_day(Date d, Grid g);
};

// Loads every *.grd file in a directory; file stems must be YYYY-MM-DD.
// Rebuilds the consecutive-imputation counters from provenance chains.
RasterSeries load_series(const std::filesystem::path& dir);
void save_series(const RasterSeries& series, const std::filesystem::path& dir);

// Fraction of missing pixels over all days. Errors on an empty series.
double missing_fraction(const RasterSeries& series);

// Marks pixels with depth < min_depth (or missing depth) as permanently
// missing in every grid.
RasterSeries apply_depth_mask(const RasterSeries& series,
                              const BathymetryGrid& bathy,
                              double min_depth = 3.0);

// consec_imputed(p, t) = run length of consecutive calendar days ending at t
// whose pixel p was gap-filled. A day absent from the series breaks the run.
void recompute_consec(RasterSeries& series);

}  // namespace cyano
