#include "cyanocast/series.hpp"

#include <algorithm>

#include "cyanocast/errors.hpp"

namespace cyano {

std::optional<std::size_t> RasterSeries::index_of(Date d) const {
    const auto it = std::lower_bound(dates.begin(), dates.end(), d);
    if (it == dates.end() || *it != d) return std::nullopt;
    return static_cast<std::size_t>(it - dates.begin());
}

void RasterSeries::push_day(Date d, Grid g) {
    if (!dates.empty()) {
        if (d <= dates.back())
            throw DataError("series days must be appended in ascending order");
        if (g.width != width() || g.height != height())
            throw DataError("grid dimensions differ across days");
    }
    dates.push_back(d);
    grids.push_back(std::move(g));
}

RasterSeries load_series(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw DataError("not a directory: " + dir.string());

    std::vector<std::pair<Date, fs::path>> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".grd")
            continue;
        Date d;
        try {
            d = Date::parse(entry.path().stem().string());
        } catch (const std::invalid_argument&) {
            throw DataError("grid file name is not a date: " +
                            entry.path().string());
        }
        files.emplace_back(d, entry.path());
    }
    if (files.empty())
        throw DataError("no .grd files in " + dir.string());
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < files.size(); ++i)
        if (files[i].first == files[i - 1].first)
            throw DataError("duplicate date " + files[i].first.to_string() +
                            " in " + dir.string());

    RasterSeries out;
    for (auto& [date, path] : files) out.push_day(date, load_grid(path));
    recompute_consec(out);
    return out;
}

void save_series(const RasterSeries& series,
                 const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < series.days(); ++i)
        save_grid(series.grids[i],
                  dir / (series.dates[i].to_string() + ".grd"));
}

double missing_fraction(const RasterSeries& series) {
    if (series.days() == 0)
        throw DataError("missing fraction of an empty series");
    std::size_t missing = 0;
    std::size_t total = 0;
    for (const Grid& g : series.grids) {
        missing += g.missing_count();
        total += g.size();
    }
    return static_cast<double>(missing) / static_cast<double>(total);
}

RasterSeries apply_depth_mask(const RasterSeries& series,
                              const BathymetryGrid& bathy, double min_depth) {
    if (bathy.width != series.width() || bathy.height != series.height())
        throw DataError("bathymetry dimensions do not match the series");
    RasterSeries out = series;
    for (Grid& g : out.grids)
        for (std::size_t i = 0; i < g.size(); ++i)
            if (bathy.depth[i] < min_depth) g.set_missing(i);
    recompute_consec(out);
    return out;
}

void recompute_consec(RasterSeries& series) {
    if (series.days() == 0) return;
    const std::size_t n = series.grids.front().size();
    for (std::size_t i = 0; i < series.days(); ++i) {
        Grid& g = series.grids[i];
        const bool adjacent =
            i > 0 && series.dates[i] - series.dates[i - 1] == 1;
        for (std::size_t p = 0; p < n; ++p) {
            if (!is_imputed(g.provenance[p])) {
                g.consec_imputed[p] = 0;
                continue;
            }
            std::uint16_t prev = 0;
            if (adjacent && is_imputed(series.grids[i - 1].provenance[p]))
                prev = series.grids[i - 1].consec_imputed[p];
            g.consec_imputed[p] = static_cast<std::uint16_t>(prev + 1);
        }
    }
}

}  // namespace cyano
