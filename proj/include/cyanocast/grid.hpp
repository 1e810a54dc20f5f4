#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cyanocast/errors.hpp"

namespace cyano {

// How a pixel value came to be. Observed pixels came straight from the
// instrument; Locf/Weighted/Restored were produced by the gap-filling
// passes; Missing pixels hold the nodata value.
enum class Provenance : std::uint8_t {
    Observed,
    Locf,
    Weighted,
    Restored,
    Missing,
};

char provenance_code(Provenance p);
Provenance provenance_from_code(char c);

inline bool is_imputed(Provenance p) {
    return p == Provenance::Locf || p == Provenance::Weighted ||
           p == Provenance::Restored;
}

// One day of one variable on a fixed W*H lattice, row-major. The invariant
// provenance==Missing <=> value==nodata holds at all times; consec_imputed
// counts how many consecutive calendar days ending here were gap-filled
// (0 for Observed and Missing pixels).
struct Grid {
    int width = 0;
    int height = 0;
    double nodata = -9999.0;
    std::vector<double> values;
    std::vector<Provenance> provenance;
    std::vector<std::uint16_t> consec_imputed;

    static Grid all_missing(int width, int height, double nodata = -9999.0);

    std::size_t size() const { return values.size(); }
    bool is_missing(std::size_t i) const {
        return provenance[i] == Provenance::Missing;
    }
    void set_value(std::size_t i, double v, Provenance p,
                   std::uint16_t consec);
    void set_missing(std::size_t i);
    std::size_t missing_count() const;
};

// Static per-pixel depth in meters; used to exclude shallow water where the
// optical retrievals are unreliable.
struct BathymetryGrid {
    int width = 0;
    int height = 0;
    std::vector<double> depth;
};

// Line-oriented text format:
//   GRD1 <width> <height> <nodata>
//   PROV <0|1>
//   width*height values, one grid row per line
//   if PROV 1: width*height provenance codes (O L W R M), one row per line
Grid load_grid(const std::filesystem::path& path);
void save_grid(const Grid& grid, const std::filesystem::path& path);

std::string encode_grid(const Grid& grid);
Grid decode_grid(const std::string& text, const std::string& origin);

// Bathymetry reuses the GRD header with no provenance section.
BathymetryGrid load_bathymetry(const std::filesystem::path& path);
void save_bathymetry(const BathymetryGrid& grid,
                     const std::filesystem::path& path);

}  // namespace cyano
