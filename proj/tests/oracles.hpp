#pragma once

// Reference implementations used only by tests. Each one recomputes a
// pipeline result from first principles with a deliberately different
// representation (dense calendar timelines, pairwise statistics) so that a
// shared bug with the production code is unlikely.

#include <cstdint>
#include <vector>

#include "cyanocast/series.hpp"

namespace oracle {

struct Cell {
    bool present = false;  // date exists in the series
    bool miss = true;
    double value = 0.0;
    char prov = 'M';
    int consec = 0;
};

inline bool cell_imputed(const Cell& c) {
    return c.prov == 'L' || c.prov == 'W' || c.prov == 'R';
}

// One dense row of calendar days per pixel; offset 0 is the first series
// date, absent dates sit in the row as non-present cells.
struct Timeline {
    std::int64_t base = 0;
    int days = 0;
    std::vector<std::vector<Cell>> pixels;
};

inline Timeline timeline_from_series(const cyano::RasterSeries& s) {
    Timeline t;
    t.base = s.dates.front().serial();
    t.days = static_cast<int>(s.dates.back().serial() - t.base) + 1;
    const std::size_t n = s.grids.front().size();
    t.pixels.assign(n, std::vector<Cell>(static_cast<std::size_t>(t.days)));
    for (std::size_t i = 0; i < s.days(); ++i) {
        const auto off =
            static_cast<std::size_t>(s.dates[i].serial() - t.base);
        for (std::size_t p = 0; p < n; ++p) {
            Cell& c = t.pixels[p][off];
            c.present = true;
            c.miss = s.grids[i].is_missing(p);
            if (!c.miss) {
                c.value = s.grids[i].values[p];
                c.prov = cyano::provenance_code(s.grids[i].provenance[p]);
            }
        }
    }
    return t;
}

inline void timeline_recount(Timeline& t) {
    for (auto& row : t.pixels) {
        int run = 0;
        for (Cell& c : row) {
            if (c.present && cell_imputed(c))
                run += 1;
            else
                run = 0;
            c.consec = c.present && cell_imputed(c) ? run : 0;
        }
    }
}

inline void timeline_locf(Timeline& t) {
    for (auto& row : t.pixels) {
        for (std::size_t d = 1; d < row.size(); ++d) {
            Cell& c = row[d];
            if (!c.present || !c.miss) continue;
            const Cell& src = row[d - 1];
            if (!src.present || src.miss || src.prov != 'O') continue;
            c.miss = false;
            c.value = src.value;
            c.prov = 'L';
        }
    }
    timeline_recount(t);
}

inline void timeline_weighted(Timeline& t,
                              const std::array<double, 3>& weights,
                              int min_valid, int max_chain) {
    for (auto& row : t.pixels) {
        for (std::size_t d = 0; d < row.size(); ++d) {
            Cell& c = row[d];
            if (!c.present || !c.miss) continue;
            int prev_run = 0;
            if (d >= 1 && row[d - 1].present && cell_imputed(row[d - 1]))
                prev_run = row[d - 1].consec;
            if (prev_run >= max_chain) continue;
            double num = 0, den = 0;
            int valid = 0;
            for (std::size_t k = 1; k <= 3; ++k) {
                if (d < k) continue;
                const Cell& src = row[d - k];
                if (!src.present || src.miss) continue;
                num += weights[k - 1] * src.value;
                den += weights[k - 1];
                ++valid;
            }
            if (valid < min_valid) continue;
            c.miss = false;
            c.value = num / den;
            c.prov = 'W';
            c.consec = prev_run + 1;
        }
    }
    timeline_recount(t);
}

inline void timeline_restore(Timeline& t,
                             const std::array<double, 3>& weights, int gap_min,
                             int gap_max) {
    for (auto& row : t.pixels) {
        std::vector<std::size_t> valid;
        for (std::size_t d = 0; d < row.size(); ++d)
            if (row[d].present && !row[d].miss) valid.push_back(d);
        for (std::size_t v = 1; v < valid.size(); ++v) {
            const std::size_t a = valid[v - 1];
            const std::size_t b = valid[v];
            const int gap = static_cast<int>(b - a) - 1;
            if (gap < gap_min || gap > gap_max) continue;
            if (!(row[a].value > 0) || !(row[b].value > 0)) continue;
            for (std::size_t d = a + 1; d < b; ++d) {
                Cell& c = row[d];
                if (!c.present || !c.miss) continue;
                double num = 0, den = 0;
                int got = 0;
                for (std::size_t k = 1; k <= 3; ++k) {
                    if (d < k) continue;
                    const Cell& src = row[d - k];
                    if (!src.present || src.miss) continue;
                    num += weights[k - 1] * src.value;
                    den += weights[k - 1];
                    ++got;
                }
                if (got < 1) continue;
                c.miss = false;
                c.value = num / den;
                c.prov = 'R';
            }
        }
    }
    timeline_recount(t);
}

}  // namespace oracle
