#include "cyanocast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cyanocast/errors.hpp"
#include "cyanocast/rng.hpp"

namespace cyano {

void SynthProfile::validate() const {
    if (segment_id.empty()) throw ConfigError("synth: empty segment id");
    if (end_year < start_year)
        throw ConfigError("synth: end year before start year");
    for (int m : peak_months)
        if (m < 1 || m > 12) throw ConfigError("synth: month out of range");
    if (peak_months.empty())
        throw ConfigError("synth: at least one peak month required");
    if (grid_width < 2 || grid_height < 2)
        throw ConfigError("synth: grid too small");
    for (double p : {p_enter_active, p_stay_active})
        if (p < 0.0 || p > 1.0)
            throw ConfigError("synth: transition probability outside [0,1]");
    if (active_pixels < 5)
        throw ConfigError("synth: need at least 5 active pixels");
    if (active_pixels > 125)
        throw ConfigError(
            "synth: more than 125 active pixels breaks value distinctness");
    if (count_jitter < 0 || count_jitter >= active_pixels)
        throw ConfigError("synth: jitter out of range");
    for (double p : {ci_pixel_missing, ci_day_missing, temp_pixel_missing,
                     temp_day_missing, shallow_fraction})
        if (p < 0.0 || p >= 1.0)
            throw ConfigError("synth: rate must be in [0,1)");
}

SynthData synth_rasters(const SynthProfile& profile, std::uint64_t seed) {
    profile.validate();
    const int W = profile.grid_width;
    const int H = profile.grid_height;
    const std::size_t n = static_cast<std::size_t>(W) * H;

    SynthData out;
    out.bathymetry.width = W;
    out.bathymetry.height = H;
    out.bathymetry.depth.assign(n, 10.0);
    {
        std::mt19937_64 rng = seeded_rng(seed, 1);
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        const auto shallow = static_cast<std::size_t>(
            std::llround(profile.shallow_fraction * static_cast<double>(n)));
        for (std::size_t i = 0; i < shallow; ++i)
            out.bathymetry.depth[order[i]] = 1.5;
    }
    std::vector<std::size_t> deep;
    for (std::size_t i = 0; i < n; ++i)
        if (out.bathymetry.depth[i] >= 3.0) deep.push_back(i);
    if (deep.size() < static_cast<std::size_t>(profile.active_pixels))
        throw ConfigError("synth: fewer deep pixels than active pixels");

    // The same positive values appear on every active day; only their
    // locations move. Spread over [1,250] so every intensity bin is hit.
    std::vector<double> multiset(
        static_cast<std::size_t>(profile.active_pixels));
    for (std::size_t j = 0; j < multiset.size(); ++j)
        multiset[j] =
            1.0 + std::floor(249.0 * static_cast<double>(j) /
                             static_cast<double>(multiset.size() - 1));

    std::mt19937_64 state_rng = seeded_rng(seed, 2);
    std::mt19937_64 layout_rng = seeded_rng(seed, 3);
    std::mt19937_64 ci_miss_rng = seeded_rng(seed, 4);
    std::mt19937_64 temp_rng = seeded_rng(seed, 5);
    std::mt19937_64 temp_miss_rng = seeded_rng(seed, 6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> temp_noise(-1.5, 1.5);

    const Date first = Date::from_ymd(profile.start_year, 1, 1);
    const Date last = Date::from_ymd(profile.end_year, 12, 31);

    bool active = false;
    for (Date d = first; d <= last; d = d + 1) {
        if (profile.peak_months.count(d.month()) == 0)
            active = false;
        else
            active = unit(state_rng) <
                     (active ? profile.p_stay_active
                             : profile.p_enter_active);

        Grid ci = Grid::all_missing(W, H);
        for (std::size_t i = 0; i < n; ++i)
            ci.set_value(i, out.bathymetry.depth[i] < 3.0 ? 5.0 : 0.0,
                         Provenance::Observed, 0);
        if (active) {
            std::vector<std::size_t> spots = deep;
            std::shuffle(spots.begin(), spots.end(), layout_rng);
            std::vector<double> values = multiset;
            std::shuffle(values.begin(), values.end(), layout_rng);
            std::size_t keep = values.size();
            if (profile.count_jitter > 0)
                keep -= static_cast<std::size_t>(
                    std::uniform_int_distribution<int>(
                        0, profile.count_jitter)(layout_rng));
            for (std::size_t j = 0; j < keep; ++j)
                ci.set_value(spots[j], values[j], Provenance::Observed, 0);
        }
        if (profile.ci_day_missing > 0.0 &&
            unit(ci_miss_rng) < profile.ci_day_missing) {
            for (std::size_t i = 0; i < n; ++i) ci.set_missing(i);
        } else if (profile.ci_pixel_missing > 0.0) {
            for (std::size_t i = 0; i < n; ++i)
                if (unit(ci_miss_rng) < profile.ci_pixel_missing)
                    ci.set_missing(i);
        }
        out.ci.push_day(d, std::move(ci));

        const double angle = 2.0 * std::numbers::pi *
                             (static_cast<double>(d.day_of_year()) - 120.0) /
                             365.0;
        const double base_day = 15.0 + 10.0 * std::sin(angle);
        Grid tday = Grid::all_missing(W, H);
        Grid tnight = Grid::all_missing(W, H);
        for (std::size_t i = 0; i < n; ++i) {
            tday.set_value(i, base_day + temp_noise(temp_rng),
                           Provenance::Observed, 0);
            tnight.set_value(i, base_day - 4.0 + temp_noise(temp_rng),
                             Provenance::Observed, 0);
        }
        // The first day stays fully valid so record assembly always has a
        // temperature block to carry forward from.
        if (d != first) {
            for (Grid* g : {&tday, &tnight}) {
                if (profile.temp_day_missing > 0.0 &&
                    unit(temp_miss_rng) < profile.temp_day_missing) {
                    for (std::size_t i = 0; i < n; ++i) g->set_missing(i);
                } else if (profile.temp_pixel_missing > 0.0) {
                    for (std::size_t i = 0; i < n; ++i)
                        if (unit(temp_miss_rng) < profile.temp_pixel_missing)
                            g->set_missing(i);
                }
            }
        }
        out.temp_day.push_day(d, std::move(tday));
        out.temp_night.push_day(d, std::move(tnight));
    }
    return out;
}

}  // namespace cyano
