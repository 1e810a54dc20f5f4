#include "cyanocast/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cyanocast/text_io.hpp"

namespace cyano {

double nearest_rank(const std::vector<double>& sorted_values, double p) {
    if (sorted_values.empty())
        throw std::invalid_argument("percentile of an empty sample");
    if (!(p > 0.0) || p > 1.0)
        throw std::invalid_argument("percentile fraction must be in (0,1]");
    const std::size_t n = sorted_values.size();
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(p * static_cast<double>(n)));
    return sorted_values[std::max<std::size_t>(rank, 1) - 1];
}

std::array<double, 4> fit_bins(std::vector<double> positive_values) {
    for (double v : positive_values)
        if (!(v > 0.0))
            throw std::invalid_argument(
                "bin fitting expects strictly positive values");
    std::sort(positive_values.begin(), positive_values.end());
    std::vector<double> distinct(positive_values);
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    if (distinct.size() < 5)
        throw DataError(
            "degenerate intensity distribution: fewer than 5 distinct "
            "positive values");
    std::array<double, 4> edges{};
    const std::array<double, 4> ps{0.2, 0.4, 0.6, 0.8};
    for (std::size_t i = 0; i < 4; ++i)
        edges[i] = nearest_rank(positive_values, ps[i]);
    for (std::size_t i = 1; i < 4; ++i)
        if (!(edges[i] > edges[i - 1]))
            throw DataError(
                "degenerate intensity distribution: bin edges collapse");
    if (!(edges[0] > 0.0) || !(edges[3] < 253.0))
        throw DataError("bin edges leave no room for the outer bins");
    return edges;
}

int bin_of(double value, const std::array<double, 4>& edges) {
    if (value == 0.0) return -1;
    if (value < 0.0 || value > 253.0)
        throw DataError("intensity value outside [0,253]: " +
                        fmt_double(value));
    for (int i = 0; i < 4; ++i)
        if (value <= edges[static_cast<std::size_t>(i)]) return i;
    return 4;
}

std::array<int, 5> bin_counts(const Grid& grid,
                              const std::array<double, 4>& edges) {
    std::array<int, 5> counts{};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.is_missing(i)) continue;
        const int b = bin_of(grid.values[i], edges);
        if (b >= 0) ++counts[static_cast<std::size_t>(b)];
    }
    return counts;
}

std::array<int, 5> calibrate_thresholds(
    const std::vector<std::array<int, 5>>& daily_counts) {
    if (daily_counts.empty())
        throw DataError("threshold calibration needs a nonempty history");
    std::array<int, 5> out{1, 1, 1, 1, 1};
    const std::array<double, 3> ps{0.5, 0.5, 0.6};
    for (std::size_t bin = 0; bin < 3; ++bin) {
        std::vector<double> nonzero;
        for (const auto& day : daily_counts)
            if (day[bin] > 0) nonzero.push_back(day[bin]);
        if (nonzero.empty()) continue;  // stays at the floor of 1
        std::sort(nonzero.begin(), nonzero.end());
        out[bin] = std::max(
            1, static_cast<int>(std::llround(nearest_rank(nonzero, ps[bin]))));
    }
    return out;
}

std::optional<TempSummary> grid_summary(const Grid& grid) {
    double mn = 0, mx = 0, sum = 0, sumsq = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.is_missing(i)) continue;
        const double v = grid.values[i];
        if (n == 0) {
            mn = mx = v;
        } else {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        sum += v;
        sumsq += v * v;
        ++n;
    }
    if (n == 0) return std::nullopt;
    TempSummary s;
    s.min = mn;
    s.max = mx;
    s.mean = sum / static_cast<double>(n);
    const double var =
        std::max(0.0, sumsq / static_cast<double>(n) - s.mean * s.mean);
    s.stdev = std::sqrt(var);
    s.range = mx - mn;
    return s;
}

std::array<double, 4> temporal_features(Date date) {
    const double doy = static_cast<double>(date.day_of_year());
    const double year_len = static_cast<double>(date.days_in_year());
    const double angle = 2.0 * std::numbers::pi * doy / year_len;
    return {std::sin(angle), std::cos(angle),
            static_cast<double>(date.month()) / 12.0,
            static_cast<double>(date.season()) / 3.0};
}

std::array<double, kFeatureCount> DailyRecord::features() const {
    std::array<double, kFeatureCount> f{};
    std::size_t k = 0;
    for (double b : bins) f[k++] = b;
    for (double t : temp) f[k++] = t;
    for (double t : temporal) f[k++] = t;
    return f;
}

RecordAssembler::RecordAssembler(const std::array<double, 4>& edges)
    : edges_(edges) {}

DailyRecord RecordAssembler::assemble(const std::string& segment_id,
                                      Date date, const Grid& ci,
                                      const Grid& temp_day,
                                      const Grid& temp_night) {
    DailyRecord rec;
    rec.date = date;
    rec.segment_id = segment_id;
    const auto counts = bin_counts(ci, edges_);
    for (std::size_t i = 0; i < 5; ++i)
        rec.bins[i] = static_cast<double>(counts[i]);

    const auto day = grid_summary(temp_day);
    const auto night = grid_summary(temp_night);
    if (day && night) {
        rec.temp = {day->min,   day->max,   day->mean,   day->stdev,
                    day->range, night->min, night->max,  night->mean,
                    night->stdev, night->range};
        rec.temp_valid = true;
        last_temp_ = rec.temp;
    } else {
        // The temperature block is carried forward as a unit; a half-valid
        // day (one of the two grids empty) is treated as invalid too.
        if (!last_temp_)
            throw DataError("no valid temperature before " + date.to_string() +
                            " to carry forward");
        rec.temp = *last_temp_;
        rec.temp_valid = false;
    }
    rec.temporal = temporal_features(date);
    return rec;
}

NormStats fit_normalization(const std::vector<DailyRecord>& records) {
    if (records.empty())
        throw DataError("normalization needs at least one record");
    NormStats stats;
    const double n = static_cast<double>(records.size());
    for (const DailyRecord& r : records) {
        const auto f = r.features();
        for (int i = 0; i < kFeatureCount; ++i) stats.mean[i] += f[i];
    }
    for (int i = 0; i < kFeatureCount; ++i) stats.mean[i] /= n;
    for (const DailyRecord& r : records) {
        const auto f = r.features();
        for (int i = 0; i < kFeatureCount; ++i) {
            const double d = f[i] - stats.mean[i];
            stats.stdev[i] += d * d;
        }
    }
    for (int i = 0; i < kFeatureCount; ++i)
        stats.stdev[i] = std::sqrt(stats.stdev[i] / n);
    return stats;
}

std::array<double, kFeatureCount> normalize(
    const std::array<double, kFeatureCount>& features,
    const NormStats& stats) {
    std::array<double, kFeatureCount> out{};
    for (int i = 0; i < kFeatureCount; ++i)
        out[i] = stats.stdev[i] > 0.0
                     ? (features[i] - stats.mean[i]) / stats.stdev[i]
                     : 0.0;
    return out;
}

std::set<int> extended_months(const std::set<int>& peak_months) {
    std::set<int> out = peak_months;
    for (int m : peak_months) out.insert(m == 1 ? 12 : m - 1);
    return out;
}

void save_calibration(const SegmentCalibration& calib,
                      const std::filesystem::path& path) {
    std::string out = "CALIB1\nsegment " + calib.segment_id + "\nedges";
    for (double e : calib.bin_edges) out += ' ' + fmt_double(e);
    out += "\nthresholds";
    for (int t : calib.thresholds) out += ' ' + std::to_string(t);
    out += "\npeak_months";
    for (int m : calib.peak_months) out += ' ' + std::to_string(m);
    out += "\nextended_months";
    for (int m : calib.extended) out += ' ' + std::to_string(m);
    out += "\nnorm_mean";
    for (double v : calib.norm.mean) out += ' ' + fmt_double(v);
    out += "\nnorm_std";
    for (double v : calib.norm.stdev) out += ' ' + fmt_double(v);
    out += '\n';
    atomic_write_file(path, out);
}

SegmentCalibration load_calibration(const std::filesystem::path& path) {
    const std::string origin = path.string();
    const auto lines = split(read_file(path), '\n');
    if (lines.empty() || trim(lines[0]) != "CALIB1")
        throw DataError(origin + ": malformed calibration header");
    SegmentCalibration c;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::string_view line = trim(lines[li]);
        if (line.empty()) continue;
        auto fields = split(line, ' ');
        const std::string key = fields[0];
        fields.erase(fields.begin());
        auto need = [&](std::size_t n) {
            if (fields.size() != n)
                throw DataError(origin + ": field '" + key + "' expects " +
                                std::to_string(n) + " values");
        };
        if (key == "segment") {
            need(1);
            c.segment_id = fields[0];
        } else if (key == "edges") {
            need(4);
            for (std::size_t i = 0; i < 4; ++i)
                c.bin_edges[i] = parse_double(fields[i]);
        } else if (key == "thresholds") {
            need(5);
            for (std::size_t i = 0; i < 5; ++i)
                c.thresholds[i] = static_cast<int>(parse_long(fields[i]));
        } else if (key == "peak_months") {
            for (const auto& f : fields)
                c.peak_months.insert(static_cast<int>(parse_long(f)));
        } else if (key == "extended_months") {
            for (const auto& f : fields)
                c.extended.insert(static_cast<int>(parse_long(f)));
        } else if (key == "norm_mean") {
            need(kFeatureCount);
            for (int i = 0; i < kFeatureCount; ++i)
                c.norm.mean[i] = parse_double(fields[static_cast<std::size_t>(i)]);
        } else if (key == "norm_std") {
            need(kFeatureCount);
            for (int i = 0; i < kFeatureCount; ++i)
                c.norm.stdev[i] =
                    parse_double(fields[static_cast<std::size_t>(i)]);
        } else {
            throw DataError(origin + ": unknown calibration field '" + key +
                            "'");
        }
    }
    if (c.segment_id.empty())
        throw DataError(origin + ": calibration lacks a segment id");
    return c;
}

namespace {

const char* kRecordsHeader =
    "date,segment,b1,b2,b3,b4,b5,"
    "day_min,day_max,day_mean,day_std,day_range,"
    "night_min,night_max,night_mean,night_std,night_range,"
    "doy_sin,doy_cos,month_frac,season_frac,temp_valid";

}  // namespace

void save_records_csv(const std::vector<DailyRecord>& records,
                      const std::filesystem::path& path) {
    std::string out = kRecordsHeader;
    out += '\n';
    for (const DailyRecord& r : records) {
        out += r.date.to_string();
        out += ',';
        out += r.segment_id;
        for (double b : r.bins) out += ',' + fmt_double(b);
        for (double t : r.temp) out += ',' + fmt_double(t);
        for (double t : r.temporal) out += ',' + fmt_double(t);
        out += r.temp_valid ? ",1" : ",0";
        out += '\n';
    }
    atomic_write_file(path, out);
}

std::vector<DailyRecord> load_records_csv(const std::filesystem::path& path) {
    const std::string origin = path.string();
    const auto lines = split(read_file(path), '\n');
    if (lines.empty() || trim(lines[0]) != kRecordsHeader)
        throw DataError(origin + ": unexpected records header");
    std::vector<DailyRecord> out;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::string_view line = trim(lines[li]);
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 22)
            throw DataError(origin + ": line " + std::to_string(li + 1) +
                            " has " + std::to_string(f.size()) +
                            " fields, expected 22");
        DailyRecord r;
        try {
            r.date = Date::parse(f[0]);
        } catch (const std::invalid_argument& e) {
            throw DataError(origin + ": " + e.what());
        }
        r.segment_id = f[1];
        for (std::size_t i = 0; i < 5; ++i) r.bins[i] = parse_double(f[2 + i]);
        for (std::size_t i = 0; i < 10; ++i)
            r.temp[i] = parse_double(f[7 + i]);
        for (std::size_t i = 0; i < 4; ++i)
            r.temporal[i] = parse_double(f[17 + i]);
        r.temp_valid = parse_long(f[21]) != 0;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace cyano
