#include "cyanocast/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <set>

#include "cyanocast/errors.hpp"
#include "cyanocast/rng.hpp"
#include "cyanocast/text_io.hpp"

namespace cyano {

void SplitSpec::validate() const {
    if (train_years.empty())
        throw ConfigError("split needs at least one training year");
    std::set<int> seen;
    for (const auto* years : {&train_years, &val_years, &test_years})
        for (int y : *years)
            if (!seen.insert(y).second)
                throw ConfigError("year " + std::to_string(y) +
                                  " appears in two splits");
}

std::optional<Split> SplitSpec::split_of(int year) const {
    auto has = [year](const std::vector<int>& v) {
        return std::find(v.begin(), v.end(), year) != v.end();
    };
    if (has(train_years)) return Split::Train;
    if (has(val_years)) return Split::Val;
    if (has(test_years)) return Split::Test;
    return std::nullopt;
}

bool SequenceSample::has_positive() const {
    for (std::uint8_t v : y)
        if (v) return true;
    return false;
}

void WindowConfig::validate() const {
    if (seq_len < 1 || horizon < 1)
        throw ConfigError("window lengths must be positive");
}

std::vector<SequenceSample> build_samples(std::vector<DailyRecord> records,
                                          const SegmentCalibration& calib,
                                          const WindowConfig& wc) {
    wc.validate();
    for (const DailyRecord& r : records)
        if (r.segment_id != calib.segment_id)
            throw DataError("record for segment '" + r.segment_id +
                            "' mixed into '" + calib.segment_id + "'");
    std::sort(records.begin(), records.end(),
              [](const DailyRecord& a, const DailyRecord& b) {
                  return a.date < b.date;
              });
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].date == records[i - 1].date)
            throw DataError("duplicate record date " +
                            records[i].date.to_string());

    auto exceeds = [&](const DailyRecord& r) {
        std::array<std::uint8_t, kClassCount> out{};
        for (int c = 0; c < kClassCount; ++c)
            out[static_cast<std::size_t>(c)] =
                r.bins[static_cast<std::size_t>(c)] >=
                        static_cast<double>(
                            calib.thresholds[static_cast<std::size_t>(c)])
                    ? 1
                    : 0;
        return out;
    };

    std::vector<SequenceSample> samples;
    const int need = wc.seq_len + wc.horizon;
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= records.size(); ++i) {
        const bool run_ends =
            i == records.size() ||
            records[i].date - records[i - 1].date != 1;
        if (!run_ends) continue;
        const std::size_t run_len = i - run_start;
        if (run_len >= static_cast<std::size_t>(need)) {
            for (std::size_t s = run_start;
                 s + static_cast<std::size_t>(need) <= i; ++s) {
                SequenceSample smp;
                smp.segment_id = calib.segment_id;
                smp.rows.assign(records.begin() + static_cast<std::ptrdiff_t>(s),
                                records.begin() +
                                    static_cast<std::ptrdiff_t>(
                                        s + static_cast<std::size_t>(
                                                wc.seq_len)));
                smp.anchor_date = smp.rows.back().date;
                smp.anchor_labels = exceeds(smp.rows.back());
                smp.y.reserve(static_cast<std::size_t>(wc.horizon) *
                              kClassCount);
                for (int h = 0; h < wc.horizon; ++h) {
                    const DailyRecord& fut =
                        records[s + static_cast<std::size_t>(wc.seq_len + h)];
                    const auto lab = exceeds(fut);
                    smp.y.insert(smp.y.end(), lab.begin(), lab.end());
                }
                smp.x.resize(static_cast<std::size_t>(wc.seq_len) *
                             kFeatureCount);
                for (int r = 0; r < wc.seq_len; ++r) {
                    const auto z = normalize(
                        smp.rows[static_cast<std::size_t>(r)].features(),
                        calib.norm);
                    std::copy(z.begin(), z.end(),
                              smp.x.begin() +
                                  static_cast<std::ptrdiff_t>(r) *
                                      kFeatureCount);
                }
                samples.push_back(std::move(smp));
            }
        }
        run_start = i;
    }
    return samples;
}

std::vector<SequenceSample> balance_samples(std::vector<SequenceSample> samples,
                                            const CalibrationMap& calibs,
                                            std::uint64_t seed) {
    std::vector<SequenceSample> kept;
    std::vector<SequenceSample> candidates;
    for (auto& s : samples) {
        const auto it = calibs.find(s.segment_id);
        if (it == calibs.end())
            throw DataError("no calibration for segment '" + s.segment_id +
                            "'");
        const bool in_extended =
            it->second.extended.count(s.anchor_date.month()) > 0;
        if (in_extended)
            kept.push_back(std::move(s));
        else if (!s.has_positive())
            candidates.push_back(std::move(s));
        // Positive samples anchored outside the extended season are dropped.
    }
    std::size_t positives = 0;
    for (const auto& s : kept)
        if (s.has_positive()) ++positives;
    const std::size_t zeros_kept = kept.size() - positives;
    const std::size_t want =
        positives > zeros_kept ? positives - zeros_kept : 0;
    const std::size_t take = std::min(want, candidates.size());

    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(mix_seed(seed, 0xBA1A));
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(take);
    std::sort(order.begin(), order.end());  // keep chronological order
    for (std::size_t idx : order) kept.push_back(std::move(candidates[idx]));
    return kept;
}

namespace {

int uniform_step(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace

void augment_bins(DailyRecord& rec, const SegmentCalibration& calib,
                  std::mt19937_64& rng) {
    const bool peak = calib.peak_months.count(rec.date.month()) > 0;
    for (int i = 0; i < kClassCount; ++i) {
        double& c = rec.bins[static_cast<std::size_t>(i)];
        const double tau =
            static_cast<double>(calib.thresholds[static_cast<std::size_t>(i)]);
        if (c < 3.0) continue;  // tiny counts are left alone everywhere
        int delta = 0;
        if (peak) {
            if (c == tau) continue;  // exact threshold stays put
            if (c > tau + 10.0)
                delta = uniform_step(rng, -8, 8);
            else
                delta = uniform_step(rng, -3, 3);  // near or below threshold
        } else {
            if (c > tau + 3.0)
                delta = uniform_step(rng, -3, 3);
            else
                delta = uniform_step(rng, 0, 2);  // 3 <= c <= tau+3
        }
        c = std::max(0.0, c + static_cast<double>(delta));
    }
}

void augment_temperature(DailyRecord& rec, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> shift(-0.1, 0.16);
    for (int block = 0; block < 2; ++block) {
        const std::size_t base = block == 0 ? 0 : 5;
        const double mn = rec.temp[base + 0];
        const double mx = rec.temp[base + 1];
        const double mean = rec.temp[base + 2];
        const double sd = rec.temp[base + 3];
        const double range = rec.temp[base + 4];
        for (int attempt = 0; attempt < 10; ++attempt) {
            const double dmin = shift(rng);
            const double dmax = shift(rng);
            const double nmn = mn + dmin;
            const double nmx = mx + dmax;
            const double nmean = mean + (dmin + dmax) / 2.0;
            if (!(nmn <= nmean && nmean <= nmx)) continue;
            const double nrange = nmx - nmn;
            rec.temp[base + 0] = nmn;
            rec.temp[base + 1] = nmx;
            rec.temp[base + 2] = nmean;
            // A flat block has no spread to rescale.
            rec.temp[base + 3] = range > 0.0 ? sd * (nrange / range) : sd;
            rec.temp[base + 4] = nrange;
            break;
        }
    }
}

void renormalize(SequenceSample& sample, const SegmentCalibration& calib) {
    if (sample.rows.empty())
        throw std::invalid_argument(
            "cannot renormalize a sample without raw rows");
    sample.x.resize(sample.rows.size() * kFeatureCount);
    for (std::size_t r = 0; r < sample.rows.size(); ++r) {
        const auto z = normalize(sample.rows[r].features(), calib.norm);
        std::copy(z.begin(), z.end(),
                  sample.x.begin() + static_cast<std::ptrdiff_t>(
                                         r * kFeatureCount));
    }
}

std::vector<SequenceSample> augment_pass(std::vector<SequenceSample> samples,
                                         Split split,
                                         const CalibrationMap& calibs,
                                         std::uint64_t seed) {
    if (split != Split::Train)
        throw ConfigError("augmentation is restricted to the training split");
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 pick(mix_seed(seed, 0xA06));
    std::shuffle(order.begin(), order.end(), pick);
    order.resize(samples.size() / 2);

    for (std::size_t idx : order) {
        SequenceSample& s = samples[idx];
        const auto it = calibs.find(s.segment_id);
        if (it == calibs.end())
            throw DataError("no calibration for segment '" + s.segment_id +
                            "'");
        // Stream keyed by the sample's position so reruns redo the exact
        // same draws regardless of selection order.
        std::mt19937_64 rng = seeded_rng(seed, idx);
        for (DailyRecord& row : s.rows) {
            augment_bins(row, it->second, rng);
            augment_temperature(row, rng);
        }
        renormalize(s, it->second);
        s.augmented = true;
    }
    return samples;
}

namespace {

constexpr char kMagic[8] = {'C', 'Y', 'A', 'N', 'O', 'D', 'S', '1'};

template <typename T>
void put(std::string& out, const T& v) {
    const char* p = reinterpret_cast<const char*>(&v);
    out.append(p, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& off, const std::string& origin) {
    if (off + sizeof(T) > in.size())
        throw DataError(origin + ": truncated dataset file");
    T v;
    std::memcpy(&v, in.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

}  // namespace

void save_samples(const std::vector<SequenceSample>& samples,
                  const WindowConfig& wc, const std::filesystem::path& path) {
    wc.validate();
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, 1);  // container version
    put<std::uint32_t>(out, static_cast<std::uint32_t>(wc.seq_len));
    put<std::uint32_t>(out, kFeatureCount);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(wc.horizon));
    put<std::uint32_t>(out, kClassCount);
    put<std::uint64_t>(out, samples.size());
    for (const SequenceSample& s : samples) {
        const std::size_t nx =
            static_cast<std::size_t>(wc.seq_len) * kFeatureCount;
        const std::size_t ny =
            static_cast<std::size_t>(wc.horizon) * kClassCount;
        if (s.x.size() != nx || s.y.size() != ny)
            throw DataError("sample shape does not match the container header");
        for (double v : s.x) put(out, v);
        out.append(reinterpret_cast<const char*>(s.y.data()), ny);
        out.append(reinterpret_cast<const char*>(s.anchor_labels.data()),
                   kClassCount);
        put<std::int64_t>(out, s.anchor_date.serial());
        put<std::uint16_t>(out, static_cast<std::uint16_t>(
                                    s.segment_id.size()));
        out.append(s.segment_id);
        put<std::uint8_t>(out, s.augmented ? 1 : 0);
    }
    atomic_write_file(path, out);
}

std::vector<SequenceSample> load_samples(const std::filesystem::path& path,
                                         WindowConfig* wc_out) {
    const std::string in = read_file(path);
    const std::string origin = path.string();
    std::size_t off = 0;
    if (in.size() < sizeof(kMagic) ||
        std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0)
        throw DataError(origin + ": not a dataset file");
    off = sizeof(kMagic);
    if (take<std::uint32_t>(in, off, origin) != 1)
        throw DataError(origin + ": unsupported dataset version");
    WindowConfig wc;
    wc.seq_len = static_cast<int>(take<std::uint32_t>(in, off, origin));
    const auto features = take<std::uint32_t>(in, off, origin);
    wc.horizon = static_cast<int>(take<std::uint32_t>(in, off, origin));
    const auto classes = take<std::uint32_t>(in, off, origin);
    if (features != kFeatureCount || classes != kClassCount)
        throw DataError(origin + ": dataset was built with a different "
                                 "feature layout");
    wc.validate();
    const auto count = take<std::uint64_t>(in, off, origin);

    std::vector<SequenceSample> samples;
    samples.reserve(count);
    const std::size_t nx = static_cast<std::size_t>(wc.seq_len) *
                           kFeatureCount;
    const std::size_t ny = static_cast<std::size_t>(wc.horizon) *
                           kClassCount;
    for (std::uint64_t i = 0; i < count; ++i) {
        SequenceSample s;
        s.x.resize(nx);
        for (double& v : s.x) v = take<double>(in, off, origin);
        s.y.resize(ny);
        for (auto& v : s.y) v = take<std::uint8_t>(in, off, origin);
        for (auto& v : s.anchor_labels)
            v = take<std::uint8_t>(in, off, origin);
        s.anchor_date =
            Date::from_serial(take<std::int64_t>(in, off, origin));
        const auto len = take<std::uint16_t>(in, off, origin);
        if (off + len > in.size())
            throw DataError(origin + ": truncated dataset file");
        s.segment_id.assign(in.data() + off, len);
        off += len;
        s.augmented = take<std::uint8_t>(in, off, origin) != 0;
        samples.push_back(std::move(s));
    }
    if (off != in.size())
        throw DataError(origin + ": trailing bytes after the last sample");
    if (wc_out) *wc_out = wc;
    return samples;
}

}  // namespace cyano
