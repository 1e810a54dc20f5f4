#include "cyanocast/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <map>

#include "json.hpp"

#include "cyanocast/checkpoint.hpp"
#include "cyanocast/errors.hpp"
#include "cyanocast/report.hpp"
#include "cyanocast/rng.hpp"
#include "cyanocast/text_io.hpp"

namespace cyano {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVariables[] = {"ci", "temp_day", "temp_night"};

json stage_log_json(const std::string& segment, const std::string& variable,
                    const std::vector<StageLog>& log) {
    json rows = json::array();
    for (const auto& s : log) {
        rows.push_back({{"segment", segment},
                        {"variable", variable},
                        {"stage", s.stage},
                        {"missing_before", s.missing_before},
                        {"missing_after", s.missing_after}});
    }
    return rows;
}

// The record stream for one segment, assembled from the imputed rasters.
std::vector<DailyRecord> assemble_segment_records(
    const RunConfig& cfg, const std::string& segment_id,
    const std::array<double, 4>& edges) {
    const fs::path base = fs::path(cfg.paths.imputed_dir) / segment_id;
    const RasterSeries ci = load_series(base / "ci");
    const RasterSeries day = load_series(base / "temp_day");
    const RasterSeries night = load_series(base / "temp_night");
    if (ci.days() == 0)
        throw DataError("calibrate: no intensity rasters for " + segment_id);

    const Grid empty_temp =
        day.days() ? Grid::all_missing(day.grids[0].width,
                                       day.grids[0].height)
                   : Grid::all_missing(ci.grids[0].width,
                                       ci.grids[0].height);
    RecordAssembler assembler(edges);
    std::vector<DailyRecord> records;
    records.reserve(ci.days());
    for (std::size_t i = 0; i < ci.days(); ++i) {
        const Date date = ci.dates[i];
        const auto d = day.index_of(date);
        const auto n = night.index_of(date);
        records.push_back(assembler.assemble(
            segment_id, date, ci.grids[i],
            d ? day.grids[*d] : empty_temp,
            n ? night.grids[*n] : empty_temp));
    }
    return records;
}

SegmentCalibration load_segment_calibration(const RunConfig& cfg,
                                            const std::string& segment_id) {
    return load_calibration(fs::path(cfg.paths.calib_dir) /
                            (segment_id + ".calib"));
}

bool in_years(Date date, const std::vector<int>& years) {
    return std::find(years.begin(), years.end(), date.year()) != years.end();
}

std::size_t count_positive(const std::vector<SequenceSample>& samples) {
    std::size_t n = 0;
    for (const auto& s : samples) n += s.has_positive() ? 1 : 0;
    return n;
}

json split_summary(const std::vector<SequenceSample>& samples) {
    std::size_t augmented = 0;
    for (const auto& s : samples) augmented += s.augmented ? 1 : 0;
    return {{"samples", samples.size()},
            {"positive", count_positive(samples)},
            {"augmented", augmented}};
}

}  // namespace

std::string run_synth(const RunConfig& cfg) {
    json segments = json::array();
    for (std::size_t i = 0; i < cfg.segments.size(); ++i) {
        const SegmentConfig& seg = cfg.segments[i];
        SynthProfile profile = seg.synth;
        profile.segment_id = seg.id;
        profile.peak_months = seg.peak_months;
        const SynthData data =
            synth_rasters(profile, mix_seed(cfg.seed, 1000 + i));
        const fs::path base = fs::path(cfg.paths.raw_dir) / seg.id;
        save_series(data.ci, base / "ci");
        save_series(data.temp_day, base / "temp_day");
        save_series(data.temp_night, base / "temp_night");
        save_bathymetry(data.bathymetry, base / "bathy.grd");
        segments.push_back({{"id", seg.id},
                            {"days", data.ci.days()},
                            {"ci_missing", missing_fraction(data.ci)}});
    }
    json out{{"stage", "synth"}, {"segments", segments}};
    return out.dump() + "\n";
}

std::string run_impute(const RunConfig& cfg) {
    json segments = json::array();
    for (const SegmentConfig& seg : cfg.segments) {
        const fs::path in_base = fs::path(cfg.paths.raw_dir) / seg.id;
        const fs::path out_base = fs::path(cfg.paths.imputed_dir) / seg.id;
        json variables = json::array();
        std::string log_lines;
        for (const char* variable : kVariables) {
            RasterSeries series = load_series(in_base / variable);
            const bool is_ci = std::string(variable) == "ci";
            if (is_ci) {
                const BathymetryGrid bathy =
                    load_bathymetry(in_base / "bathy.grd");
                series = apply_depth_mask(series, bathy, cfg.min_depth);
            }
            std::vector<StageLog> log;
            const RasterSeries imputed = impute_pipeline(
                series, cfg.impute, is_ci && cfg.restore, &log);
            save_series(imputed, out_base / variable);
            for (const json& row : stage_log_json(seg.id, variable, log))
                log_lines += row.dump() + "\n";
            variables.push_back(
                {{"variable", variable},
                 {"missing_before", missing_fraction(series)},
                 {"missing_after", missing_fraction(imputed)}});
        }
        atomic_write_file(out_base / "impute_log.jsonl", log_lines);
        segments.push_back({{"id", seg.id}, {"variables", variables}});
    }
    json out{{"stage", "impute"}, {"segments", segments}};
    return out.dump() + "\n";
}

std::string impute_directory(const std::string& in_dir,
                             const std::string& out_dir,
                             const ImputeConfig& icfg, bool restore) {
    const RasterSeries series = load_series(in_dir);
    std::vector<StageLog> log;
    const RasterSeries imputed = impute_pipeline(series, icfg, restore, &log);
    save_series(imputed, out_dir);
    json out{{"stage", "impute"},
             {"in", in_dir},
             {"out", out_dir},
             {"log", stage_log_json("", "", log)}};
    return out.dump() + "\n";
}

std::string run_calibrate(const RunConfig& cfg) {
    std::vector<DailyRecord> all_records;
    json segments = json::array();
    for (const SegmentConfig& seg : cfg.segments) {
        const fs::path base = fs::path(cfg.paths.imputed_dir) / seg.id;
        const RasterSeries ci = load_series(base / "ci");
        if (ci.days() == 0)
            throw DataError("calibrate: no intensity rasters for " + seg.id);

        std::vector<double> train_positives;
        for (std::size_t i = 0; i < ci.days(); ++i) {
            if (!in_years(ci.dates[i], cfg.split.train_years)) continue;
            const Grid& g = ci.grids[i];
            for (std::size_t p = 0; p < g.size(); ++p)
                if (g.provenance[p] != Provenance::Missing &&
                    g.values[p] > 0.0)
                    train_positives.push_back(g.values[p]);
        }
        const std::array<double, 4> edges = fit_bins(train_positives);

        std::vector<std::array<int, 5>> train_counts;
        for (std::size_t i = 0; i < ci.days(); ++i)
            if (in_years(ci.dates[i], cfg.split.train_years))
                train_counts.push_back(bin_counts(ci.grids[i], edges));
        const std::array<int, 5> thresholds =
            calibrate_thresholds(train_counts);

        const std::vector<DailyRecord> records =
            assemble_segment_records(cfg, seg.id, edges);
        std::vector<DailyRecord> train_records;
        for (const DailyRecord& r : records)
            if (in_years(r.date, cfg.split.train_years))
                train_records.push_back(r);
        if (train_records.empty())
            throw DataError("calibrate: no training-year records for " +
                            seg.id);

        SegmentCalibration calib;
        calib.segment_id = seg.id;
        calib.bin_edges = edges;
        calib.thresholds = thresholds;
        calib.peak_months = seg.peak_months;
        calib.extended = extended_months(seg.peak_months);
        calib.norm = fit_normalization(train_records);
        save_calibration(calib, fs::path(cfg.paths.calib_dir) /
                                    (seg.id + ".calib"));

        all_records.insert(all_records.end(), records.begin(),
                           records.end());
        segments.push_back(
            {{"id", seg.id},
             {"records", records.size()},
             {"bin_edges", edges},
             {"thresholds", thresholds}});
    }
    save_records_csv(all_records, cfg.paths.records_csv);
    json out{{"stage", "calibrate"},
             {"records", all_records.size()},
             {"segments", segments}};
    return out.dump() + "\n";
}

std::string run_dataset(const RunConfig& cfg, const DatasetOptions& opts) {
    const std::vector<DailyRecord> all_records =
        load_records_csv(cfg.paths.records_csv);

    CalibrationMap calibs;
    std::map<std::string, std::vector<DailyRecord>> by_segment;
    for (const DailyRecord& r : all_records)
        by_segment[r.segment_id].push_back(r);

    std::optional<std::string> only_segment;
    if (!opts.calib_file.empty()) {
        const SegmentCalibration calib = load_calibration(opts.calib_file);
        only_segment = calib.segment_id;
        calibs[calib.segment_id] = calib;
    }

    std::vector<SequenceSample> train, val, test;
    for (const SegmentConfig& seg : cfg.segments) {
        if (only_segment && seg.id != *only_segment) continue;
        const auto it = by_segment.find(seg.id);
        if (it == by_segment.end())
            throw DataError("dataset: no records for segment " + seg.id);
        if (!calibs.count(seg.id))
            calibs[seg.id] = load_segment_calibration(cfg, seg.id);
        for (SequenceSample& s :
             build_samples(it->second, calibs[seg.id], cfg.window)) {
            const auto split = cfg.split.split_of(s.anchor_date.year());
            if (!split) continue;
            switch (*split) {
                case Split::Train: train.push_back(std::move(s)); break;
                case Split::Val: val.push_back(std::move(s)); break;
                case Split::Test: test.push_back(std::move(s)); break;
            }
        }
    }
    if (only_segment && !calibs.count(*only_segment))
        throw ConfigError("dataset: calibration segment " + *only_segment +
                          " is not in the config");

    if (cfg.balance) {
        train = balance_samples(std::move(train), calibs,
                                mix_seed(cfg.seed, 3000));
        val = balance_samples(std::move(val), calibs,
                              mix_seed(cfg.seed, 3002));
    }
    if (cfg.augment)
        train = augment_pass(std::move(train), Split::Train, calibs,
                             mix_seed(cfg.seed, 3001));

    const fs::path dir(cfg.paths.dataset_dir);
    const auto wants = [&](Split s) { return !opts.only || *opts.only == s; };
    const auto target = [&](Split s, const char* name) {
        if (opts.only && *opts.only == s && !opts.out_override.empty())
            return fs::path(opts.out_override);
        return dir / name;
    };
    json out{{"stage", "dataset"}};
    if (wants(Split::Train)) {
        save_samples(train, cfg.window, target(Split::Train, "train.bin"));
        out["train"] = split_summary(train);
    }
    if (wants(Split::Val)) {
        save_samples(val, cfg.window, target(Split::Val, "val.bin"));
        out["val"] = split_summary(val);
    }
    if (wants(Split::Test)) {
        save_samples(test, cfg.window, target(Split::Test, "test.bin"));
        out["test"] = split_summary(test);
    }
    return out.dump() + "\n";
}

std::string run_train(const RunConfig& cfg, const TrainOptions& opts) {
    const fs::path dir(cfg.paths.dataset_dir);
    const fs::path train_path = opts.train_file.empty()
                                    ? dir / "train.bin"
                                    : fs::path(opts.train_file);
    const fs::path val_path =
        opts.val_file.empty() ? dir / "val.bin" : fs::path(opts.val_file);
    WindowConfig wc_train, wc_val;
    const std::vector<SequenceSample> train =
        load_samples(train_path, &wc_train);
    const std::vector<SequenceSample> val = load_samples(val_path, &wc_val);
    if (wc_train.seq_len != cfg.window.seq_len ||
        wc_train.horizon != cfg.window.horizon ||
        wc_val.seq_len != cfg.window.seq_len ||
        wc_val.horizon != cfg.window.horizon)
        throw DataError("train: dataset window does not match the config");

    Model model = Model::init(cfg.model, mix_seed(cfg.seed, 2001));
    TrainConfig tc = cfg.train;
    tc.seed = mix_seed(cfg.seed, 2000);
    const TrainResult result = fit(model, train, val, tc);

    const NormStats norm =
        load_segment_calibration(cfg, cfg.segments.front().id).norm;
    const std::string ckpt_path =
        opts.checkpoint.empty() ? cfg.paths.checkpoint : opts.checkpoint;
    const std::string history_path = opts.history_csv.empty()
                                         ? cfg.paths.history_csv
                                         : opts.history_csv;
    save_checkpoint(ckpt_path, model, norm);
    write_history_csv(history_path, result.history);

    json out{{"stage", "train"},
             {"epochs_run", result.history.size()},
             {"best_epoch", result.best_epoch},
             {"best_val_f1", result.best_val_f1},
             {"parameters", model.parameter_count()},
             {"checkpoint", ckpt_path}};
    return out.dump() + "\n";
}

std::string evaluate_files(const std::string& checkpoint_path,
                           const std::string& dataset_path,
                           const std::string& report_dir) {
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    WindowConfig wc;
    const std::vector<SequenceSample> samples =
        load_samples(dataset_path, &wc);
    if (wc.seq_len != ck.cfg.seq_len || wc.horizon != ck.cfg.horizon)
        throw DataError("eval: dataset window does not match the checkpoint");

    const EvalReport report = evaluate_model(ck.model, samples);
    write_report(report_dir, report);
    return report_summary_json(report);
}

std::string run_eval(const RunConfig& cfg) {
    const fs::path test_path =
        fs::path(cfg.paths.dataset_dir) / "test.bin";
    return evaluate_files(cfg.paths.checkpoint, test_path.string(),
                          cfg.paths.report_dir);
}

std::string run_forecast(const RunConfig& cfg, const std::string& segment_id,
                         const std::string& date_text) {
    bool known = false;
    for (const SegmentConfig& seg : cfg.segments)
        if (seg.id == segment_id) known = true;
    if (!known)
        throw ConfigError("forecast: unknown segment " + segment_id);

    std::vector<DailyRecord> records;
    for (DailyRecord& r : load_records_csv(cfg.paths.records_csv))
        if (r.segment_id == segment_id) records.push_back(std::move(r));
    if (records.empty())
        throw DataError("forecast: no records for segment " + segment_id);
    std::sort(records.begin(), records.end(),
              [](const DailyRecord& a, const DailyRecord& b) {
                  return a.date < b.date;
              });

    const Date anchor = [&] {
        if (date_text.empty()) return records.back().date;
        try {
            return Date::parse(date_text);
        } catch (const std::invalid_argument& e) {
            // User-typed anchor dates are data, not programming errors.
            throw DataError(e.what());
        }
    }();
    std::map<std::int64_t, const DailyRecord*> by_serial;
    for (const DailyRecord& r : records) by_serial[r.date.serial()] = &r;

    const SegmentCalibration calib =
        load_segment_calibration(cfg, segment_id);
    const Checkpoint ck = load_checkpoint(cfg.paths.checkpoint);
    const int L = ck.cfg.seq_len;

    std::vector<double> x;
    x.reserve(static_cast<std::size_t>(L) * kFeatureCount);
    const DailyRecord* anchor_record = nullptr;
    for (int i = L - 1; i >= 0; --i) {
        const Date date = anchor - i;
        const auto it = by_serial.find(date.serial());
        if (it == by_serial.end())
            throw DataError("forecast: no record for " + date.to_string() +
                            " in the input window");
        const auto feats = normalize(it->second->features(), calib.norm);
        x.insert(x.end(), feats.begin(), feats.end());
        if (i == 0) anchor_record = it->second;
    }

    std::mt19937_64 unused(0);
    const auto fwd = model_forward(ck.model, x, false, unused);
    const auto labels = binarize(fwd.probs->value, 0.5);

    std::string out;
    json prob_rows = json::array();
    json label_rows = json::array();
    for (int h = 0; h < ck.cfg.horizon; ++h) {
        json prob_row = json::array();
        json label_row = json::array();
        for (int c = 0; c < ck.cfg.classes; ++c) {
            const std::size_t slot =
                static_cast<std::size_t>(h) * ck.cfg.classes + c;
            if (c) out += ' ';
            out += labels[slot] ? '1' : '0';
            label_row.push_back(static_cast<int>(labels[slot]));
            prob_row.push_back(fwd.probs->value[slot]);
        }
        out += '\n';
        label_rows.push_back(label_row);
        prob_rows.push_back(prob_row);
    }

    json anchor_labels = json::array();
    for (int c = 0; c < kClassCount; ++c) {
        const double count = anchor_record->bins[static_cast<std::size_t>(c)];
        anchor_labels.push_back(
            count >= calib.thresholds[static_cast<std::size_t>(c)] ? 1 : 0);
    }

    json summary{{"stage", "forecast"},
                 {"segment", segment_id},
                 {"anchor", anchor.to_string()},
                 {"anchor_labels", anchor_labels},
                 {"labels", label_rows},
                 {"probabilities", prob_rows}};
    out += summary.dump() + "\n";
    return out;
}

}  // namespace cyano
