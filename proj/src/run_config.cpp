#include "cyanocast/run_config.hpp"

#include <initializer_list>
#include <string>

#include "json.hpp"

#include "cyanocast/errors.hpp"
#include "cyanocast/text_io.hpp"

namespace cyano {

namespace {

using nlohmann::json;

// Unknown keys are config errors so typos cannot silently fall back to
// defaults.
void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("config: unknown key \"" + key + "\" in " +
                              where);
    }
}

template <typename T>
T fetch(const json& j, const char* key, const T& fallback,
        const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: bad value for \"" + std::string(key) +
                          "\" in " + where);
    }
}

std::set<int> fetch_month_set(const json& j, const char* key,
                              const std::set<int>& fallback,
                              const std::string& where) {
    if (!j.contains(key)) return fallback;
    const auto list = fetch<std::vector<int>>(j, key, {}, where);
    return {list.begin(), list.end()};
}

SynthProfile parse_synth(const json& j, const std::string& where) {
    check_keys(j, where,
               {"start_year", "end_year", "grid_width", "grid_height",
                "p_enter_active", "p_stay_active", "active_pixels",
                "count_jitter", "ci_pixel_missing", "ci_day_missing",
                "temp_pixel_missing", "temp_day_missing",
                "shallow_fraction"});
    SynthProfile p;
    p.start_year = fetch(j, "start_year", p.start_year, where);
    p.end_year = fetch(j, "end_year", p.end_year, where);
    p.grid_width = fetch(j, "grid_width", p.grid_width, where);
    p.grid_height = fetch(j, "grid_height", p.grid_height, where);
    p.p_enter_active = fetch(j, "p_enter_active", p.p_enter_active, where);
    p.p_stay_active = fetch(j, "p_stay_active", p.p_stay_active, where);
    p.active_pixels = fetch(j, "active_pixels", p.active_pixels, where);
    p.count_jitter = fetch(j, "count_jitter", p.count_jitter, where);
    p.ci_pixel_missing =
        fetch(j, "ci_pixel_missing", p.ci_pixel_missing, where);
    p.ci_day_missing = fetch(j, "ci_day_missing", p.ci_day_missing, where);
    p.temp_pixel_missing =
        fetch(j, "temp_pixel_missing", p.temp_pixel_missing, where);
    p.temp_day_missing =
        fetch(j, "temp_day_missing", p.temp_day_missing, where);
    p.shallow_fraction =
        fetch(j, "shallow_fraction", p.shallow_fraction, where);
    return p;
}

}  // namespace

void RunConfig::validate() const {
    if (segments.empty())
        throw ConfigError("config: at least one segment is required");
    std::set<std::string> ids;
    for (const auto& seg : segments) {
        if (seg.id.empty())
            throw ConfigError("config: segment id must not be empty");
        if (!ids.insert(seg.id).second)
            throw ConfigError("config: duplicate segment id " + seg.id);
        for (int m : seg.peak_months)
            if (m < 1 || m > 12)
                throw ConfigError("config: peak month out of range in " +
                                  seg.id);
    }
    split.validate();
    impute.validate();
    if (!(min_depth >= 0.0))
        throw ConfigError("config: min_depth must be non-negative");
    window.validate();
    model.validate();
    if (model.seq_len != window.seq_len || model.horizon != window.horizon)
        throw ConfigError("config: model window does not match the dataset "
                          "window");
    if (model.features != kFeatureCount)
        throw ConfigError("config: model feature width is fixed by the "
                          "record layout");
    train.validate();
}

RunConfig default_run_config() {
    RunConfig cfg;
    SegmentConfig seg;
    seg.id = "example_segment";
    seg.synth.segment_id = seg.id;
    cfg.segments.push_back(seg);
    cfg.split.train_years = {2016, 2017, 2018, 2019, 2020, 2021};
    cfg.split.val_years = {2022, 2023};
    cfg.split.test_years = {2024};
    cfg.model.seq_len = cfg.window.seq_len;
    cfg.model.horizon = cfg.window.horizon;
    cfg.model.features = kFeatureCount;
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("config: " + path + " is not valid JSON (" +
                          e.what() + ")");
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    check_keys(j, "the top level",
               {"seed", "paths", "segments", "split", "impute", "restore",
                "min_depth", "window", "balance", "augment", "model",
                "train"});
    if (!j.contains("seed"))
        throw ConfigError("config: seed is mandatory");

    RunConfig cfg = default_run_config();
    cfg.segments.clear();
    cfg.seed = fetch<std::uint64_t>(j, "seed", 0, "the top level");

    if (j.contains("paths")) {
        const json& p = j.at("paths");
        check_keys(p, "paths",
                   {"raw_dir", "imputed_dir", "calib_dir", "records_csv",
                    "dataset_dir", "checkpoint", "history_csv",
                    "report_dir"});
        cfg.paths.raw_dir = fetch(p, "raw_dir", cfg.paths.raw_dir, "paths");
        cfg.paths.imputed_dir =
            fetch(p, "imputed_dir", cfg.paths.imputed_dir, "paths");
        cfg.paths.calib_dir =
            fetch(p, "calib_dir", cfg.paths.calib_dir, "paths");
        cfg.paths.records_csv =
            fetch(p, "records_csv", cfg.paths.records_csv, "paths");
        cfg.paths.dataset_dir =
            fetch(p, "dataset_dir", cfg.paths.dataset_dir, "paths");
        cfg.paths.checkpoint =
            fetch(p, "checkpoint", cfg.paths.checkpoint, "paths");
        cfg.paths.history_csv =
            fetch(p, "history_csv", cfg.paths.history_csv, "paths");
        cfg.paths.report_dir =
            fetch(p, "report_dir", cfg.paths.report_dir, "paths");
    }

    if (!j.contains("segments") || !j.at("segments").is_array() ||
        j.at("segments").empty())
        throw ConfigError("config: segments must be a non-empty array");
    for (const json& s : j.at("segments")) {
        const std::string where =
            "segment " + fetch<std::string>(s, "id", "?", "segments");
        check_keys(s, where, {"id", "peak_months", "synth"});
        SegmentConfig seg;
        seg.id = fetch<std::string>(s, "id", "", where);
        if (seg.id.empty())
            throw ConfigError("config: every segment needs an id");
        seg.peak_months =
            fetch_month_set(s, "peak_months", seg.peak_months, where);
        if (s.contains("synth"))
            seg.synth = parse_synth(s.at("synth"), where + ".synth");
        seg.synth.segment_id = seg.id;
        seg.synth.peak_months = seg.peak_months;
        cfg.segments.push_back(seg);
    }

    if (j.contains("split")) {
        const json& s = j.at("split");
        check_keys(s, "split", {"train_years", "val_years", "test_years"});
        cfg.split.train_years = fetch<std::vector<int>>(
            s, "train_years", cfg.split.train_years, "split");
        cfg.split.val_years = fetch<std::vector<int>>(
            s, "val_years", cfg.split.val_years, "split");
        cfg.split.test_years = fetch<std::vector<int>>(
            s, "test_years", cfg.split.test_years, "split");
    }

    if (j.contains("impute")) {
        const json& s = j.at("impute");
        check_keys(s, "impute",
                   {"window_weights", "min_valid_in_window",
                    "max_consecutive_imputed", "restore_gap_min",
                    "restore_gap_max"});
        const auto weights = fetch<std::vector<double>>(
            s, "window_weights",
            {cfg.impute.window_weights.begin(),
             cfg.impute.window_weights.end()},
            "impute");
        if (weights.size() != cfg.impute.window_weights.size())
            throw ConfigError("config: window_weights needs 3 entries");
        std::copy(weights.begin(), weights.end(),
                  cfg.impute.window_weights.begin());
        cfg.impute.min_valid_in_window =
            fetch(s, "min_valid_in_window", cfg.impute.min_valid_in_window,
                  "impute");
        cfg.impute.max_consecutive_imputed =
            fetch(s, "max_consecutive_imputed",
                  cfg.impute.max_consecutive_imputed, "impute");
        cfg.impute.restore_gap_min =
            fetch(s, "restore_gap_min", cfg.impute.restore_gap_min,
                  "impute");
        cfg.impute.restore_gap_max =
            fetch(s, "restore_gap_max", cfg.impute.restore_gap_max,
                  "impute");
    }

    cfg.restore = fetch(j, "restore", cfg.restore, "the top level");
    cfg.min_depth = fetch(j, "min_depth", cfg.min_depth, "the top level");

    if (j.contains("window")) {
        const json& s = j.at("window");
        check_keys(s, "window", {"seq_len", "horizon"});
        cfg.window.seq_len = fetch(s, "seq_len", cfg.window.seq_len, "window");
        cfg.window.horizon = fetch(s, "horizon", cfg.window.horizon, "window");
    }

    cfg.balance = fetch(j, "balance", cfg.balance, "the top level");
    cfg.augment = fetch(j, "augment", cfg.augment, "the top level");

    if (j.contains("model")) {
        const json& s = j.at("model");
        check_keys(s, "model",
                   {"d_model", "heads", "snb_hidden", "lstm_hidden",
                    "dropout", "leaky_slope"});
        cfg.model.d_model = fetch(s, "d_model", cfg.model.d_model, "model");
        cfg.model.heads = fetch(s, "heads", cfg.model.heads, "model");
        const auto snb = fetch<std::vector<int>>(
            s, "snb_hidden",
            {cfg.model.snb_hidden.begin(), cfg.model.snb_hidden.end()},
            "model");
        if (snb.size() != cfg.model.snb_hidden.size())
            throw ConfigError("config: snb_hidden needs 3 entries");
        std::copy(snb.begin(), snb.end(), cfg.model.snb_hidden.begin());
        cfg.model.lstm_hidden =
            fetch(s, "lstm_hidden", cfg.model.lstm_hidden, "model");
        cfg.model.dropout = fetch(s, "dropout", cfg.model.dropout, "model");
        cfg.model.leaky_slope =
            fetch(s, "leaky_slope", cfg.model.leaky_slope, "model");
    }
    cfg.model.seq_len = cfg.window.seq_len;
    cfg.model.horizon = cfg.window.horizon;
    cfg.model.features = kFeatureCount;

    if (j.contains("train")) {
        const json& s = j.at("train");
        check_keys(s, "train",
                   {"lr", "weight_decay", "epochs", "restart_period",
                    "lr_min_ratio", "clip_norm", "label_smoothing",
                    "prob_floor", "batch_size", "patience", "beta1", "beta2",
                    "adam_eps"});
        cfg.train.lr = fetch(s, "lr", cfg.train.lr, "train");
        cfg.train.weight_decay =
            fetch(s, "weight_decay", cfg.train.weight_decay, "train");
        cfg.train.epochs = fetch(s, "epochs", cfg.train.epochs, "train");
        cfg.train.restart_period =
            fetch(s, "restart_period", cfg.train.restart_period, "train");
        cfg.train.lr_min_ratio =
            fetch(s, "lr_min_ratio", cfg.train.lr_min_ratio, "train");
        cfg.train.clip_norm =
            fetch(s, "clip_norm", cfg.train.clip_norm, "train");
        cfg.train.label_smoothing =
            fetch(s, "label_smoothing", cfg.train.label_smoothing, "train");
        cfg.train.prob_floor =
            fetch(s, "prob_floor", cfg.train.prob_floor, "train");
        cfg.train.batch_size =
            fetch(s, "batch_size", cfg.train.batch_size, "train");
        cfg.train.patience = fetch(s, "patience", cfg.train.patience, "train");
        cfg.train.beta1 = fetch(s, "beta1", cfg.train.beta1, "train");
        cfg.train.beta2 = fetch(s, "beta2", cfg.train.beta2, "train");
        cfg.train.adam_eps = fetch(s, "adam_eps", cfg.train.adam_eps, "train");
    }
    cfg.train.seed = cfg.seed;

    cfg.validate();
    return cfg;
}

std::string dump_run_config(const RunConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["paths"] = {{"raw_dir", cfg.paths.raw_dir},
                  {"imputed_dir", cfg.paths.imputed_dir},
                  {"calib_dir", cfg.paths.calib_dir},
                  {"records_csv", cfg.paths.records_csv},
                  {"dataset_dir", cfg.paths.dataset_dir},
                  {"checkpoint", cfg.paths.checkpoint},
                  {"history_csv", cfg.paths.history_csv},
                  {"report_dir", cfg.paths.report_dir}};
    j["segments"] = json::array();
    for (const auto& seg : cfg.segments) {
        json s;
        s["id"] = seg.id;
        s["peak_months"] = seg.peak_months;
        s["synth"] = {{"start_year", seg.synth.start_year},
                      {"end_year", seg.synth.end_year},
                      {"grid_width", seg.synth.grid_width},
                      {"grid_height", seg.synth.grid_height},
                      {"p_enter_active", seg.synth.p_enter_active},
                      {"p_stay_active", seg.synth.p_stay_active},
                      {"active_pixels", seg.synth.active_pixels},
                      {"count_jitter", seg.synth.count_jitter},
                      {"ci_pixel_missing", seg.synth.ci_pixel_missing},
                      {"ci_day_missing", seg.synth.ci_day_missing},
                      {"temp_pixel_missing", seg.synth.temp_pixel_missing},
                      {"temp_day_missing", seg.synth.temp_day_missing},
                      {"shallow_fraction", seg.synth.shallow_fraction}};
        j["segments"].push_back(s);
    }
    j["split"] = {{"train_years", cfg.split.train_years},
                  {"val_years", cfg.split.val_years},
                  {"test_years", cfg.split.test_years}};
    j["impute"] = {
        {"window_weights",
         std::vector<double>(cfg.impute.window_weights.begin(),
                             cfg.impute.window_weights.end())},
        {"min_valid_in_window", cfg.impute.min_valid_in_window},
        {"max_consecutive_imputed", cfg.impute.max_consecutive_imputed},
        {"restore_gap_min", cfg.impute.restore_gap_min},
        {"restore_gap_max", cfg.impute.restore_gap_max}};
    j["restore"] = cfg.restore;
    j["min_depth"] = cfg.min_depth;
    j["window"] = {{"seq_len", cfg.window.seq_len},
                   {"horizon", cfg.window.horizon}};
    j["balance"] = cfg.balance;
    j["augment"] = cfg.augment;
    j["model"] = {{"d_model", cfg.model.d_model},
                  {"heads", cfg.model.heads},
                  {"snb_hidden",
                   std::vector<int>(cfg.model.snb_hidden.begin(),
                                    cfg.model.snb_hidden.end())},
                  {"lstm_hidden", cfg.model.lstm_hidden},
                  {"dropout", cfg.model.dropout},
                  {"leaky_slope", cfg.model.leaky_slope}};
    j["train"] = {{"lr", cfg.train.lr},
                  {"weight_decay", cfg.train.weight_decay},
                  {"epochs", cfg.train.epochs},
                  {"restart_period", cfg.train.restart_period},
                  {"lr_min_ratio", cfg.train.lr_min_ratio},
                  {"clip_norm", cfg.train.clip_norm},
                  {"label_smoothing", cfg.train.label_smoothing},
                  {"prob_floor", cfg.train.prob_floor},
                  {"batch_size", cfg.train.batch_size},
                  {"patience", cfg.train.patience},
                  {"beta1", cfg.train.beta1},
                  {"beta2", cfg.train.beta2},
                  {"adam_eps", cfg.train.adam_eps}};
    return j.dump(2) + "\n";
}

}  // namespace cyano
