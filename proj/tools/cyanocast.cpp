#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cyanocast/errors.hpp"
#include "cyanocast/pipeline.hpp"
#include "cyanocast/run_config.hpp"

namespace {

cyano::RunConfig require_config(const std::string& path) {
    if (path.empty())
        throw cyano::ConfigError("this subcommand needs --config <file>");
    return cyano::load_run_config(path);
}

cyano::Split parse_split(const std::string& name) {
    if (name == "train") return cyano::Split::Train;
    if (name == "val") return cyano::Split::Val;
    if (name == "test") return cyano::Split::Test;
    throw cyano::ConfigError("--split must be train, val, or test");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CyanoHAB intensity forecasting pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path,
                   "Run configuration JSON (applies to every subcommand)");

    auto* sc_config =
        app.add_subcommand("config", "Show the effective configuration");
    bool dump = false;
    sc_config->add_flag("--dump", dump,
                        "Print the full configuration as JSON");

    auto* sc_synth = app.add_subcommand(
        "synth", "Generate synthetic rasters for every configured segment");

    auto* sc_impute = app.add_subcommand(
        "impute", "Fill raster gaps (config-wide, or one directory with "
                  "--in/--out)");
    std::string impute_in, impute_out, impute_variable = "ci";
    bool impute_restore = false;
    sc_impute->add_option("--in", impute_in, "Input series directory");
    sc_impute->add_option("--out", impute_out, "Output series directory");
    sc_impute->add_option("--variable", impute_variable,
                          "Series variable: ci, temp_day, or temp_night");
    sc_impute->add_flag("--restore", impute_restore,
                        "Apply bloom-continuity restoration");

    auto* sc_calibrate = app.add_subcommand(
        "calibrate",
        "Fit bins, thresholds, and normalization; emit daily records");

    auto* sc_dataset = app.add_subcommand(
        "dataset", "Build windowed samples and write the split files");
    std::string ds_records, ds_calib, ds_split, ds_out;
    std::uint64_t ds_seed = 0;
    bool ds_seed_set = false, ds_augment = false, ds_no_augment = false;
    sc_dataset->add_option("--records", ds_records,
                           "Override the records CSV path");
    sc_dataset->add_option("--calib", ds_calib,
                           "Restrict to one calibration file's segment");
    sc_dataset->add_option("--split", ds_split,
                           "Write only this split: train, val, or test");
    sc_dataset->add_option("--out", ds_out,
                           "Target file when --split is given");
    sc_dataset
        ->add_option("--seed", ds_seed, "Override the run seed")
        ->each([&](const std::string&) { ds_seed_set = true; });
    sc_dataset->add_flag("--augment", ds_augment,
                         "Force training-split augmentation on");
    sc_dataset->add_flag("--no-augment", ds_no_augment,
                         "Force training-split augmentation off");

    auto* sc_train = app.add_subcommand(
        "train", "Train the forecaster and save the best checkpoint");
    std::string tr_dataset, tr_val, tr_out, tr_history;
    sc_train->add_option("--dataset", tr_dataset,
                         "Training samples file (default from config)");
    sc_train->add_option("--val", tr_val,
                         "Validation samples file (default from config)");
    sc_train->add_option("--out", tr_out, "Checkpoint path override");
    sc_train->add_option("--history", tr_history,
                         "Training history CSV override");

    auto* sc_eval = app.add_subcommand(
        "eval", "Score a checkpoint against a dataset and write the report");
    std::string ev_model, ev_dataset, ev_out;
    sc_eval->add_option("--model", ev_model, "Checkpoint path");
    sc_eval->add_option("--dataset", ev_dataset, "Samples file to score");
    sc_eval->add_option("--out", ev_out, "Report directory");

    auto* sc_forecast = app.add_subcommand(
        "forecast", "Print the class forecast for one segment");
    std::string fc_segment, fc_date;
    sc_forecast->add_option("--segment", fc_segment,
                            "Segment id (default: first in config)");
    sc_forecast->add_option("--date", fc_date,
                            "Anchor date YYYY-MM-DD (default: latest)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sc_config->parsed()) {
            const cyano::RunConfig cfg =
                config_path.empty() ? cyano::default_run_config()
                                    : cyano::load_run_config(config_path);
            if (dump) {
                std::cout << cyano::dump_run_config(cfg);
            } else {
                std::cout << "{\"stage\":\"config\",\"segments\":"
                          << cfg.segments.size()
                          << ",\"seed\":" << cfg.seed << "}\n";
            }
        } else if (sc_synth->parsed()) {
            std::cout << cyano::run_synth(require_config(config_path));
        } else if (sc_impute->parsed()) {
            if (!impute_in.empty() || !impute_out.empty()) {
                if (impute_in.empty() || impute_out.empty())
                    throw cyano::ConfigError(
                        "impute needs both --in and --out");
                if (impute_variable != "ci" &&
                    impute_variable != "temp_day" &&
                    impute_variable != "temp_night")
                    throw cyano::ConfigError(
                        "--variable must be ci, temp_day, or temp_night");
                cyano::ImputeConfig icfg;
                if (!config_path.empty())
                    icfg = cyano::load_run_config(config_path).impute;
                std::cout << cyano::impute_directory(impute_in, impute_out,
                                                     icfg, impute_restore);
            } else {
                std::cout << cyano::run_impute(require_config(config_path));
            }
        } else if (sc_calibrate->parsed()) {
            std::cout << cyano::run_calibrate(require_config(config_path));
        } else if (sc_dataset->parsed()) {
            cyano::RunConfig cfg = require_config(config_path);
            if (!ds_records.empty()) cfg.paths.records_csv = ds_records;
            if (ds_seed_set) {
                cfg.seed = ds_seed;
                cfg.train.seed = ds_seed;
            }
            if (ds_augment && ds_no_augment)
                throw cyano::ConfigError(
                    "--augment and --no-augment conflict");
            if (ds_augment) cfg.augment = true;
            if (ds_no_augment) cfg.augment = false;
            cyano::DatasetOptions opts;
            if (!ds_split.empty()) opts.only = parse_split(ds_split);
            if (!ds_out.empty()) {
                if (!opts.only)
                    throw cyano::ConfigError(
                        "dataset --out needs --split as well");
                opts.out_override = ds_out;
            }
            opts.calib_file = ds_calib;
            std::cout << cyano::run_dataset(cfg, opts);
        } else if (sc_train->parsed()) {
            cyano::TrainOptions opts;
            opts.train_file = tr_dataset;
            opts.val_file = tr_val;
            opts.checkpoint = tr_out;
            opts.history_csv = tr_history;
            std::cout << cyano::run_train(require_config(config_path), opts);
        } else if (sc_eval->parsed()) {
            if (!ev_model.empty() || !ev_dataset.empty() ||
                !ev_out.empty()) {
                if (ev_model.empty() || ev_dataset.empty() ||
                    ev_out.empty())
                    throw cyano::ConfigError(
                        "eval needs --model, --dataset, and --out together");
                std::cout << cyano::evaluate_files(ev_model, ev_dataset,
                                                   ev_out);
            } else {
                std::cout << cyano::run_eval(require_config(config_path));
            }
        } else if (sc_forecast->parsed()) {
            const cyano::RunConfig cfg = require_config(config_path);
            const std::string segment =
                fc_segment.empty() ? cfg.segments.front().id : fc_segment;
            std::cout << cyano::run_forecast(cfg, segment, fc_date);
        }
        return 0;
    } catch (const cyano::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const cyano::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const cyano::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
