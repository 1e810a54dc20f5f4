#pragma once

#include <optional>
#include <string>

#include "cyanocast/run_config.hpp"

namespace cyano {

// One function per CLI stage. Each reads its inputs fresh from the paths in
// the config, writes artifacts atomically, and returns the JSON summary the
// CLI prints on stdout.
std::string run_synth(const RunConfig& cfg);
std::string run_impute(const RunConfig& cfg);
std::string run_calibrate(const RunConfig& cfg);

struct DatasetOptions {
    std::optional<Split> only;  // write just this split
    std::string out_override;   // target file when `only` is set
    std::string calib_file;     // restrict to this calibration's segment
};
std::string run_dataset(const RunConfig& cfg, const DatasetOptions& opts = {});

struct TrainOptions {
    std::string train_file;   // default <dataset_dir>/train.bin
    std::string val_file;     // default <dataset_dir>/val.bin
    std::string checkpoint;   // default paths.checkpoint
    std::string history_csv;  // default paths.history_csv
};
std::string run_train(const RunConfig& cfg, const TrainOptions& opts = {});

std::string run_eval(const RunConfig& cfg);

// Directory-to-directory imputation used by `impute --in/--out`.
std::string impute_directory(const std::string& in_dir,
                             const std::string& out_dir,
                             const ImputeConfig& icfg, bool restore);

// Checkpoint + dataset file form used by `eval --model/--dataset/--out`.
std::string evaluate_files(const std::string& checkpoint_path,
                           const std::string& dataset_path,
                           const std::string& report_dir);

// Prints one line of 0/1 labels per forecast day followed by the JSON
// summary. An empty date picks the most recent record of the segment.
std::string run_forecast(const RunConfig& cfg, const std::string& segment_id,
                         const std::string& date_text);

}  // namespace cyano
