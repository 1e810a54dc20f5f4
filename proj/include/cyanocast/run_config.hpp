#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "cyanocast/dataset.hpp"
#include "cyanocast/impute.hpp"
#include "cyanocast/model.hpp"
#include "cyanocast/synth.hpp"
#include "cyanocast/train.hpp"

namespace cyano {

struct PathsConfig {
    std::string raw_dir = "runs/out/raw";
    std::string imputed_dir = "runs/out/imputed";
    std::string calib_dir = "runs/out/calib";
    std::string records_csv = "runs/out/records.csv";
    std::string dataset_dir = "runs/out/datasets";
    std::string checkpoint = "runs/out/model.ckpt";
    std::string history_csv = "runs/out/history.csv";
    std::string report_dir = "runs/out/report";
};

struct SegmentConfig {
    std::string id;
    std::set<int> peak_months{6, 7, 8, 9};
    SynthProfile synth;  // id and peak months mirror the segment's
};

// One config file drives every stage; the seed is mandatory and every other
// field carries an overridable default.
struct RunConfig {
    std::uint64_t seed = 1;
    PathsConfig paths;
    std::vector<SegmentConfig> segments;
    SplitSpec split;
    ImputeConfig impute;
    bool restore = true;    // continuity restoration on the intensity series
    double min_depth = 3.0;  // shallow cutoff in meters, strict <
    WindowConfig window;
    bool balance = true;
    bool augment = true;
    ModelConfig model;  // seq_len / features / horizon follow `window`
    TrainConfig train;

    void validate() const;
};

RunConfig default_run_config();
RunConfig load_run_config(const std::string& path);
std::string dump_run_config(const RunConfig& cfg);

}  // namespace cyano
