#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cyanocast/dataset.hpp"
#include "cyanocast/eval.hpp"
#include "cyanocast/model.hpp"

namespace cyano {

struct DayReportRow {
    int day = 0;  // 1-based forecast day
    BasicMetrics micro;
    WeightedMetrics weighted;
    std::optional<double> auc;
    BasicMetrics persistence_micro;
    WeightedMetrics persistence_weighted;
};

struct ClassReportRow {
    int cls = 0;  // 1-based intensity class
    std::size_t support = 0;
    BasicMetrics micro;
    std::optional<double> auc;
    BasicMetrics persistence_micro;
};

struct PodPoint {
    Date anchor;
    bool event_day = false;
    double model = 0;
    double persistence = 0;
};

struct EvalReport {
    std::vector<DayReportRow> per_day;
    std::vector<ClassReportRow> per_class;
    std::map<std::string, std::vector<PodPoint>> pod_series;
    BasicMetrics overall_micro;
    WeightedMetrics overall_weighted;
    BasicMetrics persistence_overall_micro;
    std::size_t sample_count = 0;
    int horizon = 0;
};

// Scores every sample's flat horizon x classes probability vector against
// its labels, with the anchor-day persistence forecast as the baseline.
EvalReport evaluate_probs(const std::vector<SequenceSample>& samples,
                          const std::vector<std::vector<double>>& probs);

EvalReport evaluate_model(const Model& model,
                          const std::vector<SequenceSample>& samples);

// Writes per_day.csv, per_class.csv, pod_<segment>.csv, f1_horizon.svg, and
// summary.json into the directory (created if needed).
void write_report(const std::filesystem::path& dir, const EvalReport& report);

// Model and persistence F1 by forecast day with the short, medium, and long
// range bands shaded.
std::string horizon_chart_svg(const EvalReport& report);

std::string report_summary_json(const EvalReport& report);

}  // namespace cyano
