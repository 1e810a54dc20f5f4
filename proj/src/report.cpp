#include "cyanocast/report.hpp"

#include <algorithm>

#include "json.hpp"

#include "cyanocast/errors.hpp"
#include "cyanocast/text_io.hpp"
#include "cyanocast/train.hpp"

namespace cyano {

namespace {

// Gathers the slots of one forecast day (or one class) across all samples.
struct Pool {
    std::vector<double> scores;
    std::vector<std::uint8_t> preds;
    std::vector<std::uint8_t> persistence;
    std::vector<std::uint8_t> targets;
};

void pool_push(Pool& pool, double score, std::uint8_t pred,
               std::uint8_t persisted, std::uint8_t target) {
    pool.scores.push_back(score);
    pool.preds.push_back(pred);
    pool.persistence.push_back(persisted);
    pool.targets.push_back(target);
}

std::string csv_optional(const std::optional<double>& v) {
    return v ? fmt_double(*v) : std::string();
}

}  // namespace

EvalReport evaluate_probs(const std::vector<SequenceSample>& samples,
                          const std::vector<std::vector<double>>& probs) {
    if (samples.empty()) throw DataError("evaluate: no samples");
    if (probs.size() != samples.size())
        throw DataError("evaluate: probability set does not match samples");
    const std::size_t slot_count = samples.front().y.size();
    if (slot_count == 0 || slot_count % kClassCount)
        throw DataError("evaluate: label block does not tile the classes");
    const int horizon = static_cast<int>(slot_count / kClassCount);

    // Per-sample binarized predictions and persistence tiles.
    std::vector<std::vector<std::uint8_t>> preds(samples.size());
    std::vector<std::vector<std::uint8_t>> persisted(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].y.size() != slot_count)
            throw DataError("evaluate: inconsistent label block size");
        if (probs[i].size() != slot_count)
            throw DataError("evaluate: probability block size mismatch");
        preds[i] = binarize(probs[i], 0.5);
        persisted[i] =
            persistence_forecast(samples[i].anchor_labels, horizon);
    }

    EvalReport report;
    report.sample_count = samples.size();
    report.horizon = horizon;

    Pool overall;
    std::vector<Pool> by_day(static_cast<std::size_t>(horizon));
    std::vector<Pool> by_class(kClassCount);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t slot = 0; slot < slot_count; ++slot) {
            const std::size_t day = slot / kClassCount;
            const std::size_t cls = slot % kClassCount;
            pool_push(overall, probs[i][slot], preds[i][slot],
                      persisted[i][slot], samples[i].y[slot]);
            pool_push(by_day[day], probs[i][slot], preds[i][slot],
                      persisted[i][slot], samples[i].y[slot]);
            pool_push(by_class[cls], probs[i][slot], preds[i][slot],
                      persisted[i][slot], samples[i].y[slot]);
        }
    }

    report.overall_micro = micro_metrics(overall.preds, overall.targets);
    report.overall_weighted =
        weighted_metrics(overall.preds, overall.targets, kClassCount);
    report.persistence_overall_micro =
        micro_metrics(overall.persistence, overall.targets);

    for (int d = 0; d < horizon; ++d) {
        const Pool& pool = by_day[static_cast<std::size_t>(d)];
        DayReportRow row;
        row.day = d + 1;
        row.micro = micro_metrics(pool.preds, pool.targets);
        row.weighted =
            weighted_metrics(pool.preds, pool.targets, kClassCount);
        row.auc = auc_score(pool.scores, pool.targets);
        row.persistence_micro =
            micro_metrics(pool.persistence, pool.targets);
        row.persistence_weighted =
            weighted_metrics(pool.persistence, pool.targets, kClassCount);
        report.per_day.push_back(row);
    }

    for (int c = 0; c < kClassCount; ++c) {
        const Pool& pool = by_class[static_cast<std::size_t>(c)];
        ClassReportRow row;
        row.cls = c + 1;
        row.support = static_cast<std::size_t>(
            std::count(pool.targets.begin(), pool.targets.end(), 1));
        row.micro = micro_metrics(pool.preds, pool.targets);
        row.auc = auc_score(pool.scores, pool.targets);
        row.persistence_micro =
            micro_metrics(pool.persistence, pool.targets);
        report.per_class.push_back(row);
    }

    // One POD point per anchor date, grouped by segment.
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (samples[a].segment_id != samples[b].segment_id)
            return samples[a].segment_id < samples[b].segment_id;
        return samples[a].anchor_date < samples[b].anchor_date;
    });
    for (std::size_t i : order) {
        PodPoint point;
        point.anchor = samples[i].anchor_date;
        const PodValue m = pod_sample(preds[i], samples[i].y);
        const PodValue p = pod_sample(persisted[i], samples[i].y);
        point.event_day = m.event_day;
        point.model = m.value;
        point.persistence = p.value;
        report.pod_series[samples[i].segment_id].push_back(point);
    }

    return report;
}

EvalReport evaluate_model(const Model& model,
                          const std::vector<SequenceSample>& samples) {
    std::vector<std::vector<double>> probs;
    probs.reserve(samples.size());
    for (const auto& s : samples) probs.push_back(predict_probs(model, s));
    return evaluate_probs(samples, probs);
}

void write_report(const std::filesystem::path& dir,
                  const EvalReport& report) {
    std::filesystem::create_directories(dir);

    std::string per_day =
        "day,accuracy,precision,recall,f1,weighted_precision,"
        "weighted_recall,weighted_f1,auc,persistence_f1,"
        "persistence_weighted_f1,degenerate\n";
    for (const auto& row : report.per_day) {
        per_day += std::to_string(row.day);
        per_day += ',' + fmt_double(row.micro.accuracy);
        per_day += ',' + fmt_double(row.micro.precision);
        per_day += ',' + fmt_double(row.micro.recall);
        per_day += ',' + fmt_double(row.micro.f1);
        per_day += ',' + fmt_double(row.weighted.precision);
        per_day += ',' + fmt_double(row.weighted.recall);
        per_day += ',' + fmt_double(row.weighted.f1);
        per_day += ',' + csv_optional(row.auc);
        per_day += ',' + fmt_double(row.persistence_micro.f1);
        per_day += ',' + fmt_double(row.persistence_weighted.f1);
        per_day += ',';
        per_day += (row.micro.any_degenerate() || row.weighted.degenerate)
                       ? '1'
                       : '0';
        per_day += '\n';
    }
    atomic_write_file(dir / "per_day.csv", per_day);

    std::string per_class =
        "class,support,accuracy,precision,recall,f1,auc,persistence_f1,"
        "degenerate\n";
    for (const auto& row : report.per_class) {
        per_class += std::to_string(row.cls);
        per_class += ',' + std::to_string(row.support);
        per_class += ',' + fmt_double(row.micro.accuracy);
        per_class += ',' + fmt_double(row.micro.precision);
        per_class += ',' + fmt_double(row.micro.recall);
        per_class += ',' + fmt_double(row.micro.f1);
        per_class += ',' + csv_optional(row.auc);
        per_class += ',' + fmt_double(row.persistence_micro.f1);
        per_class += ',';
        per_class += row.micro.any_degenerate() ? '1' : '0';
        per_class += '\n';
    }
    atomic_write_file(dir / "per_class.csv", per_class);

    for (const auto& [segment, points] : report.pod_series) {
        std::string pod = "date,event_day,model_pod,persistence_pod\n";
        for (const auto& p : points) {
            pod += p.anchor.to_string();
            pod += ',';
            pod += p.event_day ? '1' : '0';
            pod += ',' + fmt_double(p.model);
            pod += ',' + fmt_double(p.persistence);
            pod += '\n';
        }
        atomic_write_file(dir / ("pod_" + segment + ".csv"), pod);
    }

    atomic_write_file(dir / "f1_horizon.svg", horizon_chart_svg(report));
    atomic_write_file(dir / "summary.json", report_summary_json(report));
}

std::string horizon_chart_svg(const EvalReport& report) {
    const double x0 = 60, x1 = 700, y0 = 30, y1 = 370;
    const int days = std::max(report.horizon, 2);
    const auto xpos = [&](double day) {
        return x0 + (day - 1.0) / (days - 1.0) * (x1 - x0);
    };
    const auto ypos = [&](double f1) { return y1 - f1 * (y1 - y0); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" "
           "height=\"420\" viewBox=\"0 0 720 420\" "
           "font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"720\" height=\"420\" fill=\"white\"/>\n";

    // Range bands split at the midpoints after days 4 and 9.
    struct Band {
        double from, to;
        const char* fill;
        const char* label;
    };
    const Band bands[] = {
        {1.0, 4.5, "#e7f2e7", "days 1-4"},
        {4.5, 9.5, "#fdf3dc", "days 5-9"},
        {9.5, static_cast<double>(days), "#fbe5e0", "days 10-14"},
    };
    for (const Band& b : bands) {
        if (b.from >= days) continue;
        const double to = std::min(b.to, static_cast<double>(days));
        svg += "<rect x=\"" + fmt_double(xpos(b.from)) + "\" y=\"" +
               fmt_double(y0) + "\" width=\"" +
               fmt_double(xpos(to) - xpos(b.from)) + "\" height=\"" +
               fmt_double(y1 - y0) + "\" fill=\"" + b.fill + "\"/>\n";
        svg += "<text x=\"" + fmt_double((xpos(b.from) + xpos(to)) / 2.0) +
               "\" y=\"" + fmt_double(y0 - 8.0) +
               "\" text-anchor=\"middle\" fill=\"#666\">" + b.label +
               "</text>\n";
    }

    for (int i = 0; i <= 4; ++i) {
        const double v = i / 4.0;
        svg += "<line x1=\"" + fmt_double(x0) + "\" y1=\"" +
               fmt_double(ypos(v)) + "\" x2=\"" + fmt_double(x1) +
               "\" y2=\"" + fmt_double(ypos(v)) +
               "\" stroke=\"#ccc\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt_double(x0 - 8.0) + "\" y=\"" +
               fmt_double(ypos(v) + 4.0) +
               "\" text-anchor=\"end\">" + fmt_double(v) + "</text>\n";
    }
    for (int d = 1; d <= days; ++d) {
        svg += "<text x=\"" + fmt_double(xpos(d)) + "\" y=\"" +
               fmt_double(y1 + 18.0) + "\" text-anchor=\"middle\">" +
               std::to_string(d) + "</text>\n";
    }
    svg += "<text x=\"" + fmt_double((x0 + x1) / 2.0) + "\" y=\"" +
           fmt_double(y1 + 40.0) +
           "\" text-anchor=\"middle\">forecast day</text>\n";
    svg += "<text x=\"16\" y=\"" + fmt_double((y0 + y1) / 2.0) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           fmt_double((y0 + y1) / 2.0) + ")\">F1</text>\n";

    const auto polyline = [&](const char* stroke, const char* dash,
                              bool persistence_line) {
        std::string points;
        for (const auto& row : report.per_day) {
            const double f1 = persistence_line ? row.persistence_micro.f1
                                               : row.micro.f1;
            points += fmt_double(xpos(row.day)) + "," +
                      fmt_double(ypos(f1)) + " ";
        }
        std::string line = "<polyline fill=\"none\" stroke=\"";
        line += stroke;
        line += "\" stroke-width=\"2\"";
        if (dash[0]) {
            line += " stroke-dasharray=\"";
            line += dash;
            line += "\"";
        }
        line += " points=\"" + points + "\"/>\n";
        return line;
    };
    svg += polyline("#1f77b4", "", false);
    svg += polyline("#d62728", "6 3", true);

    svg += "<line x1=\"560\" y1=\"392\" x2=\"590\" y2=\"392\" "
           "stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"596\" y=\"396\">model</text>\n";
    svg += "<line x1=\"560\" y1=\"408\" x2=\"590\" y2=\"408\" "
           "stroke=\"#d62728\" stroke-width=\"2\" "
           "stroke-dasharray=\"6 3\"/>\n";
    svg += "<text x=\"596\" y=\"412\">persistence</text>\n";
    svg += "</svg>\n";
    return svg;
}

std::string report_summary_json(const EvalReport& report) {
    nlohmann::json j;
    j["samples"] = report.sample_count;
    j["horizon"] = report.horizon;
    j["classes"] = kClassCount;
    j["micro"] = {{"accuracy", report.overall_micro.accuracy},
                  {"precision", report.overall_micro.precision},
                  {"recall", report.overall_micro.recall},
                  {"f1", report.overall_micro.f1}};
    j["weighted"] = {{"precision", report.overall_weighted.precision},
                     {"recall", report.overall_weighted.recall},
                     {"f1", report.overall_weighted.f1}};
    j["persistence"] = {{"f1", report.persistence_overall_micro.f1}};
    if (!report.per_day.empty()) {
        j["day1_f1"] = report.per_day.front().micro.f1;
        j["day1_persistence_f1"] =
            report.per_day.front().persistence_micro.f1;
        j["final_day_f1"] = report.per_day.back().micro.f1;
        j["final_day_persistence_f1"] =
            report.per_day.back().persistence_micro.f1;
    }
    double auc_sum = 0.0;
    int auc_days = 0;
    for (const auto& row : report.per_day) {
        if (row.auc) {
            auc_sum += *row.auc;
            ++auc_days;
        }
    }
    if (auc_days > 0)
        j["mean_auc"] = auc_sum / auc_days;
    else
        j["mean_auc"] = nullptr;
    return j.dump(2) + "\n";
}

}  // namespace cyano
