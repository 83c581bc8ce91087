#pragma once

#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "alcurate/dataset.hpp"
#include "alcurate/experiment.hpp"
#include "alcurate/version.hpp"

namespace alcurate {

using Json = nlohmann::ordered_json;

// Reports carry no timestamps or durations, so rerunning the same
// (dataset, config, seed) produces byte-identical JSON.

namespace detail {

inline Json to_json(const IndexSet& idx) {
    Json arr = Json::array();
    for (std::size_t i : idx) arr.push_back(i);
    return arr;
}

inline Json to_json(const Partition& p) {
    return Json{{"train", to_json(p.train)}, {"pool", to_json(p.pool)}, {"test", to_json(p.test)}};
}

inline Json to_json(const TransferDecision& t) {
    Json j;
    j["strategy"] = to_string(t.strategy);
    if (t.target_class)
        j["target_class"] = *t.target_class;
    else
        j["target_class"] = nullptr;
    j["moved_subjects"] = t.moved_subjects;
    j["moved_instance_ids"] = t.moved_instance_ids;
    return j;
}

inline Json to_json(const IterationRecord& rec) {
    Json j;
    j["m"] = rec.m;
    j["train_counts_per_class"] = rec.train_counts_per_class;
    j["accuracy"] = rec.accuracy;
    j["macro_f1"] = rec.macro_f1;
    j["test_nll"] = rec.test_nll;
    j["temperature"] = rec.temperature ? Json(*rec.temperature) : Json(nullptr);
    j["calibration_nll_before"] =
        rec.calibration_nll_before ? Json(*rec.calibration_nll_before) : Json(nullptr);
    j["calibration_nll_after"] =
        rec.calibration_nll_after ? Json(*rec.calibration_nll_after) : Json(nullptr);
    j["calibration_fit_size"] =
        rec.calibration_fit_size ? Json(*rec.calibration_fit_size) : Json(nullptr);
    j["selection_macro_f1"] =
        rec.selection_macro_f1 ? Json(*rec.selection_macro_f1) : Json(nullptr);
    j["transfer"] = rec.transfer ? to_json(*rec.transfer) : Json(nullptr);
    return j;
}

inline Json to_json(const RunResult& run) {
    Json j;
    j["seed"] = run.seed;
    j["best_iteration"] = run.records[run.best_index].m;
    j["pool_exhausted"] = run.pool_exhausted;
    j["initial_partition"] = to_json(run.initial_partition);
    j["final_partition"] = to_json(run.final_partition);
    j["selection_indices"] = to_json(run.selection_indices);
    Json records = Json::array();
    for (const IterationRecord& rec : run.records) records.push_back(to_json(rec));
    j["records"] = records;
    return j;
}

inline Json to_json(const SuiteRow& row) {
    Json j;
    j["label"] = row.label;
    j["strategy"] = to_string(row.config.strategy);
    if (row.config.strategy == Strategy::ActiveLearning) {
        j["al_method"] = to_string(row.config.al_method);
        j["sampling_mode"] = to_string(row.config.sampling_mode);
        j["k"] = row.config.k;
        j["calibrated"] = row.config.calibrated;
    }
    if (row.config.strategy == Strategy::Oversample)
        j["oversample_factor"] = row.config.oversample_factor;
    j["mean_accuracy"] = row.mean_accuracy;
    j["std_accuracy"] = row.std_accuracy;
    j["mean_macro_f1"] = row.mean_macro_f1;
    j["std_macro_f1"] = row.std_macro_f1;
    Json runs = Json::array();
    for (const RunResult& run : row.runs) runs.push_back(to_json(run));
    j["runs"] = runs;
    return j;
}

inline Json dataset_summary(const Dataset& ds, const std::string& path) {
    IndexSet all(ds.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Json j;
    j["path"] = path;
    j["instances"] = ds.size();
    j["num_classes"] = ds.num_classes;
    j["feature_dim"] = ds.feature_dim;
    j["class_instance_counts"] = ds.class_counts(all);
    j["class_subject_counts"] = ds.subject_counts(all);
    return j;
}

}  // namespace detail

inline Json build_run_report(const Dataset& ds, const std::string& dataset_path,
                             const std::map<std::string, std::string>& config_echo,
                             const std::vector<SuiteRow>& rows, int repeats,
                             std::uint64_t base_seed) {
    Json j;
    j["tool"] = kToolName;
    j["version"] = kVersion;
    j["command"] = "run";
    j["seed"] = base_seed;
    j["repeats"] = repeats;
    j["dataset"] = detail::dataset_summary(ds, dataset_path);
    j["config"] = config_echo;
    Json strategies = Json::array();
    for (const SuiteRow& row : rows) strategies.push_back(detail::to_json(row));
    j["strategies"] = strategies;
    return j;
}

inline Json build_ablation_report(const Dataset& ds, const std::string& dataset_path,
                                  const std::map<std::string, std::string>& config_echo,
                                  const std::vector<SuiteRow>& mode_grid,
                                  const std::vector<SuiteRow>& calibration_grid, int repeats,
                                  std::uint64_t base_seed) {
    Json j;
    j["tool"] = kToolName;
    j["version"] = kVersion;
    j["command"] = "ablate";
    j["seed"] = base_seed;
    j["repeats"] = repeats;
    j["dataset"] = detail::dataset_summary(ds, dataset_path);
    j["config"] = config_echo;
    Json mode = Json::array();
    for (const SuiteRow& row : mode_grid) mode.push_back(detail::to_json(row));
    j["mode_grid"] = mode;
    Json calib = Json::array();
    for (const SuiteRow& row : calibration_grid) calib.push_back(detail::to_json(row));
    j["calibration_grid"] = calib;
    return j;
}

// --- fixed-width tables ------------------------------------------------------

namespace detail {

inline std::string format_metric(double mean, double stddev, bool with_std) {
    char buf[48];
    if (with_std)
        std::snprintf(buf, sizeof(buf), "%.4f +/- %.4f", mean, stddev);
    else
        std::snprintf(buf, sizeof(buf), "%.4f", mean);
    return buf;
}

}  // namespace detail

inline void print_suite_table(std::ostream& os, const std::vector<SuiteRow>& rows,
                              bool with_std) {
    std::size_t label_width = std::string("Training method").size();
    for (const SuiteRow& row : rows) label_width = std::max(label_width, row.label.size());
    const std::size_t metric_width = with_std ? 18 : 8;
    const auto pad = [](const std::string& s, std::size_t w) {
        return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
    };
    os << pad("Training method", label_width) << "  " << pad("Acc", metric_width) << "  "
       << pad("F1", metric_width) << "\n";
    os << std::string(label_width + 2 * metric_width + 4, '-') << "\n";
    for (const SuiteRow& row : rows) {
        os << pad(row.label, label_width) << "  "
           << pad(detail::format_metric(row.mean_accuracy, row.std_accuracy, with_std),
                  metric_width)
           << "  "
           << pad(detail::format_metric(row.mean_macro_f1, row.std_macro_f1, with_std),
                  metric_width)
           << "\n";
    }
}

}  // namespace alcurate
