#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "alcurate/dataset.hpp"
#include "alcurate/errors.hpp"
#include "alcurate/experiment.hpp"

namespace alcurate {

// Experiment configs are flat `key = value` files: one key per line, `#`
// comments, blank lines ignored. Every key has a CLI `--set key=value`
// override and a documented default, so an empty file is a valid config.

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
T parse_number_or_throw(const std::string& key, const std::string& value) {
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last || value.empty())
        throw ConfigError(key + ": cannot parse '" + value + "' as a number");
    return out;
}

inline bool parse_bool_or_throw(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError(key + ": expected true/false, got '" + value + "'");
}

}  // namespace detail

inline std::map<std::string, std::string> parse_key_value_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ": line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path + ": line " + std::to_string(line_no) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

// All runner settings with their defaults; `apply` consumes recognized keys
// and rejects unknown ones.
struct SuiteOptions {
    std::vector<std::string> strategies = {
        "unbalanced",     "class_weighting", "random_undersample",
        "oversample:2",   "oversample:3",    "al:least_confident",
        "al:entropy",     "al:margin",       "al:ratio"};
    std::string sampling_mode = "subject";
    int k = 1;
    int iterations = 10;
    int seed_subjects_per_class = 2;
    int undersample_subjects_per_class = 4;
    std::string oversample_minority = "auto";
    std::string phase1_grouping = "true_label";
    bool calibrated = false;
    std::string calibration_split = "pool_slice";
    double calibration_fraction = 0.25;
    std::string selection_split = "test";
    double selection_fraction = 0.25;
    std::string eval_level = "image";
    double test_fraction = 0.2;
    int epochs = 30;
    double learning_rate = 0.05;
    int batch_size = 32;
    int hidden_width = 32;
    double oversample_jitter_sigma = 0.1;
    std::uint64_t seed = 1;
    int repeats = 1;
    int jobs = 1;
    // Ablation-only keys.
    std::string methods = "least_confident,entropy,ratio,margin";
    std::string instance_ks = "auto";
    std::string subject_ks = "1,2";

    void apply(const std::map<std::string, std::string>& kv) {
        using detail::parse_bool_or_throw;
        using detail::parse_number_or_throw;
        for (const auto& [key, value] : kv) {
            if (key == "strategies") strategies = detail::split_list(value);
            else if (key == "sampling_mode") sampling_mode = value;
            else if (key == "k") k = parse_number_or_throw<int>(key, value);
            else if (key == "iterations") iterations = parse_number_or_throw<int>(key, value);
            else if (key == "seed_subjects_per_class")
                seed_subjects_per_class = parse_number_or_throw<int>(key, value);
            else if (key == "undersample_subjects_per_class")
                undersample_subjects_per_class = parse_number_or_throw<int>(key, value);
            else if (key == "oversample_minority") oversample_minority = value;
            else if (key == "phase1_grouping") phase1_grouping = value;
            else if (key == "calibrated") calibrated = parse_bool_or_throw(key, value);
            else if (key == "calibration_split") calibration_split = value;
            else if (key == "calibration_fraction")
                calibration_fraction = parse_number_or_throw<double>(key, value);
            else if (key == "selection_split") selection_split = value;
            else if (key == "selection_fraction")
                selection_fraction = parse_number_or_throw<double>(key, value);
            else if (key == "eval_level") eval_level = value;
            else if (key == "test_fraction")
                test_fraction = parse_number_or_throw<double>(key, value);
            else if (key == "epochs") epochs = parse_number_or_throw<int>(key, value);
            else if (key == "learning_rate")
                learning_rate = parse_number_or_throw<double>(key, value);
            else if (key == "batch_size") batch_size = parse_number_or_throw<int>(key, value);
            else if (key == "hidden_width") hidden_width = parse_number_or_throw<int>(key, value);
            else if (key == "oversample_jitter_sigma")
                oversample_jitter_sigma = parse_number_or_throw<double>(key, value);
            else if (key == "seed") seed = parse_number_or_throw<std::uint64_t>(key, value);
            else if (key == "repeats") repeats = parse_number_or_throw<int>(key, value);
            else if (key == "jobs") jobs = parse_number_or_throw<int>(key, value);
            else if (key == "methods") methods = value;
            else if (key == "instance_ks") instance_ks = value;
            else if (key == "subject_ks") subject_ks = value;
            else throw ConfigError("unknown config key '" + key + "'");
        }
    }

    // Canonical echo of every effective key; parses back to this object.
    std::map<std::string, std::string> to_map() const {
        const auto num = [](auto v) {
            std::ostringstream ss;
            ss << v;
            return ss.str();
        };
        std::string strat;
        for (std::size_t i = 0; i < strategies.size(); ++i)
            strat += (i ? "," : "") + strategies[i];
        return {
            {"strategies", strat},
            {"sampling_mode", sampling_mode},
            {"k", num(k)},
            {"iterations", num(iterations)},
            {"seed_subjects_per_class", num(seed_subjects_per_class)},
            {"undersample_subjects_per_class", num(undersample_subjects_per_class)},
            {"oversample_minority", oversample_minority},
            {"phase1_grouping", phase1_grouping},
            {"calibrated", calibrated ? "true" : "false"},
            {"calibration_split", calibration_split},
            {"calibration_fraction", num(calibration_fraction)},
            {"selection_split", selection_split},
            {"selection_fraction", num(selection_fraction)},
            {"eval_level", eval_level},
            {"test_fraction", num(test_fraction)},
            {"epochs", num(epochs)},
            {"learning_rate", num(learning_rate)},
            {"batch_size", num(batch_size)},
            {"hidden_width", num(hidden_width)},
            {"oversample_jitter_sigma", num(oversample_jitter_sigma)},
            {"seed", num(seed)},
            {"repeats", num(repeats)},
            {"jobs", num(jobs)},
            {"methods", methods},
            {"instance_ks", instance_ks},
            {"subject_ks", subject_ks},
        };
    }

    ExperimentConfig base_config() const {
        ExperimentConfig c;
        if (sampling_mode == "instance") c.sampling_mode = SamplingMode::Instance;
        else if (sampling_mode == "subject") c.sampling_mode = SamplingMode::Subject;
        else throw ConfigError("sampling_mode must be instance or subject");
        if (phase1_grouping == "true_label") c.phase1_grouping = Phase1Grouping::TrueLabel;
        else if (phase1_grouping == "predicted_label")
            c.phase1_grouping = Phase1Grouping::PredictedLabel;
        else throw ConfigError("phase1_grouping must be true_label or predicted_label");
        if (calibration_split == "pool_slice") c.calibration_split = CalibrationSplit::PoolSlice;
        else if (calibration_split == "test") c.calibration_split = CalibrationSplit::Test;
        else throw ConfigError("calibration_split must be pool_slice or test");
        if (selection_split == "test") c.selection_split = SelectionSplit::Test;
        else if (selection_split == "pool_slice") c.selection_split = SelectionSplit::PoolSlice;
        else throw ConfigError("selection_split must be test or pool_slice");
        if (eval_level == "image") c.eval_level = EvalLevel::Image;
        else if (eval_level == "subject") c.eval_level = EvalLevel::Subject;
        else throw ConfigError("eval_level must be image or subject");
        if (oversample_minority != "auto")
            for (const std::string& tok : detail::split_list(oversample_minority))
                c.oversample_minority.insert(
                    detail::parse_number_or_throw<int>("oversample_minority", tok));
        c.k = k;
        c.iterations = iterations;
        c.seed_subjects_per_class = seed_subjects_per_class;
        c.undersample_subjects_per_class = undersample_subjects_per_class;
        c.calibrated = calibrated;
        c.calibration_fraction = calibration_fraction;
        c.selection_fraction = selection_fraction;
        c.test_fraction = test_fraction;
        c.train.epochs = epochs;
        c.train.learning_rate = learning_rate;
        c.train.batch_size = batch_size;
        c.train.hidden_width = hidden_width;
        c.train.oversample_jitter_sigma = oversample_jitter_sigma;
        c.rng_seed = seed;
        return c;
    }
};

inline UncertaintyMethod method_from_string(const std::string& name) {
    if (name == "least_confident") return UncertaintyMethod::LeastConfident;
    if (name == "margin") return UncertaintyMethod::Margin;
    if (name == "ratio") return UncertaintyMethod::Ratio;
    if (name == "entropy") return UncertaintyMethod::Entropy;
    throw ConfigError("unknown uncertainty method '" + name +
                      "' (expected least_confident, margin, ratio, or entropy)");
}

inline std::string method_label(UncertaintyMethod m) {
    switch (m) {
        case UncertaintyMethod::LeastConfident: return "Least Confident Sampling";
        case UncertaintyMethod::Margin: return "Margin Sampling";
        case UncertaintyMethod::Ratio: return "Ratio Sampling";
        case UncertaintyMethod::Entropy: return "Entropy Sampling";
    }
    return "?";
}

// Expands a strategy token such as "al:ratio" or "oversample:3" into a table
// label plus a fully resolved config.
inline std::pair<std::string, ExperimentConfig> expand_strategy_token(
    const std::string& token, const ExperimentConfig& base) {
    ExperimentConfig c = base;
    if (token == "unbalanced") {
        c.strategy = Strategy::Unbalanced;
        return {"Unbalanced", c};
    }
    if (token == "class_weighting") {
        c.strategy = Strategy::ClassWeighting;
        return {"Inverse Frequency Class Weighting", c};
    }
    if (token == "random_undersample") {
        c.strategy = Strategy::RandomUndersample;
        return {"Random Undersampling", c};
    }
    if (token.rfind("oversample", 0) == 0) {
        c.strategy = Strategy::Oversample;
        const std::size_t colon = token.find(':');
        if (colon != std::string::npos)
            c.oversample_factor =
                detail::parse_number_or_throw<int>("strategies", token.substr(colon + 1));
        return {"Oversampling (x" + std::to_string(c.oversample_factor) + ")", c};
    }
    if (token.rfind("al:", 0) == 0) {
        c.strategy = Strategy::ActiveLearning;
        c.al_method = method_from_string(token.substr(3));
        return {method_label(c.al_method), c};
    }
    throw ConfigError("unknown strategy token '" + token +
                      "' (expected unbalanced, class_weighting, random_undersample, "
                      "oversample[:factor], or al:<method>)");
}

inline std::vector<std::pair<std::string, ExperimentConfig>> build_strategy_suite(
    const SuiteOptions& options) {
    std::vector<std::pair<std::string, ExperimentConfig>> suite;
    const ExperimentConfig base = options.base_config();
    for (const std::string& token : options.strategies)
        suite.push_back(expand_strategy_token(token, base));
    if (suite.empty()) throw ConfigError("strategies list is empty");
    return suite;
}

// Median instance count per subject; the default instance-mode budget that
// matches moving one whole subject.
inline int median_instances_per_subject(const Dataset& ds) {
    std::map<SubjectId, int> counts;
    for (const Instance& inst : ds.instances) ++counts[inst.subject];
    std::vector<int> sizes;
    sizes.reserve(counts.size());
    for (const auto& [subject, n] : counts) sizes.push_back(n);
    std::sort(sizes.begin(), sizes.end());
    return sizes[sizes.size() / 2];
}

}  // namespace alcurate
