#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "alcurate/calibration.hpp"
#include "alcurate/classifier.hpp"
#include "alcurate/dataset.hpp"
#include "alcurate/errors.hpp"
#include "alcurate/metrics.hpp"
#include "alcurate/partition.hpp"
#include "alcurate/rng.hpp"
#include "alcurate/sampling.hpp"
#include "alcurate/uncertainty.hpp"

namespace alcurate {

enum class Strategy { Unbalanced, ClassWeighting, RandomUndersample, Oversample, ActiveLearning };

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::Unbalanced: return "unbalanced";
        case Strategy::ClassWeighting: return "class_weighting";
        case Strategy::RandomUndersample: return "random_undersample";
        case Strategy::Oversample: return "oversample";
        case Strategy::ActiveLearning: return "al";
    }
    return "?";
}

// Where the calibration temperature is fitted. PoolSlice avoids touching the
// test set; Test reproduces fitting on the hold-out test set.
enum class CalibrationSplit { PoolSlice, Test };

// Where the best iteration is picked. Test reproduces selection on the test
// set; PoolSlice selects on a held-back slice of the pool instead.
enum class SelectionSplit { Test, PoolSlice };

// Image-level metrics, or subject-level via majority vote over each test
// subject's predictions.
enum class EvalLevel { Image, Subject };

struct ExperimentConfig {
    Strategy strategy = Strategy::ActiveLearning;

    // Active-learning fields; ignored by the baselines.
    UncertaintyMethod al_method = UncertaintyMethod::Ratio;
    SamplingMode sampling_mode = SamplingMode::Subject;
    Phase1Grouping phase1_grouping = Phase1Grouping::TrueLabel;
    int k = 1;
    int iterations = 10;  // M
    int seed_subjects_per_class = 2;
    bool calibrated = false;
    CalibrationSplit calibration_split = CalibrationSplit::PoolSlice;
    double calibration_fraction = 0.25;
    SelectionSplit selection_split = SelectionSplit::Test;
    double selection_fraction = 0.25;

    // Baseline fields.
    int undersample_subjects_per_class = 4;
    int oversample_factor = 2;
    std::set<ClassLabel> oversample_minority;  // empty = below-median subject count

    EvalLevel eval_level = EvalLevel::Image;
    double test_fraction = 0.2;
    TrainSettings train;  // train.rng_seed is derived from rng_seed per fit
    std::uint64_t rng_seed = 1;

    void validate() const {
        if (k < 1) throw ConfigError("k must be >= 1");
        if (iterations < 0) throw ConfigError("iterations must be >= 0");
        if (seed_subjects_per_class < 1)
            throw ConfigError("seed_subjects_per_class must be >= 1");
        if (undersample_subjects_per_class < 1)
            throw ConfigError("undersample_subjects_per_class must be >= 1");
        if (!(test_fraction > 0.0 && test_fraction < 1.0))
            throw ConfigError("test_fraction must lie in (0, 1)");
        if (!(calibration_fraction > 0.0 && calibration_fraction <= 1.0))
            throw ConfigError("calibration_fraction must lie in (0, 1]");
        if (!(selection_fraction > 0.0 && selection_fraction < 1.0))
            throw ConfigError("selection_fraction must lie in (0, 1)");
        if (epochs_invalid()) throw ConfigError("invalid train settings");
    }

private:
    bool epochs_invalid() const {
        return train.epochs < 1 || !(train.learning_rate > 0.0) || train.batch_size < 1 ||
               train.hidden_width < 0;
    }
};

struct IterationRecord {
    int m = 0;
    std::vector<std::int64_t> train_counts_per_class;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double test_nll = 0.0;
    std::optional<double> temperature;
    std::optional<double> calibration_nll_before;
    std::optional<double> calibration_nll_after;
    std::optional<std::int64_t> calibration_fit_size;
    // Macro-F1 on the selection slice; only present when selecting there.
    std::optional<double> selection_macro_f1;
    std::optional<TransferDecision> transfer;  // absent at m = 0
};

struct RunResult {
    std::vector<IterationRecord> records;
    std::size_t best_index = 0;
    bool pool_exhausted = false;
    Partition initial_partition;  // state the first model was trained on
    Partition final_partition;
    IndexSet selection_indices;  // held-back pool slice; empty unless used
    std::uint64_t seed = 0;
};

namespace detail {

// Purpose tags for sub-seed derivation.
inline constexpr std::uint64_t kSeedSplit = 1;
inline constexpr std::uint64_t kSeedBalancedSeed = 2;
inline constexpr std::uint64_t kSeedFit = 3;
inline constexpr std::uint64_t kSeedCalibration = 4;
inline constexpr std::uint64_t kSeedUndersample = 5;
inline constexpr std::uint64_t kSeedSelectionSlice = 6;

struct Evaluation {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double nll = 0.0;
};

inline Evaluation evaluate_model(const Classifier& model, const Dataset& ds,
                                 const IndexSet& eval_idx, EvalLevel level,
                                 std::optional<double> temperature) {
    const auto preds = predict_proba(model, ds, eval_idx);
    std::vector<std::pair<ProbabilityVector, ClassLabel>> prob_pairs;
    std::vector<std::pair<ClassLabel, ClassLabel>> label_pairs;
    prob_pairs.reserve(preds.size());
    label_pairs.reserve(preds.size());
    for (std::size_t n = 0; n < preds.size(); ++n) {
        const ProbabilityVector p =
            temperature ? apply_temperature(preds[n].logits, *temperature) : preds[n].probs;
        const auto pred_label = static_cast<ClassLabel>(argmax(p.probs));
        label_pairs.emplace_back(ds.instances[eval_idx[n]].label, pred_label);
        prob_pairs.emplace_back(p, ds.instances[eval_idx[n]].label);
    }

    Evaluation ev;
    ev.nll = nll(prob_pairs);
    if (level == EvalLevel::Image) {
        const auto cm = confusion(label_pairs, ds.num_classes);
        ev.accuracy = accuracy(cm);
        ev.macro_f1 = macro_f1(cm);
        return ev;
    }

    // Subject level: majority vote per subject, ties to the lower class.
    std::map<SubjectId, std::pair<ClassLabel, std::vector<int>>> votes;
    for (std::size_t n = 0; n < preds.size(); ++n) {
        const Instance& inst = ds.instances[eval_idx[n]];
        auto& [true_label, tally] = votes[inst.subject];
        true_label = inst.label;
        tally.resize(static_cast<std::size_t>(ds.num_classes), 0);
        ++tally[static_cast<std::size_t>(label_pairs[n].second)];
    }
    std::vector<std::pair<ClassLabel, ClassLabel>> subject_pairs;
    for (const auto& [subject, entry] : votes) {
        const auto& tally = entry.second;
        int best = 0;
        for (int c = 1; c < ds.num_classes; ++c)
            if (tally[static_cast<std::size_t>(c)] > tally[static_cast<std::size_t>(best)])
                best = c;
        subject_pairs.emplace_back(entry.first, best);
    }
    const auto cm = confusion(subject_pairs, ds.num_classes);
    ev.accuracy = accuracy(cm);
    ev.macro_f1 = macro_f1(cm);
    return ev;
}

// Subject-closed slice of the pool used for best-iteration selection:
// per class, floor(fraction * pool subjects); at least one subject overall.
inline IndexSet carve_selection_slice(const Dataset& ds, const Partition& part, double fraction,
                                      std::uint64_t seed) {
    std::vector<std::vector<SubjectId>> by_class(static_cast<std::size_t>(ds.num_classes));
    {
        std::unordered_set<SubjectId> seen;
        for (std::size_t i : part.pool) {
            const Instance& inst = ds.instances[i];
            if (seen.insert(inst.subject).second)
                by_class[static_cast<std::size_t>(inst.label)].push_back(inst.subject);
        }
        for (auto& v : by_class) std::sort(v.begin(), v.end());
    }
    Rng rng(seed);
    std::set<SubjectId> chosen;
    for (int c = 0; c < ds.num_classes; ++c) {
        auto subs = by_class[static_cast<std::size_t>(c)];
        rng.shuffle(subs);
        const auto take = static_cast<std::size_t>(
            std::floor(fraction * static_cast<double>(subs.size())));
        for (std::size_t i = 0; i < take; ++i) chosen.insert(subs[i]);
    }
    if (chosen.empty()) {
        // Degenerate pools: hold back one subject from the best-stocked class.
        std::size_t best_class = 0;
        for (std::size_t c = 1; c < by_class.size(); ++c)
            if (by_class[c].size() > by_class[best_class].size()) best_class = c;
        if (by_class[best_class].empty())
            throw ConfigError("selection_split = pool_slice needs a non-empty pool");
        auto subs = by_class[best_class];
        rng.shuffle(subs);
        chosen.insert(subs[0]);
    }
    IndexSet slice;
    for (std::size_t i : part.pool)
        if (chosen.count(ds.instances[i].subject)) slice.push_back(i);
    return slice;
}

inline IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Classes whose non-test subject count falls below the median count.
inline std::set<ClassLabel> auto_minority_classes(const Dataset& ds, const IndexSet& region) {
    const auto counts = ds.subject_counts(region);
    std::vector<std::int64_t> sorted = counts;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median = n % 2 == 1 ? static_cast<double>(sorted[n / 2])
                                     : (static_cast<double>(sorted[n / 2 - 1]) +
                                        static_cast<double>(sorted[n / 2])) /
                                           2.0;
    std::set<ClassLabel> minority;
    for (int c = 0; c < ds.num_classes; ++c)
        if (static_cast<double>(counts[static_cast<std::size_t>(c)]) < median)
            minority.insert(c);
    return minority;
}

// Seeded subset of the pool the temperature is fitted on. The slice is only
// read, never moved, so the transfer bookkeeping stays untouched.
inline IndexSet calibration_slice(const IndexSet& pool, double fraction, std::uint64_t seed) {
    if (pool.empty()) return {};
    const auto want = static_cast<std::size_t>(
        std::max<long>(1, std::lround(fraction * static_cast<double>(pool.size()))));
    if (want >= pool.size()) return pool;
    IndexSet shuffled = pool;
    Rng rng(seed);
    rng.shuffle(shuffled);
    shuffled.resize(want);
    std::sort(shuffled.begin(), shuffled.end());
    return shuffled;
}

inline std::optional<CalibrationResult> fit_iteration_temperature(
    const Classifier& model, const Dataset& ds, const Partition& part,
    const ExperimentConfig& config, int m) {
    IndexSet fit_idx;
    if (config.calibration_split == CalibrationSplit::Test) {
        fit_idx = part.test;
    } else {
        fit_idx = calibration_slice(part.pool, config.calibration_fraction,
                                    mix_seed(mix_seed(config.rng_seed, kSeedCalibration),
                                             static_cast<std::uint64_t>(m)));
    }
    if (fit_idx.empty()) return std::nullopt;
    std::vector<std::pair<Logits, ClassLabel>> pairs;
    pairs.reserve(fit_idx.size());
    for (std::size_t i : fit_idx)
        pairs.emplace_back(model.predict_logits(ds.instances[i]), ds.instances[i].label);
    return fit_temperature(pairs);
}

}  // namespace detail

// Runs one experiment: an AL loop of M transfer iterations on top of a
// balanced seed, or a single fit for the non-AL baselines. Deterministic for
// fixed (dataset, config).
inline RunResult run_experiment(const Dataset& ds, const ExperimentConfig& config) {
    config.validate();
    config.train.validate(ds.num_classes);
    if (ds.num_classes < 2) throw ConfigError("dataset needs at least 2 classes");

    RunResult result;
    result.seed = config.rng_seed;

    const Partition split =
        split_by_subject(ds, config.test_fraction, mix_seed(config.rng_seed, detail::kSeedSplit));

    const auto record_iteration = [&](const Classifier& model, const Partition& part, int m,
                                      const std::optional<CalibrationResult>& calib,
                                      std::optional<TransferDecision> transfer) {
        IterationRecord rec;
        rec.m = m;
        rec.train_counts_per_class = ds.class_counts(part.train);
        const std::optional<double> temp =
            calib ? std::optional<double>(calib->temperature) : std::nullopt;
        const auto ev = detail::evaluate_model(model, ds, part.test, config.eval_level, temp);
        rec.accuracy = ev.accuracy;
        rec.macro_f1 = ev.macro_f1;
        rec.test_nll = ev.nll;
        if (calib) {
            rec.temperature = calib->temperature;
            rec.calibration_nll_before = calib->nll_before;
            rec.calibration_nll_after = calib->nll_after;
            rec.calibration_fit_size = static_cast<std::int64_t>(calib->fit_set_size);
        }
        if (config.selection_split == SelectionSplit::PoolSlice &&
            !result.selection_indices.empty()) {
            const auto sel = detail::evaluate_model(model, ds, result.selection_indices,
                                                    config.eval_level, temp);
            rec.selection_macro_f1 = sel.macro_f1;
        }
        rec.transfer = std::move(transfer);
        result.records.push_back(std::move(rec));
    };

    if (config.strategy != Strategy::ActiveLearning) {
        Partition part;
        TrainSettings settings = config.train;
        settings.rng_seed = mix_seed(mix_seed(config.rng_seed, detail::kSeedFit), 0);
        switch (config.strategy) {
            case Strategy::Unbalanced: {
                part = Partition{split.pool, {}, split.test};
                break;
            }
            case Strategy::ClassWeighting: {
                part = Partition{split.pool, {}, split.test};
                settings.class_weights = inverse_frequency_weights(ds, part.train);
                break;
            }
            case Strategy::Oversample: {
                part = Partition{split.pool, {}, split.test};
                const std::set<ClassLabel> minority =
                    config.oversample_minority.empty()
                        ? detail::auto_minority_classes(ds, part.train)
                        : config.oversample_minority;
                settings.oversample_multipliers = build_oversample_multipliers(
                    ds, part.train, config.oversample_factor, minority);
                break;
            }
            case Strategy::RandomUndersample: {
                std::vector<SubjectId> non_test;
                {
                    std::unordered_set<SubjectId> seen;
                    for (std::size_t i : split.pool)
                        if (seen.insert(ds.instances[i].subject).second)
                            non_test.push_back(ds.instances[i].subject);
                }
                std::sort(non_test.begin(), non_test.end());
                part = random_undersample(ds, non_test, config.undersample_subjects_per_class,
                                          mix_seed(config.rng_seed, detail::kSeedUndersample));
                break;
            }
            case Strategy::ActiveLearning: break;  // unreachable
        }
        ReferenceClassifier model;
        model.fit(ds, part.train, settings);
        const auto calib = config.calibrated
                               ? detail::fit_iteration_temperature(model, ds, part, config, 0)
                               : std::nullopt;
        result.initial_partition = part;
        record_iteration(model, part, 0, calib, std::nullopt);
        result.best_index = 0;
        result.final_partition = part;
        return result;
    }

    // Active learning.
    Partition part = select_balanced_seed(split, ds, config.seed_subjects_per_class,
                                          mix_seed(config.rng_seed, detail::kSeedBalancedSeed));
    if (config.selection_split == SelectionSplit::PoolSlice)
        result.selection_indices = detail::carve_selection_slice(
            ds, part, config.selection_fraction,
            mix_seed(config.rng_seed, detail::kSeedSelectionSlice));
    result.initial_partition = part;

    const auto subject_of = [&ds] {
        std::unordered_map<std::int64_t, SubjectId> m;
        for (const Instance& inst : ds.instances) m.emplace(inst.instance_id, inst.subject);
        return m;
    }();

    ReferenceClassifier model;
    std::optional<CalibrationResult> last_calib;
    for (int m = 0; m <= config.iterations; ++m) {
        std::optional<TransferDecision> transfer;
        if (m > 0) {
            const IndexSet scorable = detail::set_difference(part.pool, result.selection_indices);
            if (scorable.empty()) {
                result.pool_exhausted = true;
                break;
            }
            const std::optional<double> temp =
                config.calibrated && last_calib
                    ? std::optional<double>(last_calib->temperature)
                    : std::nullopt;
            const auto scored = score_pool(model, ds, scorable, config.al_method, temp);
            TransferDecision decision =
                config.sampling_mode == SamplingMode::Instance
                    ? select_instances_topk(scored, static_cast<std::size_t>(config.k))
                    : select_subjects_two_phase(scored, subject_of,
                                                static_cast<std::size_t>(config.k),
                                                config.phase1_grouping);
            part = apply_transfer(part, ds, decision);
            transfer = std::move(decision);
        }
        TrainSettings settings = config.train;
        settings.rng_seed = mix_seed(mix_seed(config.rng_seed, detail::kSeedFit),
                                     static_cast<std::uint64_t>(m));
        model.fit(ds, part.train, settings);
        last_calib = config.calibrated
                         ? detail::fit_iteration_temperature(model, ds, part, config, m)
                         : std::nullopt;
        record_iteration(model, part, m, last_calib, std::move(transfer));
    }

    double best = -1.0;
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        const IterationRecord& rec = result.records[i];
        const double metric = config.selection_split == SelectionSplit::PoolSlice
                                  ? rec.selection_macro_f1.value_or(rec.macro_f1)
                                  : rec.macro_f1;
        if (metric > best) {
            best = metric;
            result.best_index = i;
        }
    }
    result.final_partition = part;
    return result;
}

struct SuiteRow {
    std::string label;
    ExperimentConfig config;
    std::vector<RunResult> runs;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    double mean_macro_f1 = 0.0;
    double std_macro_f1 = 0.0;
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace detail

// Runs every config `repeats` times with seeds base_seed .. base_seed+repeats-1
// and aggregates the best-iteration metrics. `jobs` > 1 fans runs out across
// threads; results are keyed by slot, so ordering never depends on timing.
inline std::vector<SuiteRow> run_suite(
    const Dataset& ds, const std::vector<std::pair<std::string, ExperimentConfig>>& configs,
    int repeats, std::uint64_t base_seed, int jobs = 1) {
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
    for (const auto& [label, config] : configs) {
        try {
            config.validate();
            config.train.validate(ds.num_classes);
        } catch (const ConfigError& e) {
            throw ConfigError(label + ": " + e.what());
        }
    }

    std::vector<SuiteRow> rows(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        rows[i].label = configs[i].first;
        rows[i].config = configs[i].second;
        rows[i].runs.resize(static_cast<std::size_t>(repeats));
    }

    struct Task {
        std::size_t row;
        int rep;
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < configs.size(); ++i)
        for (int r = 0; r < repeats; ++r) tasks.push_back({i, r});

    std::vector<std::string> failures(tasks.size());
    const auto run_task = [&](const Task& t) {
        ExperimentConfig config = rows[t.row].config;
        config.rng_seed = base_seed + static_cast<std::uint64_t>(t.rep);
        rows[t.row].runs[static_cast<std::size_t>(t.rep)] = run_experiment(ds, config);
    };

    if (jobs <= 1) {
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            try {
                run_task(tasks[t]);
            } catch (const std::exception& e) {
                throw DataError(rows[tasks[t].row].label + ": " + e.what());
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        const auto worker = [&] {
            while (true) {
                const std::size_t t = next.fetch_add(1);
                if (t >= tasks.size()) return;
                try {
                    run_task(tasks[t]);
                } catch (const std::exception& e) {
                    failures[t] = e.what();
                }
            }
        };
        std::vector<std::thread> threads;
        const int n_threads = std::min<int>(jobs, static_cast<int>(tasks.size()));
        for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
        for (auto& th : threads) th.join();
        for (std::size_t t = 0; t < tasks.size(); ++t)
            if (!failures[t].empty())
                throw DataError(rows[tasks[t].row].label + ": " + failures[t]);
    }

    for (SuiteRow& row : rows) {
        std::vector<double> accs, f1s;
        for (const RunResult& run : row.runs) {
            const IterationRecord& best = run.records[run.best_index];
            accs.push_back(best.accuracy);
            f1s.push_back(best.macro_f1);
        }
        std::tie(row.mean_accuracy, row.std_accuracy) = detail::mean_std(accs);
        std::tie(row.mean_macro_f1, row.std_macro_f1) = detail::mean_std(f1s);
    }
    return rows;
}

}  // namespace alcurate
