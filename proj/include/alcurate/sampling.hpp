#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "alcurate/dataset.hpp"
#include "alcurate/errors.hpp"
#include "alcurate/partition.hpp"
#include "alcurate/rng.hpp"
#include "alcurate/uncertainty.hpp"

namespace alcurate {

enum class SamplingMode { Instance, Subject };

inline const char* to_string(SamplingMode m) {
    return m == SamplingMode::Instance ? "instance" : "subject";
}

// Which label groups the pool in phase 1 of subject selection. Subjects
// themselves always belong to their true class.
enum class Phase1Grouping { TrueLabel, PredictedLabel };

struct TransferDecision {
    std::vector<std::int64_t> moved_instance_ids;
    std::vector<SubjectId> moved_subjects;       // empty in instance mode
    std::optional<ClassLabel> target_class;      // phase-1 winner, subject mode only
    SamplingMode strategy = SamplingMode::Instance;
};

// The min(k, |scored|) highest-scoring instances; ties go to the lower
// instance id.
inline TransferDecision select_instances_topk(const std::vector<ScoredInstance>& scored,
                                              std::size_t k) {
    if (scored.empty()) throw std::invalid_argument("select_instances_topk: empty scored list");
    if (k < 1) throw std::invalid_argument("select_instances_topk: k must be >= 1");
    std::vector<const ScoredInstance*> order;
    order.reserve(scored.size());
    for (const ScoredInstance& si : scored) order.push_back(&si);
    std::sort(order.begin(), order.end(), [](const ScoredInstance* a, const ScoredInstance* b) {
        if (a->score.value != b->score.value) return a->score.value > b->score.value;
        return a->instance_id < b->instance_id;
    });
    TransferDecision decision;
    decision.strategy = SamplingMode::Instance;
    const std::size_t take = std::min(k, order.size());
    for (std::size_t i = 0; i < take; ++i)
        decision.moved_instance_ids.push_back(order[i]->instance_id);
    return decision;
}

// Two-phase subject selection. Phase 1 averages scores per class (over the
// grouping label) and picks the highest-mean class, ties to the lower class
// index. Phase 2 averages scores per subject inside the winning class and
// moves the min(k, available) highest-mean subjects, ties to the
// lexicographically smaller subject id. Every pool instance of a chosen
// subject moves. A winning class with no pool subjects falls through to the
// next class; no class left at all signals pool exhaustion.
inline TransferDecision select_subjects_two_phase(
    const std::vector<ScoredInstance>& scored,
    const std::unordered_map<std::int64_t, SubjectId>& subject_of, std::size_t k,
    Phase1Grouping grouping = Phase1Grouping::TrueLabel) {
    if (scored.empty())
        throw std::invalid_argument("select_subjects_two_phase: empty scored list");
    if (k < 1) throw std::invalid_argument("select_subjects_two_phase: k must be >= 1");
    for (const ScoredInstance& si : scored)
        if (!subject_of.count(si.instance_id))
            throw std::invalid_argument("select_subjects_two_phase: instance " +
                                        std::to_string(si.instance_id) + " has no subject");

    // Phase 1: mean score per grouping class.
    std::map<ClassLabel, std::pair<double, std::int64_t>> class_sums;  // sum, count
    for (const ScoredInstance& si : scored) {
        const ClassLabel g =
            grouping == Phase1Grouping::TrueLabel ? si.true_label : si.predicted_label;
        auto& [sum, count] = class_sums[g];
        sum += si.score.value;
        ++count;
    }
    std::vector<std::pair<double, ClassLabel>> ranked;  // (-mean, class) ascending
    for (const auto& [cls, sc] : class_sums)
        ranked.emplace_back(-sc.first / static_cast<double>(sc.second), cls);
    std::sort(ranked.begin(), ranked.end());

    for (const auto& [neg_mean, winner] : ranked) {
        (void)neg_mean;
        // Phase 2: mean score per subject among the winner's true-class subjects.
        std::map<SubjectId, std::pair<double, std::int64_t>> subject_sums;
        for (const ScoredInstance& si : scored)
            if (si.true_label == winner) {
                auto& [sum, count] = subject_sums[subject_of.at(si.instance_id)];
                sum += si.score.value;
                ++count;
            }
        if (subject_sums.empty()) continue;  // predicted-label winner with no pool subjects

        std::vector<std::pair<double, SubjectId>> subjects;  // (-mean, id) ascending
        for (const auto& [sub, sc] : subject_sums)
            subjects.emplace_back(-sc.first / static_cast<double>(sc.second), sub);
        std::sort(subjects.begin(), subjects.end());

        TransferDecision decision;
        decision.strategy = SamplingMode::Subject;
        decision.target_class = winner;
        std::set<SubjectId> chosen;
        const std::size_t take = std::min(k, subjects.size());
        for (std::size_t i = 0; i < take; ++i) {
            decision.moved_subjects.push_back(subjects[i].second);
            chosen.insert(subjects[i].second);
        }
        for (const ScoredInstance& si : scored)
            if (chosen.count(subject_of.at(si.instance_id)))
                decision.moved_instance_ids.push_back(si.instance_id);
        return decision;
    }
    throw PoolExhausted("no class has pool subjects left");
}

// Non-AL baseline: a balanced train set of `subjects_per_class` seeded-random
// subjects per class drawn from the given non-test subjects; the remaining
// non-test instances form the pool (unused by the baseline).
inline Partition random_undersample(const Dataset& ds,
                                    const std::vector<SubjectId>& non_test_subjects,
                                    int subjects_per_class, std::uint64_t rng_seed) {
    if (subjects_per_class < 1) throw ConfigError("subjects_per_class must be >= 1");
    const auto labels = ds.subject_labels();
    std::vector<std::vector<SubjectId>> by_class(static_cast<std::size_t>(ds.num_classes));
    for (const SubjectId& s : non_test_subjects) {
        const auto it = labels.find(s);
        if (it == labels.end()) throw ConfigError("unknown subject " + s);
        by_class[static_cast<std::size_t>(it->second)].push_back(s);
    }
    for (auto& v : by_class) std::sort(v.begin(), v.end());
    for (int c = 0; c < ds.num_classes; ++c)
        if (by_class[static_cast<std::size_t>(c)].size() <
            static_cast<std::size_t>(subjects_per_class))
            throw ConfigError("class " + std::to_string(c) + " has only " +
                              std::to_string(by_class[static_cast<std::size_t>(c)].size()) +
                              " subjects available, need " + std::to_string(subjects_per_class));

    Rng rng(rng_seed);
    std::set<SubjectId> chosen;
    for (int c = 0; c < ds.num_classes; ++c) {
        std::vector<SubjectId> subs = by_class[static_cast<std::size_t>(c)];
        rng.shuffle(subs);
        for (int i = 0; i < subjects_per_class; ++i)
            chosen.insert(subs[static_cast<std::size_t>(i)]);
    }

    std::set<SubjectId> non_test(non_test_subjects.begin(), non_test_subjects.end());
    Partition p;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const SubjectId& s = ds.instances[i].subject;
        if (chosen.count(s))
            p.train.push_back(i);
        else if (non_test.count(s))
            p.pool.push_back(i);
        else
            p.test.push_back(i);
    }
    return p;
}

// Appearance multipliers for TrainSettings: `factor` for minority classes,
// 1 elsewhere. Factors outside {2, 3} need the explicit override.
inline std::vector<int> build_oversample_multipliers(const Dataset& ds, const IndexSet& train_idx,
                                                     int factor,
                                                     const std::set<ClassLabel>& minority_classes,
                                                     bool allow_any_factor = false) {
    (void)train_idx;
    if (!allow_any_factor && factor != 2 && factor != 3)
        throw ConfigError("oversample factor must be 2 or 3 (got " + std::to_string(factor) +
                          "); set the override to allow others");
    if (factor < 1) throw ConfigError("oversample factor must be >= 1");
    for (ClassLabel c : minority_classes)
        if (c < 0 || c >= ds.num_classes)
            throw ConfigError("minority class " + std::to_string(c) + " outside [0, " +
                              std::to_string(ds.num_classes) + ")");
    std::vector<int> mult(static_cast<std::size_t>(ds.num_classes), 1);
    for (ClassLabel c : minority_classes) mult[static_cast<std::size_t>(c)] = factor;
    return mult;
}

// Applies a transfer to a partition: moved ids leave the pool and join train.
// Throws if any moved id is not currently in the pool.
inline Partition apply_transfer(const Partition& p, const Dataset& ds,
                                const TransferDecision& decision) {
    std::unordered_map<std::int64_t, std::size_t> pos_of_id;
    for (std::size_t i : p.pool) pos_of_id.emplace(ds.instances[i].instance_id, i);
    std::set<std::size_t> moving;
    for (std::int64_t id : decision.moved_instance_ids) {
        const auto it = pos_of_id.find(id);
        if (it == pos_of_id.end())
            throw DataError("transfer references instance " + std::to_string(id) +
                            " that is not in the pool");
        moving.insert(it->second);
    }
    Partition out;
    out.test = p.test;
    out.train = p.train;
    for (std::size_t i : moving) out.train.push_back(i);
    std::sort(out.train.begin(), out.train.end());
    for (std::size_t i : p.pool)
        if (!moving.count(i)) out.pool.push_back(i);
    return out;
}

}  // namespace alcurate
