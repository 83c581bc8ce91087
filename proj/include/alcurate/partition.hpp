#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "alcurate/dataset.hpp"
#include "alcurate/errors.hpp"
#include "alcurate/rng.hpp"

namespace alcurate {

// Disjoint train/pool/test regions over one dataset. The test region is
// always closed under subjects; train and pool are subject-closed whenever
// only subject-level operations have touched them.
struct Partition {
    IndexSet train;
    IndexSet pool;
    IndexSet test;
};

namespace detail {

inline bool sorted_unique(const IndexSet& s) {
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] <= s[i - 1]) return false;
    return true;
}

inline std::unordered_set<SubjectId> subjects_of(const Dataset& ds, const IndexSet& idx) {
    std::unordered_set<SubjectId> subs;
    for (std::size_t i : idx) subs.insert(ds.instances[i].subject);
    return subs;
}

// True when no subject appears in both index sets.
inline bool subject_disjoint(const Dataset& ds, const IndexSet& a, const IndexSet& b) {
    const auto subs = subjects_of(ds, a);
    for (std::size_t i : b)
        if (subs.count(ds.instances[i].subject)) return false;
    return true;
}

}  // namespace detail

// Checks the Partition invariants; throws DataError on violation. Subject
// closure of train/pool is only required when `subject_closed_train_pool`.
inline void validate_partition(const Partition& p, const Dataset& ds,
                               bool subject_closed_train_pool = false) {
    if (!detail::sorted_unique(p.train) || !detail::sorted_unique(p.pool) ||
        !detail::sorted_unique(p.test))
        throw DataError("partition index sets must be sorted and duplicate-free");
    std::vector<int> owner(ds.size(), 0);
    for (std::size_t i : p.train) {
        if (i >= ds.size()) throw DataError("train index out of range");
        ++owner[i];
    }
    for (std::size_t i : p.pool) {
        if (i >= ds.size()) throw DataError("pool index out of range");
        ++owner[i];
    }
    for (std::size_t i : p.test) {
        if (i >= ds.size()) throw DataError("test index out of range");
        ++owner[i];
    }
    for (std::size_t i = 0; i < owner.size(); ++i) {
        if (owner[i] == 0) throw DataError("instance position " + std::to_string(i) +
                                           " belongs to no partition region");
        if (owner[i] > 1) throw DataError("instance position " + std::to_string(i) +
                                          " belongs to multiple partition regions");
    }
    if (!detail::subject_disjoint(ds, p.test, p.train) ||
        !detail::subject_disjoint(ds, p.test, p.pool))
        throw DataError("test region is not subject-closed");
    if (subject_closed_train_pool && !detail::subject_disjoint(ds, p.train, p.pool))
        throw DataError("a subject straddles train and pool");
}

// Holds out whole subjects per class: max(1, round(test_fraction * n_c))
// subjects of every class, chosen by seeded shuffle. Everything else lands in
// the pool with an empty train set, pending seed selection.
inline Partition split_by_subject(const Dataset& ds, double test_fraction,
                                  std::uint64_t rng_seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test_fraction must lie in (0, 1), got " +
                          std::to_string(test_fraction));
    const auto by_class = ds.subjects_by_class();
    for (int c = 0; c < ds.num_classes; ++c)
        if (by_class[static_cast<std::size_t>(c)].size() < 3)
            throw ConfigError("class " + std::to_string(c) + " has only " +
                              std::to_string(by_class[static_cast<std::size_t>(c)].size()) +
                              " subjects; at least 3 are required (2 for the seed, 1 for test)");
    Rng rng(rng_seed);
    std::unordered_set<SubjectId> test_subjects;
    for (int c = 0; c < ds.num_classes; ++c) {
        std::vector<SubjectId> subs = by_class[static_cast<std::size_t>(c)];
        rng.shuffle(subs);
        const auto want = static_cast<std::size_t>(std::max<long>(
            1, std::lround(test_fraction * static_cast<double>(subs.size()))));
        const std::size_t n_test = std::min(want, subs.size());
        for (std::size_t i = 0; i < n_test; ++i) test_subjects.insert(subs[i]);
    }
    Partition p;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (test_subjects.count(ds.instances[i].subject))
            p.test.push_back(i);
        else
            p.pool.push_back(i);
    }
    return p;
}

// Moves `subjects_per_class` seeded-random subjects of every class from the
// non-test region into train; the rest become the pool. A zero-subject seed
// is rejected unless explicitly allowed.
inline Partition select_balanced_seed(const Partition& partition, const Dataset& ds,
                                      int subjects_per_class, std::uint64_t rng_seed,
                                      bool allow_empty_seed = false) {
    if (subjects_per_class < 0)
        throw ConfigError("subjects_per_class must be >= 0");
    if (subjects_per_class == 0 && !allow_empty_seed)
        throw ConfigError("subjects_per_class = 0 yields an empty train set; "
                          "pass allow_empty_seed to permit it");
    IndexSet non_test;
    non_test.reserve(partition.train.size() + partition.pool.size());
    non_test.insert(non_test.end(), partition.train.begin(), partition.train.end());
    non_test.insert(non_test.end(), partition.pool.begin(), partition.pool.end());
    std::sort(non_test.begin(), non_test.end());

    std::vector<std::vector<SubjectId>> by_class(static_cast<std::size_t>(ds.num_classes));
    {
        std::unordered_set<SubjectId> seen;
        for (std::size_t i : non_test) {
            const Instance& inst = ds.instances[i];
            if (seen.insert(inst.subject).second)
                by_class[static_cast<std::size_t>(inst.label)].push_back(inst.subject);
        }
        for (auto& v : by_class) std::sort(v.begin(), v.end());
    }
    for (int c = 0; c < ds.num_classes; ++c)
        if (by_class[static_cast<std::size_t>(c)].size() <
            static_cast<std::size_t>(subjects_per_class))
            throw ConfigError("class " + std::to_string(c) + " has only " +
                              std::to_string(by_class[static_cast<std::size_t>(c)].size()) +
                              " non-test subjects, need " + std::to_string(subjects_per_class) +
                              " for the seed");

    Rng rng(rng_seed);
    std::unordered_set<SubjectId> seed_subjects;
    for (int c = 0; c < ds.num_classes; ++c) {
        std::vector<SubjectId> subs = by_class[static_cast<std::size_t>(c)];
        rng.shuffle(subs);
        for (int i = 0; i < subjects_per_class; ++i)
            seed_subjects.insert(subs[static_cast<std::size_t>(i)]);
    }

    Partition out;
    out.test = partition.test;
    for (std::size_t i : non_test) {
        if (seed_subjects.count(ds.instances[i].subject))
            out.train.push_back(i);
        else
            out.pool.push_back(i);
    }
    return out;
}

}  // namespace alcurate
