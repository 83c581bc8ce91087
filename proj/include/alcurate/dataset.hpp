#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "alcurate/errors.hpp"

namespace alcurate {

// Class labels are dense integers in [0, num_classes).
using ClassLabel = int;

// Opaque subject identifier; all instances of a subject share one label.
using SubjectId = std::string;

// Sorted ascending, duplicate-free vector of positions into Dataset::instances.
using IndexSet = std::vector<std::size_t>;

struct Instance {
    std::int64_t instance_id = 0;
    SubjectId subject;
    ClassLabel label = 0;
    std::vector<double> features;
};

struct Dataset {
    std::vector<Instance> instances;
    int num_classes = 0;
    std::size_t feature_dim = 0;

    std::size_t size() const { return instances.size(); }

    // Throws DataError on any invariant violation: duplicate instance ids,
    // out-of-range labels, inconsistent feature dimension, non-finite
    // features, or a subject carrying two different labels.
    void validate() const {
        std::unordered_set<std::int64_t> seen_ids;
        std::unordered_map<SubjectId, ClassLabel> subject_label;
        for (const Instance& inst : instances) {
            if (!seen_ids.insert(inst.instance_id).second)
                throw DataError("duplicate instance_id " + std::to_string(inst.instance_id));
            if (inst.label < 0 || inst.label >= num_classes)
                throw DataError("instance " + std::to_string(inst.instance_id) + " has label " +
                                std::to_string(inst.label) + " outside [0, " +
                                std::to_string(num_classes) + ")");
            if (inst.features.size() != feature_dim)
                throw DataError("instance " + std::to_string(inst.instance_id) +
                                " has feature dimension " + std::to_string(inst.features.size()) +
                                ", expected " + std::to_string(feature_dim));
            for (double f : inst.features)
                if (!std::isfinite(f))
                    throw DataError("instance " + std::to_string(inst.instance_id) +
                                    " has a non-finite feature");
            auto [it, inserted] = subject_label.emplace(inst.subject, inst.label);
            if (!inserted && it->second != inst.label)
                throw DataError("subject " + inst.subject + " carries conflicting labels " +
                                std::to_string(it->second) + " and " + std::to_string(inst.label));
        }
    }

    // Subject -> label (a function by the dataset invariant).
    std::unordered_map<SubjectId, ClassLabel> subject_labels() const {
        std::unordered_map<SubjectId, ClassLabel> m;
        for (const Instance& inst : instances) m.emplace(inst.subject, inst.label);
        return m;
    }

    // Per class, the sorted list of distinct subjects.
    std::vector<std::vector<SubjectId>> subjects_by_class() const {
        std::vector<std::vector<SubjectId>> per_class(static_cast<std::size_t>(num_classes));
        std::unordered_set<SubjectId> seen;
        for (const Instance& inst : instances)
            if (seen.insert(inst.subject).second)
                per_class[static_cast<std::size_t>(inst.label)].push_back(inst.subject);
        for (auto& v : per_class) std::sort(v.begin(), v.end());
        return per_class;
    }

    // Subject -> sorted instance positions.
    std::map<SubjectId, IndexSet> subject_indices() const {
        std::map<SubjectId, IndexSet> m;
        for (std::size_t i = 0; i < instances.size(); ++i) m[instances[i].subject].push_back(i);
        return m;
    }

    // Instance count per class over a subset of positions.
    std::vector<std::int64_t> class_counts(const IndexSet& idx) const {
        std::vector<std::int64_t> counts(static_cast<std::size_t>(num_classes), 0);
        for (std::size_t i : idx) ++counts[static_cast<std::size_t>(instances[i].label)];
        return counts;
    }

    // Distinct subjects per class over a subset of positions.
    std::vector<std::int64_t> subject_counts(const IndexSet& idx) const {
        std::vector<std::int64_t> counts(static_cast<std::size_t>(num_classes), 0);
        std::unordered_set<SubjectId> seen;
        for (std::size_t i : idx)
            if (seen.insert(instances[i].subject).second)
                ++counts[static_cast<std::size_t>(instances[i].label)];
        return counts;
    }
};

}  // namespace alcurate
