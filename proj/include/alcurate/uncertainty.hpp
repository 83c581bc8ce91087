#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "alcurate/classifier.hpp"
#include "alcurate/dataset.hpp"
#include "alcurate/probability.hpp"

namespace alcurate {

// Higher value = more uncertain, for every method.
enum class UncertaintyMethod { LeastConfident, Margin, Ratio, Entropy };

inline const char* to_string(UncertaintyMethod m) {
    switch (m) {
        case UncertaintyMethod::LeastConfident: return "least_confident";
        case UncertaintyMethod::Margin: return "margin";
        case UncertaintyMethod::Ratio: return "ratio";
        case UncertaintyMethod::Entropy: return "entropy";
    }
    return "?";
}

struct UncertaintyScore {
    double value = 0.0;
    UncertaintyMethod method = UncertaintyMethod::LeastConfident;
};

struct ScoredInstance {
    std::int64_t instance_id = 0;
    UncertaintyScore score;
    ClassLabel predicted_label = 0;
    ClassLabel true_label = 0;
};

namespace detail {

// Largest and second-largest entries; among ties the lower index wins first.
inline std::pair<double, double> top_two(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    double second = -1.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (i != best && v[i] > second) second = v[i];
    return {v[best], second};
}

}  // namespace detail

// 1 - p_(1); ranges over [0, 1 - 1/C].
inline UncertaintyScore least_confidence(const ProbabilityVector& p) {
    require_valid(p);
    const auto [top, second] = detail::top_two(p.probs);
    (void)second;
    return {1.0 - top, UncertaintyMethod::LeastConfident};
}

// 1 - (p_(1) - p_(2)); ranges over [0, 1].
inline UncertaintyScore margin(const ProbabilityVector& p) {
    require_valid(p);
    const auto [top, second] = detail::top_two(p.probs);
    return {1.0 - (top - second), UncertaintyMethod::Margin};
}

// -p_(1) / max(p_(2), 1e-12); always <= -1, a tie giving exactly -1. The
// epsilon floor keeps a zero runner-up finite while preserving the ordering.
inline UncertaintyScore ratio(const ProbabilityVector& p) {
    require_valid(p);
    const auto [top, second] = detail::top_two(p.probs);
    return {-top / std::max(second, 1e-12), UncertaintyMethod::Ratio};
}

// Shannon entropy, natural log, 0*ln 0 := 0; ranges over [0, ln C].
inline UncertaintyScore entropy(const ProbabilityVector& p) {
    require_valid(p);
    double h = 0.0;
    for (double q : p.probs)
        if (q > 0.0) h -= q * std::log(q);
    return {h, UncertaintyMethod::Entropy};
}

inline UncertaintyScore score(const ProbabilityVector& p, UncertaintyMethod method) {
    switch (method) {
        case UncertaintyMethod::LeastConfident: return least_confidence(p);
        case UncertaintyMethod::Margin: return margin(p);
        case UncertaintyMethod::Ratio: return ratio(p);
        case UncertaintyMethod::Entropy: return entropy(p);
    }
    throw std::invalid_argument("unknown uncertainty method");
}

// Scores every pool instance with the fitted model: logits -> (optionally
// temperature-scaled) softmax -> method score. Output preserves pool order.
inline std::vector<ScoredInstance> score_pool(const Classifier& model, const Dataset& ds,
                                              const IndexSet& pool_idx,
                                              UncertaintyMethod method,
                                              std::optional<double> temperature = std::nullopt) {
    if (!model.fitted()) throw std::logic_error("score_pool called before fit");
    if (temperature && !(*temperature > 0.0))
        throw std::invalid_argument("score_pool: temperature must be > 0");
    std::vector<ScoredInstance> out;
    out.reserve(pool_idx.size());
    for (std::size_t i : pool_idx) {
        if (i >= ds.size()) throw std::invalid_argument("score_pool: index out of range");
        const Instance& inst = ds.instances[i];
        Logits logits = model.predict_logits(inst);
        if (temperature)
            for (double& v : logits.values) v /= *temperature;
        const ProbabilityVector p = softmax(logits);
        ScoredInstance si;
        si.instance_id = inst.instance_id;
        try {
            si.score = score(p, method);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("instance " + std::to_string(inst.instance_id) + ": " +
                                        e.what());
        }
        si.predicted_label = static_cast<ClassLabel>(argmax(p.probs));
        si.true_label = inst.label;
        out.push_back(std::move(si));
    }
    return out;
}

}  // namespace alcurate
