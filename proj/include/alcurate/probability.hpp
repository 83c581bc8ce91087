#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace alcurate {

// Raw classifier scores, one per class.
struct Logits {
    std::vector<double> values;
};

// Softmax posterior: entries >= 0, summing to 1 within 1e-6.
struct ProbabilityVector {
    std::vector<double> probs;

    std::size_t size() const { return probs.size(); }

    bool valid() const {
        if (probs.empty()) return false;
        double sum = 0.0;
        for (double p : probs) {
            if (!std::isfinite(p) || p < 0.0) return false;
            sum += p;
        }
        return std::abs(sum - 1.0) <= 1e-6;
    }
};

inline void require_valid(const ProbabilityVector& p, std::size_t min_classes = 2) {
    if (p.size() < min_classes)
        throw std::invalid_argument("probability vector needs at least " +
                                    std::to_string(min_classes) + " classes, got " +
                                    std::to_string(p.size()));
    if (!p.valid())
        throw std::invalid_argument("invalid probability vector (negative entry, non-finite "
                                    "value, or sum not within 1e-6 of 1)");
}

// Index of the largest entry; ties go to the lower index.
inline std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Max-shifted softmax; stable for logit magnitudes up to ~1e300.
inline ProbabilityVector softmax(const Logits& logits) {
    if (logits.values.empty()) throw std::invalid_argument("softmax of empty logits");
    for (double v : logits.values)
        if (!std::isfinite(v)) throw std::invalid_argument("softmax of non-finite logits");
    const double m = *std::max_element(logits.values.begin(), logits.values.end());
    ProbabilityVector out;
    out.probs.resize(logits.values.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.values.size(); ++i) {
        out.probs[i] = std::exp(logits.values[i] - m);
        sum += out.probs[i];
    }
    for (double& p : out.probs) p /= sum;
    return out;
}

}  // namespace alcurate
