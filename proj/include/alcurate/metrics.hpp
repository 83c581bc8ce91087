#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "alcurate/dataset.hpp"
#include "alcurate/probability.hpp"

namespace alcurate {

// Rows are true classes, columns are predicted classes.
struct ConfusionMatrix {
    std::vector<std::vector<std::int64_t>> counts;
    int num_classes = 0;

    std::int64_t total() const {
        std::int64_t t = 0;
        for (const auto& row : counts)
            for (std::int64_t c : row) t += c;
        return t;
    }

    std::int64_t trace() const {
        std::int64_t t = 0;
        for (int c = 0; c < num_classes; ++c)
            t += counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
        return t;
    }
};

inline ConfusionMatrix confusion(const std::vector<std::pair<ClassLabel, ClassLabel>>& pairs,
                                 int num_classes) {
    if (num_classes < 1) throw std::invalid_argument("confusion: num_classes must be >= 1");
    ConfusionMatrix cm;
    cm.num_classes = num_classes;
    cm.counts.assign(static_cast<std::size_t>(num_classes),
                     std::vector<std::int64_t>(static_cast<std::size_t>(num_classes), 0));
    for (const auto& [t, p] : pairs) {
        if (t < 0 || t >= num_classes || p < 0 || p >= num_classes)
            throw std::invalid_argument("confusion: label pair (" + std::to_string(t) + ", " +
                                        std::to_string(p) + ") outside [0, " +
                                        std::to_string(num_classes) + ")");
        ++cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }
    return cm;
}

inline double accuracy(const ConfusionMatrix& cm) {
    const std::int64_t total = cm.total();
    if (total == 0) throw std::invalid_argument("accuracy of an empty confusion matrix");
    return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

// How per-class F1 treats classes where precision + recall == 0.
enum class ZeroDivisionPolicy {
    Zero,  // count the class with F1 = 0 (strict; the default)
    Skip,  // drop classes absent from both truth and prediction from the mean
};

inline double macro_f1(const ConfusionMatrix& cm,
                       ZeroDivisionPolicy policy = ZeroDivisionPolicy::Zero) {
    if (cm.total() == 0) throw std::invalid_argument("macro_f1 of an empty confusion matrix");
    double sum = 0.0;
    int used = 0;
    for (int c = 0; c < cm.num_classes; ++c) {
        const std::size_t cs = static_cast<std::size_t>(c);
        std::int64_t tp = cm.counts[cs][cs];
        std::int64_t row = 0, col = 0;
        for (int j = 0; j < cm.num_classes; ++j) {
            row += cm.counts[cs][static_cast<std::size_t>(j)];
            col += cm.counts[static_cast<std::size_t>(j)][cs];
        }
        if (policy == ZeroDivisionPolicy::Skip && row == 0 && col == 0) continue;
        double f1 = 0.0;
        if (row > 0 && col > 0) {
            const double prec = static_cast<double>(tp) / static_cast<double>(col);
            const double rec = static_cast<double>(tp) / static_cast<double>(row);
            if (prec + rec > 0.0) f1 = 2.0 * prec * rec / (prec + rec);
        }
        sum += f1;
        ++used;
    }
    return used == 0 ? 0.0 : sum / static_cast<double>(used);
}

// Mean negative log-likelihood of the true class, probabilities clamped at 1e-15.
inline double nll(const std::vector<std::pair<ProbabilityVector, ClassLabel>>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("nll of an empty pair list");
    double sum = 0.0;
    for (const auto& [p, y] : pairs) {
        if (y < 0 || static_cast<std::size_t>(y) >= p.size())
            throw std::invalid_argument("nll: label " + std::to_string(y) +
                                        " outside the probability vector");
        sum -= std::log(std::max(p.probs[static_cast<std::size_t>(y)], 1e-15));
    }
    return sum / static_cast<double>(pairs.size());
}

}  // namespace alcurate
