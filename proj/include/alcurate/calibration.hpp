#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "alcurate/dataset.hpp"
#include "alcurate/probability.hpp"

namespace alcurate {

inline constexpr double kTemperatureMin = 0.05;
inline constexpr double kTemperatureMax = 20.0;

struct CalibrationResult {
    double temperature = 1.0;
    double nll_before = 0.0;  // NLL at T = 1
    double nll_after = 0.0;   // NLL at the fitted temperature
    std::size_t fit_set_size = 0;
};

// softmax(logits / T). Scaling never moves the argmax.
inline ProbabilityVector apply_temperature(const Logits& logits, double temperature) {
    if (!(temperature > 0.0))
        throw std::invalid_argument("apply_temperature: temperature must be > 0");
    Logits scaled;
    scaled.values.reserve(logits.values.size());
    for (double v : logits.values) scaled.values.push_back(v / temperature);
    return softmax(scaled);
}

namespace detail {

// Mean NLL of the scaled posteriors via log-sum-exp; exact, no clamping.
inline double nll_at_temperature(const std::vector<std::pair<Logits, ClassLabel>>& pairs,
                                 double temperature) {
    double sum = 0.0;
    for (const auto& [logits, y] : pairs) {
        const std::size_t c = logits.values.size();
        if (y < 0 || static_cast<std::size_t>(y) >= c)
            throw std::invalid_argument("fit_temperature: label outside the logit vector");
        double m = logits.values[0];
        for (double v : logits.values) m = std::max(m, v);
        double lse = 0.0;
        for (double v : logits.values) lse += std::exp((v - m) / temperature);
        sum += std::log(lse) - (logits.values[static_cast<std::size_t>(y)] - m) / temperature;
    }
    return sum / static_cast<double>(pairs.size());
}

// Golden-section minimization of f over [lo, hi] in log-space, run until the
// bracket is narrower than `tol` in T itself.
template <typename F>
double golden_section_log(F f, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::log(lo), b = std::log(hi);
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(std::exp(c));
    double fd = f(std::exp(d));
    for (int it = 0; it < 300 && std::exp(b) - std::exp(a) > tol; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(std::exp(d));
        }
    }
    return std::exp((a + b) / 2.0);
}

}  // namespace detail

// Fits T* = argmin NLL(softmax(logits/T)) over [0.05, 20] by golden-section
// search (absolute tolerance 1e-4 in T). NLL(T) is smooth and in practice
// unimodal; a 101-point log-spaced grid scan guards the search against local
// minima, and T = 1 is always a candidate, so nll_after <= nll_before holds
// unconditionally.
inline CalibrationResult fit_temperature(
    const std::vector<std::pair<Logits, ClassLabel>>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("fit_temperature: empty fit set");
    const auto nll_at = [&pairs](double t) { return detail::nll_at_temperature(pairs, t); };

    double best_t = detail::golden_section_log(nll_at, kTemperatureMin, kTemperatureMax, 1e-4);
    double best_nll = nll_at(best_t);

    const int grid_points = 101;
    const double log_lo = std::log(kTemperatureMin);
    const double log_hi = std::log(kTemperatureMax);
    int best_grid = -1;
    for (int i = 0; i < grid_points; ++i) {
        const double t =
            std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                                  static_cast<double>(grid_points - 1));
        const double v = nll_at(t);
        if (v < best_nll - 1e-12) {
            best_nll = v;
            best_t = t;
            best_grid = i;
        }
    }
    if (best_grid >= 0) {
        // The grid found a better basin; refine inside its neighbor bracket.
        const auto grid_t = [&](int i) {
            return std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                                         static_cast<double>(grid_points - 1));
        };
        const double lo = grid_t(std::max(0, best_grid - 1));
        const double hi = grid_t(std::min(grid_points - 1, best_grid + 1));
        const double refined = detail::golden_section_log(nll_at, lo, hi, 1e-4);
        const double v = nll_at(refined);
        if (v < best_nll) {
            best_nll = v;
            best_t = refined;
        }
    }

    CalibrationResult result;
    result.nll_before = nll_at(1.0);
    if (result.nll_before <= best_nll) {
        best_t = 1.0;
        best_nll = result.nll_before;
    }
    result.temperature = std::clamp(best_t, kTemperatureMin, kTemperatureMax);
    result.nll_after = best_nll;
    result.fit_set_size = pairs.size();
    return result;
}

}  // namespace alcurate
