#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "alcurate/dataset.hpp"
#include "alcurate/errors.hpp"
#include "alcurate/rng.hpp"

namespace alcurate {

// Synthetic grouped-imbalanced dataset: class means sit on a seeded random
// orthogonal frame at equal pairwise distance; every subject draws one offset
// shared by its instances, which then get independent within-subject noise.
// Default counts mirror a 40:4:4:10 subject imbalance.
struct GeneratorSpec {
    int num_classes = 4;
    std::size_t feature_dim = 16;
    std::vector<int> subjects_per_class = {40, 4, 4, 10};
    int instances_per_subject = 20;
    double class_separation = 4.0;
    double subject_sigma = 1.5;
    double noise_sigma = 0.5;
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
        if (feature_dim < static_cast<std::size_t>(num_classes))
            throw ConfigError("feature_dim must be >= num_classes to place an orthogonal "
                              "frame of class means");
        if (subjects_per_class.size() != static_cast<std::size_t>(num_classes))
            throw ConfigError("subjects_per_class has length " +
                              std::to_string(subjects_per_class.size()) + ", expected " +
                              std::to_string(num_classes));
        for (int n : subjects_per_class)
            if (n < 1) throw ConfigError("subjects_per_class entries must be >= 1");
        if (instances_per_subject < 1)
            throw ConfigError("instances_per_subject must be >= 1");
        if (!(class_separation > 0.0)) throw ConfigError("class_separation must be > 0");
        if (subject_sigma < 0.0 || noise_sigma < 0.0)
            throw ConfigError("sigmas must be >= 0");
    }
};

namespace detail {

// Orthonormal columns via Gram-Schmidt on seeded Gaussian draws.
inline std::vector<std::vector<double>> orthonormal_frame(std::size_t dim, int count, Rng& rng) {
    std::vector<std::vector<double>> frame;
    frame.reserve(static_cast<std::size_t>(count));
    while (frame.size() < static_cast<std::size_t>(count)) {
        std::vector<double> v(dim);
        for (double& x : v) x = rng.normal();
        for (const auto& u : frame) {
            double dot = 0.0;
            for (std::size_t i = 0; i < dim; ++i) dot += v[i] * u[i];
            for (std::size_t i = 0; i < dim; ++i) v[i] -= dot * u[i];
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-9) continue;  // degenerate draw, retry
        for (double& x : v) x /= norm;
        frame.push_back(std::move(v));
    }
    return frame;
}

}  // namespace detail

inline Dataset generate(const GeneratorSpec& spec) {
    spec.validate();
    Rng rng(spec.rng_seed);

    // Orthonormal directions scaled so every pair of class means is exactly
    // class_separation apart: |s*u_i - s*u_j| = s*sqrt(2).
    const double scale = spec.class_separation / std::sqrt(2.0);
    const auto frame = detail::orthonormal_frame(spec.feature_dim, spec.num_classes, rng);

    Dataset ds;
    ds.num_classes = spec.num_classes;
    ds.feature_dim = spec.feature_dim;
    std::int64_t next_id = 0;
    char subject_name[32];
    for (int c = 0; c < spec.num_classes; ++c) {
        for (int s = 0; s < spec.subjects_per_class[static_cast<std::size_t>(c)]; ++s) {
            std::snprintf(subject_name, sizeof(subject_name), "c%d_s%04d", c, s);
            std::vector<double> offset(spec.feature_dim);
            for (double& x : offset) x = rng.normal(0.0, spec.subject_sigma);
            for (int i = 0; i < spec.instances_per_subject; ++i) {
                Instance inst;
                inst.instance_id = next_id++;
                inst.subject = subject_name;
                inst.label = c;
                inst.features.resize(spec.feature_dim);
                for (std::size_t k = 0; k < spec.feature_dim; ++k)
                    inst.features[k] = scale * frame[static_cast<std::size_t>(c)][k] +
                                       offset[k] + rng.normal(0.0, spec.noise_sigma);
                ds.instances.push_back(std::move(inst));
            }
        }
    }
    ds.validate();
    return ds;
}

}  // namespace alcurate
