#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "alcurate/dataset.hpp"
#include "alcurate/errors.hpp"
#include "alcurate/probability.hpp"
#include "alcurate/rng.hpp"

namespace alcurate {

struct TrainSettings {
    int epochs = 30;
    double learning_rate = 0.05;
    int batch_size = 32;
    // 0 = plain multinomial logistic regression, > 0 = one tanh hidden layer.
    int hidden_width = 32;
    // Per-class cross-entropy weights; empty = uniform.
    std::optional<std::vector<double>> class_weights;
    // Per-class appearance multipliers per epoch; empty = 1 for every class.
    std::optional<std::vector<int>> oversample_multipliers;
    // Additive N(0, sigma^2) feature jitter on duplicated appearances.
    double oversample_jitter_sigma = 0.1;
    std::uint64_t rng_seed = 0;

    void validate(int num_classes) const {
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
        if (hidden_width < 0) throw ConfigError("hidden_width must be >= 0");
        if (oversample_jitter_sigma < 0.0)
            throw ConfigError("oversample_jitter_sigma must be >= 0");
        if (class_weights) {
            if (class_weights->size() != static_cast<std::size_t>(num_classes))
                throw ConfigError("class_weights has length " +
                                  std::to_string(class_weights->size()) + ", expected " +
                                  std::to_string(num_classes));
            for (double w : *class_weights)
                if (!(w > 0.0)) throw ConfigError("class weights must be > 0");
        }
        if (oversample_multipliers) {
            if (oversample_multipliers->size() != static_cast<std::size_t>(num_classes))
                throw ConfigError("oversample_multipliers has length " +
                                  std::to_string(oversample_multipliers->size()) +
                                  ", expected " + std::to_string(num_classes));
            for (int m : *oversample_multipliers)
                if (m < 1) throw ConfigError("oversample multipliers must be >= 1");
        }
    }
};

// The pluggable model contract the experiment loop trains and queries.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual void fit(const Dataset& ds, const IndexSet& train_idx,
                     const TrainSettings& settings) = 0;
    virtual Logits predict_logits(const Instance& inst) const = 0;
    virtual bool fitted() const = 0;
};

// --- feed-forward network internals -----------------------------------------
//
// Parameter layout, flat:
//   hidden > 0:  W1[h][d], b1[h], W2[C][h], b2[C]
//   hidden == 0: W[C][d], b[C]

struct MlpShape {
    std::size_t input_dim = 0;
    int hidden_width = 0;
    int num_classes = 0;

    std::size_t param_count() const {
        const auto d = input_dim;
        const auto h = static_cast<std::size_t>(hidden_width);
        const auto c = static_cast<std::size_t>(num_classes);
        return h > 0 ? h * d + h + c * h + c : c * d + c;
    }
};

inline std::vector<double> init_mlp_params(const MlpShape& shape, Rng& rng) {
    std::vector<double> params(shape.param_count(), 0.0);
    const auto d = shape.input_dim;
    const auto h = static_cast<std::size_t>(shape.hidden_width);
    const auto c = static_cast<std::size_t>(shape.num_classes);
    if (h > 0) {
        const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
        for (std::size_t i = 0; i < h * d; ++i) params[i] = rng.normal(0.0, s1);
        const double s2 = 1.0 / std::sqrt(static_cast<double>(h));
        for (std::size_t i = 0; i < c * h; ++i) params[h * d + h + i] = rng.normal(0.0, s2);
    } else {
        const double s = 1.0 / std::sqrt(static_cast<double>(d));
        for (std::size_t i = 0; i < c * d; ++i) params[i] = rng.normal(0.0, s);
    }
    return params;
}

inline Logits mlp_forward(const MlpShape& shape, std::span<const double> params,
                          std::span<const double> x) {
    const auto d = shape.input_dim;
    const auto h = static_cast<std::size_t>(shape.hidden_width);
    const auto c = static_cast<std::size_t>(shape.num_classes);
    Logits out;
    out.values.assign(c, 0.0);
    if (h > 0) {
        const double* w1 = params.data();
        const double* b1 = w1 + h * d;
        const double* w2 = b1 + h;
        const double* b2 = w2 + c * h;
        std::vector<double> a(h);
        for (std::size_t j = 0; j < h; ++j) {
            double z = b1[j];
            for (std::size_t k = 0; k < d; ++k) z += w1[j * d + k] * x[k];
            a[j] = std::tanh(z);
        }
        for (std::size_t i = 0; i < c; ++i) {
            double z = b2[i];
            for (std::size_t j = 0; j < h; ++j) z += w2[i * h + j] * a[j];
            out.values[i] = z;
        }
    } else {
        const double* w = params.data();
        const double* b = w + c * d;
        for (std::size_t i = 0; i < c; ++i) {
            double z = b[i];
            for (std::size_t k = 0; k < d; ++k) z += w[i * d + k] * x[k];
            out.values[i] = z;
        }
    }
    return out;
}

// Weighted cross-entropy over one batch, normalized by the batch weight sum:
//   L = sum_i w_{y_i} * (-log p_{y_i}(x_i)) / sum_i w_{y_i}
// Uniform weight rescaling therefore cancels exactly. When `grad` is given it
// receives dL/dparams in the flat layout above.
inline double mlp_loss_and_grad(const MlpShape& shape, std::span<const double> params,
                                const std::vector<std::vector<double>>& xs,
                                const std::vector<ClassLabel>& ys,
                                const std::vector<double>& weights,
                                std::vector<double>* grad) {
    if (xs.empty() || xs.size() != ys.size() || xs.size() != weights.size())
        throw std::invalid_argument("mlp_loss_and_grad: inconsistent batch");
    const auto d = shape.input_dim;
    const auto h = static_cast<std::size_t>(shape.hidden_width);
    const auto c = static_cast<std::size_t>(shape.num_classes);
    if (grad) grad->assign(shape.param_count(), 0.0);

    double weight_sum = 0.0;
    for (double w : weights) weight_sum += w;

    double loss = 0.0;
    std::vector<double> hidden(h), dlogits(c), dhidden(h);
    for (std::size_t n = 0; n < xs.size(); ++n) {
        const std::vector<double>& x = xs[n];
        const auto y = static_cast<std::size_t>(ys[n]);
        const double wn = weights[n] / weight_sum;

        Logits logits;
        if (h > 0) {
            const double* w1 = params.data();
            const double* b1 = w1 + h * d;
            const double* w2 = b1 + h;
            const double* b2 = w2 + c * h;
            for (std::size_t j = 0; j < h; ++j) {
                double z = b1[j];
                for (std::size_t k = 0; k < d; ++k) z += w1[j * d + k] * x[k];
                hidden[j] = std::tanh(z);
            }
            logits.values.assign(c, 0.0);
            for (std::size_t i = 0; i < c; ++i) {
                double z = b2[i];
                for (std::size_t j = 0; j < h; ++j) z += w2[i * h + j] * hidden[j];
                logits.values[i] = z;
            }
        } else {
            logits = mlp_forward(shape, params, x);
        }

        const ProbabilityVector p = softmax(logits);
        loss -= wn * std::log(std::max(p.probs[y], 1e-300));
        if (!grad) continue;

        for (std::size_t i = 0; i < c; ++i)
            dlogits[i] = wn * (p.probs[i] - (i == y ? 1.0 : 0.0));

        if (h > 0) {
            const double* w2 = params.data() + h * d + h;
            double* gw1 = grad->data();
            double* gb1 = gw1 + h * d;
            double* gw2 = gb1 + h;
            double* gb2 = gw2 + c * h;
            for (std::size_t j = 0; j < h; ++j) {
                double acc = 0.0;
                for (std::size_t i = 0; i < c; ++i) acc += dlogits[i] * w2[i * h + j];
                dhidden[j] = acc * (1.0 - hidden[j] * hidden[j]);
            }
            for (std::size_t i = 0; i < c; ++i) {
                gb2[i] += dlogits[i];
                for (std::size_t j = 0; j < h; ++j) gw2[i * h + j] += dlogits[i] * hidden[j];
            }
            for (std::size_t j = 0; j < h; ++j) {
                gb1[j] += dhidden[j];
                for (std::size_t k = 0; k < d; ++k) gw1[j * d + k] += dhidden[j] * x[k];
            }
        } else {
            double* gw = grad->data();
            double* gb = gw + c * d;
            for (std::size_t i = 0; i < c; ++i) {
                gb[i] += dlogits[i];
                for (std::size_t k = 0; k < d; ++k) gw[i * d + k] += dlogits[i] * x[k];
            }
        }
    }
    return loss;
}

// Built-in reference model: multinomial logistic regression with an optional
// tanh hidden layer, trained by seeded mini-batch gradient descent. Fully
// deterministic for fixed (dataset, indices, settings).
class ReferenceClassifier final : public Classifier {
public:
    void fit(const Dataset& ds, const IndexSet& train_idx,
             const TrainSettings& settings) override {
        settings.validate(ds.num_classes);
        if (train_idx.empty()) throw ConfigError("fit: empty train index set");
        for (std::size_t i : train_idx)
            if (i >= ds.size()) throw ConfigError("fit: train index out of range");
        if (ds.num_classes < 2) throw ConfigError("fit: dataset needs at least 2 classes");

        shape_ = MlpShape{ds.feature_dim, settings.hidden_width, ds.num_classes};
        Rng rng(settings.rng_seed);
        params_ = init_mlp_params(shape_, rng);

        // (position, copy) appearances; copy > 0 marks an oversampled duplicate.
        std::vector<std::pair<std::size_t, int>> base_items;
        for (std::size_t i : train_idx) {
            int mult = 1;
            if (settings.oversample_multipliers)
                mult = (*settings.oversample_multipliers)[static_cast<std::size_t>(
                    ds.instances[i].label)];
            for (int copy = 0; copy < mult; ++copy) base_items.emplace_back(i, copy);
        }

        std::vector<std::vector<double>> xs;
        std::vector<ClassLabel> ys;
        std::vector<double> ws;
        std::vector<double> grad;
        for (int epoch = 0; epoch < settings.epochs; ++epoch) {
            std::vector<std::pair<std::size_t, int>> items = base_items;
            rng.shuffle(items);
            for (std::size_t start = 0; start < items.size();
                 start += static_cast<std::size_t>(settings.batch_size)) {
                const std::size_t stop =
                    std::min(items.size(), start + static_cast<std::size_t>(settings.batch_size));
                xs.clear();
                ys.clear();
                ws.clear();
                for (std::size_t n = start; n < stop; ++n) {
                    const auto [idx, copy] = items[n];
                    const Instance& inst = ds.instances[idx];
                    xs.push_back(inst.features);
                    if (copy > 0 && settings.oversample_jitter_sigma > 0.0)
                        for (double& f : xs.back())
                            f += rng.normal(0.0, settings.oversample_jitter_sigma);
                    ys.push_back(inst.label);
                    ws.push_back(settings.class_weights
                                     ? (*settings.class_weights)[static_cast<std::size_t>(
                                           inst.label)]
                                     : 1.0);
                }
                mlp_loss_and_grad(shape_, params_, xs, ys, ws, &grad);
                for (std::size_t i = 0; i < params_.size(); ++i)
                    params_[i] -= settings.learning_rate * grad[i];
            }
        }
        fitted_ = true;
    }

    Logits predict_logits(const Instance& inst) const override {
        if (!fitted_) throw std::logic_error("predict_logits called before fit");
        if (inst.features.size() != shape_.input_dim)
            throw std::invalid_argument("predict_logits: feature dimension mismatch");
        return mlp_forward(shape_, params_, inst.features);
    }

    bool fitted() const override { return fitted_; }

    const std::vector<double>& parameters() const { return params_; }
    const MlpShape& shape() const { return shape_; }

private:
    MlpShape shape_;
    std::vector<double> params_;
    bool fitted_ = false;
};

struct Prediction {
    std::int64_t instance_id = 0;
    ProbabilityVector probs;
    Logits logits;
};

// One prediction per index, order matching idx. Logits are retained for
// temperature calibration.
inline std::vector<Prediction> predict_proba(const Classifier& model, const Dataset& ds,
                                             const IndexSet& idx) {
    if (!model.fitted()) throw std::logic_error("predict_proba called before fit");
    std::vector<Prediction> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) {
        if (i >= ds.size()) throw std::invalid_argument("predict_proba: index out of range");
        Prediction pred;
        pred.instance_id = ds.instances[i].instance_id;
        pred.logits = model.predict_logits(ds.instances[i]);
        pred.probs = softmax(pred.logits);
        out.push_back(std::move(pred));
    }
    return out;
}

// w_c = N / (C * n_c) over the train region; balanced counts give all ones.
inline std::vector<double> inverse_frequency_weights(const Dataset& ds,
                                                     const IndexSet& train_idx) {
    const auto counts = ds.class_counts(train_idx);
    for (int c = 0; c < ds.num_classes; ++c)
        if (counts[static_cast<std::size_t>(c)] == 0)
            throw ConfigError("class " + std::to_string(c) +
                              " has no train instances; inverse-frequency weighting undefined");
    const double n = static_cast<double>(train_idx.size());
    std::vector<double> w(static_cast<std::size_t>(ds.num_classes));
    for (int c = 0; c < ds.num_classes; ++c)
        w[static_cast<std::size_t>(c)] =
            n / (static_cast<double>(ds.num_classes) *
                 static_cast<double>(counts[static_cast<std::size_t>(c)]));
    return w;
}

}  // namespace alcurate
