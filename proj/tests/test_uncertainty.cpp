#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "alcurate/rng.hpp"
#include "alcurate/uncertainty.hpp"

using namespace alcurate;

namespace {

ProbabilityVector pv(std::vector<double> p) { return ProbabilityVector{std::move(p)}; }

std::vector<double> random_simplex(Rng& rng, std::size_t c) {
    std::vector<double> p(c);
    double sum = 0.0;
    for (double& x : p) {
        x = -std::log(1.0 - rng.uniform());
        sum += x;
    }
    for (double& x : p) x /= sum;
    return p;
}

// Naive formula evaluations used as the oracle.
double naive_score(std::vector<double> p, UncertaintyMethod m) {
    std::sort(p.begin(), p.end(), std::greater<>());
    switch (m) {
        case UncertaintyMethod::LeastConfident: return 1.0 - p[0];
        case UncertaintyMethod::Margin: return 1.0 - (p[0] - p[1]);
        case UncertaintyMethod::Ratio: return -p[0] / std::max(p[1], 1e-12);
        case UncertaintyMethod::Entropy: {
            double h = 0.0;
            for (double q : p)
                if (q > 0) h -= q * std::log(q);
            return h;
        }
    }
    return 0.0;
}

constexpr UncertaintyMethod kMethods[] = {UncertaintyMethod::LeastConfident,
                                          UncertaintyMethod::Margin, UncertaintyMethod::Ratio,
                                          UncertaintyMethod::Entropy};

}  // namespace

TEST_CASE("least confidence") {
    CHECK(least_confidence(pv({1, 0, 0, 0})).value == 0.0);
    CHECK(least_confidence(pv({0.25, 0.25, 0.25, 0.25})).value == Catch::Approx(0.75));
    CHECK(least_confidence(pv({0.7, 0.2, 0.1})).value == Catch::Approx(0.3));
}

TEST_CASE("margin") {
    CHECK(margin(pv({0.5, 0.5, 0, 0})).value == Catch::Approx(1.0));
    CHECK(margin(pv({1, 0, 0})).value == Catch::Approx(0.0));
    CHECK(margin(pv({0.6, 0.3, 0.1})).value == Catch::Approx(0.7));
}

TEST_CASE("ratio") {
    CHECK(ratio(pv({0.5, 0.5})).value == Catch::Approx(-1.0));
    CHECK(ratio(pv({0.6, 0.3, 0.1})).value == Catch::Approx(-2.0));
    // Zero runner-up hits the epsilon floor.
    CHECK(ratio(pv({1, 0, 0})).value == Catch::Approx(-1e12));
}

TEST_CASE("entropy") {
    CHECK(entropy(pv({1, 0, 0})).value == 0.0);
    CHECK(entropy(pv({0.25, 0.25, 0.25, 0.25})).value == Catch::Approx(std::log(4.0)).margin(1e-9));
    CHECK(entropy(pv({0.5, 0.5})).value == Catch::Approx(std::log(2.0)).margin(1e-9));
}

TEST_CASE("scorers reject invalid input") {
    for (const auto m : kMethods) {
        CHECK_THROWS_AS(score(pv({0.7}), m), std::invalid_argument);          // C < 2
        CHECK_THROWS_AS(score(pv({0.9, 0.3}), m), std::invalid_argument);     // bad sum
        CHECK_THROWS_AS(score(pv({1.2, -0.2}), m), std::invalid_argument);    // negative
    }
}

TEST_CASE("scorers match naive formula evaluation and stay in range") {
    Rng rng(101);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t c = std::vector<std::size_t>{2, 3, 4, 10}[rng.uniform_below(4)];
        const auto p = random_simplex(rng, c);
        for (const auto m : kMethods) {
            const double got = score(pv(p), m).value;
            const double want = naive_score(p, m);
            CHECK(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)));
        }
        CHECK(least_confidence(pv(p)).value >= 0.0);
        CHECK(least_confidence(pv(p)).value <= 1.0 - 1.0 / static_cast<double>(c) + 1e-12);
        CHECK(margin(pv(p)).value >= 0.0);
        CHECK(margin(pv(p)).value <= 1.0);
        CHECK(ratio(pv(p)).value <= -1.0 + 1e-12);
        CHECK(entropy(pv(p)).value >= 0.0);
        CHECK(entropy(pv(p)).value <= std::log(static_cast<double>(c)) + 1e-12);
    }
}

TEST_CASE("permutation invariance") {
    Rng rng(55);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = random_simplex(rng, 5);
        auto shuffled = p;
        rng.shuffle(shuffled);
        for (const auto m : kMethods)
            CHECK(score(pv(p), m).value == Catch::Approx(score(pv(shuffled), m).value)
                                               .epsilon(1e-12)
                                               .margin(1e-12));
    }
}

TEST_CASE("binary ranking equivalence") {
    // For C = 2 every method is a monotone function of the top probability,
    // so any pair of vectors is ordered identically by all four.
    Rng rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto a = random_simplex(rng, 2);
        const auto b = random_simplex(rng, 2);
        const double ref = score(pv(a), kMethods[0]).value - score(pv(b), kMethods[0]).value;
        for (const auto m : kMethods) {
            const double diff = score(pv(a), m).value - score(pv(b), m).value;
            if (ref > 0) CHECK(diff > 0);
            if (ref < 0) CHECK(diff < 0);
        }
    }
}

TEST_CASE("raising the top probability strictly lowers every score") {
    // Hold p_(2) fixed, move mass from the tail onto p_(1).
    Rng rng(91);
    int tested = 0;
    while (tested < 200) {
        auto p = random_simplex(rng, 4);
        std::sort(p.begin(), p.end(), std::greater<>());
        const double tail = p[2] + p[3];
        if (tail < 0.05) continue;
        const double delta = 0.5 * tail * rng.uniform(0.1, 0.9);
        auto q = p;
        q[0] += delta;
        const double scale = (tail - delta) / tail;
        q[2] *= scale;
        q[3] *= scale;
        for (const auto m : kMethods)
            CHECK(score(pv(q), m).value < score(pv(p), m).value);
        ++tested;
    }
}

TEST_CASE("score_pool") {
    // A fixed-logit stub model keeps the wiring observable.
    struct StubModel final : Classifier {
        void fit(const Dataset&, const IndexSet&, const TrainSettings&) override {}
        Logits predict_logits(const Instance& inst) const override {
            // Uncertainty grows with instance id.
            return Logits{{2.0 - 0.1 * static_cast<double>(inst.instance_id), 0.0, -1.0}};
        }
        bool fitted() const override { return true; }
    };

    Dataset ds;
    ds.num_classes = 3;
    ds.feature_dim = 1;
    for (int i = 0; i < 5; ++i)
        ds.instances.push_back({i, "s" + std::to_string(i), i % 3, {0.0}});

    StubModel model;
    SECTION("empty pool gives an empty list") {
        CHECK(score_pool(model, ds, {}, UncertaintyMethod::Entropy).empty());
    }
    SECTION("pool order is preserved and labels are recorded") {
        const auto scored = score_pool(model, ds, {3, 1, 4}, UncertaintyMethod::Margin);
        REQUIRE(scored.size() == 3);
        CHECK(scored[0].instance_id == 3);
        CHECK(scored[1].instance_id == 1);
        CHECK(scored[2].instance_id == 4);
        CHECK(scored[0].predicted_label == 0);
        CHECK(scored[0].true_label == 0);
        CHECK(scored[1].true_label == 1);
    }
    SECTION("temperature = 1 is a no-op") {
        const auto plain = score_pool(model, ds, {0, 1, 2}, UncertaintyMethod::Entropy);
        const auto scaled = score_pool(model, ds, {0, 1, 2}, UncertaintyMethod::Entropy, 1.0);
        for (std::size_t i = 0; i < plain.size(); ++i)
            CHECK(plain[i].score.value == scaled[i].score.value);
    }
    SECTION("least-confident scores stay in [0, 1 - 1/C]") {
        for (const auto& si : score_pool(model, ds, {0, 1, 2, 3, 4},
                                         UncertaintyMethod::LeastConfident)) {
            CHECK(si.score.value >= 0.0);
            CHECK(si.score.value <= 1.0 - 1.0 / 3.0 + 1e-12);
        }
    }
    SECTION("non-positive temperature rejected") {
        CHECK_THROWS_AS(score_pool(model, ds, {0}, UncertaintyMethod::Entropy, 0.0),
                        std::invalid_argument);
    }
}
