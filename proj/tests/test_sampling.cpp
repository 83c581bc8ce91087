#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "alcurate/datagen.hpp"
#include "alcurate/rng.hpp"
#include "alcurate/sampling.hpp"

using namespace alcurate;

namespace {

ScoredInstance scored(std::int64_t id, double value, ClassLabel true_label = 0,
                      ClassLabel predicted = 0) {
    return {id, {value, UncertaintyMethod::LeastConfident}, predicted, true_label};
}

// Exhaustive re-implementation of two-phase selection used as the oracle:
// plain loops, no shared code with the library version.
std::vector<std::int64_t> brute_force_two_phase(
    const std::vector<ScoredInstance>& scored,
    const std::unordered_map<std::int64_t, SubjectId>& subject_of, std::size_t k) {
    std::map<ClassLabel, std::vector<const ScoredInstance*>> by_class;
    for (const auto& si : scored) by_class[si.true_label].push_back(&si);

    ClassLabel winner = -1;
    double winner_mean = 0.0;
    for (const auto& [cls, items] : by_class) {
        double mean = 0.0;
        for (const auto* si : items) mean += si->score.value;
        mean /= static_cast<double>(items.size());
        if (winner == -1 || mean > winner_mean) {
            winner = cls;
            winner_mean = mean;
        }
    }

    std::map<SubjectId, std::vector<double>> subject_scores;
    for (const auto* si : by_class[winner])
        subject_scores[subject_of.at(si->instance_id)].push_back(si->score.value);
    std::vector<std::pair<double, SubjectId>> ranked;
    for (const auto& [sub, values] : subject_scores) {
        double mean = 0.0;
        for (double v : values) mean += v;
        ranked.emplace_back(mean / static_cast<double>(values.size()), sub);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    std::set<SubjectId> chosen;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) chosen.insert(ranked[i].second);
    std::vector<std::int64_t> moved;
    for (const auto& si : scored)
        if (chosen.count(subject_of.at(si.instance_id))) moved.push_back(si.instance_id);
    return moved;
}

}  // namespace

TEST_CASE("instance top-k selection") {
    SECTION("picks the highest scores") {
        const auto d = select_instances_topk({scored(0, 0.9), scored(1, 0.5), scored(2, 0.1)}, 2);
        CHECK(d.moved_instance_ids == std::vector<std::int64_t>{0, 1});
        CHECK(d.moved_subjects.empty());
        CHECK(d.strategy == SamplingMode::Instance);
    }
    SECTION("k beyond the pool takes everything") {
        const auto d = select_instances_topk({scored(5, 0.2), scored(9, 0.4)}, 100);
        CHECK(d.moved_instance_ids.size() == 2);
    }
    SECTION("score tie breaks to the lower instance id") {
        const auto d = select_instances_topk({scored(7, 0.5), scored(3, 0.5)}, 1);
        CHECK(d.moved_instance_ids == std::vector<std::int64_t>{3});
    }
    SECTION("empty scored list rejected") {
        CHECK_THROWS_AS(select_instances_topk({}, 1), std::invalid_argument);
    }
}

TEST_CASE("two-phase subject selection") {
    SECTION("six-instance toy pool") {
        // class 0: s1 {0.9, 0.9}, s2 {0.7, 0.7} -> mean 0.8; class 1: s3 {0.2, 0.2}.
        const std::vector<ScoredInstance> pool = {
            scored(0, 0.9, 0), scored(1, 0.9, 0), scored(2, 0.7, 0),
            scored(3, 0.7, 0), scored(4, 0.2, 1), scored(5, 0.2, 1)};
        const std::unordered_map<std::int64_t, SubjectId> subject_of = {
            {0, "s1"}, {1, "s1"}, {2, "s2"}, {3, "s2"}, {4, "s3"}, {5, "s3"}};
        const auto d = select_subjects_two_phase(pool, subject_of, 1);
        CHECK(d.target_class == 0);
        CHECK(d.moved_subjects == std::vector<SubjectId>{"s1"});
        CHECK(d.moved_instance_ids == std::vector<std::int64_t>{0, 1});
        CHECK(d.strategy == SamplingMode::Subject);
    }
    SECTION("saturation within the winning class") {
        const std::vector<ScoredInstance> pool = {scored(0, 0.4, 1), scored(1, 0.5, 1)};
        const std::unordered_map<std::int64_t, SubjectId> subject_of = {{0, "only"},
                                                                        {1, "only"}};
        const auto d = select_subjects_two_phase(pool, subject_of, 2);
        CHECK(d.moved_subjects == std::vector<SubjectId>{"only"});
        CHECK(d.moved_instance_ids.size() == 2);
    }
    SECTION("full tie falls to class 0 and the lexicographically first subject") {
        const std::vector<ScoredInstance> pool = {scored(0, 0.5, 1), scored(1, 0.5, 0),
                                                  scored(2, 0.5, 0)};
        const std::unordered_map<std::int64_t, SubjectId> subject_of = {
            {0, "aa"}, {1, "zz"}, {2, "bb"}};
        const auto d = select_subjects_two_phase(pool, subject_of, 1);
        CHECK(d.target_class == 0);
        CHECK(d.moved_subjects == std::vector<SubjectId>{"bb"});
    }
    SECTION("predicted-label grouping can fall through to the next class") {
        // Both instances are predicted class 1, but no pool subject has true
        // class 1, so class 0 (the runner-up group is empty) must win.
        const std::vector<ScoredInstance> pool = {scored(0, 0.9, 0, 1), scored(1, 0.8, 0, 1)};
        const std::unordered_map<std::int64_t, SubjectId> subject_of = {{0, "a"}, {1, "a"}};
        const auto d =
            select_subjects_two_phase(pool, subject_of, 1, Phase1Grouping::PredictedLabel);
        CHECK(d.target_class == 0);
        CHECK(d.moved_subjects == std::vector<SubjectId>{"a"});
    }
    SECTION("empty scored list rejected") {
        CHECK_THROWS_AS(select_subjects_two_phase({}, {}, 1), std::invalid_argument);
    }
    SECTION("missing subject mapping rejected") {
        CHECK_THROWS_AS(select_subjects_two_phase({scored(0, 0.5)}, {}, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("two-phase selection matches exhaustive brute force") {
    Rng rng(2025);
    for (int trial = 0; trial < 60; ++trial) {
        const int num_classes = 2 + static_cast<int>(rng.uniform_below(3));
        const std::size_t n = 4 + rng.uniform_below(27);
        std::vector<ScoredInstance> pool;
        std::unordered_map<std::int64_t, SubjectId> subject_of;
        std::map<SubjectId, ClassLabel> subject_class;
        for (std::size_t i = 0; i < n; ++i) {
            const int subject_num = static_cast<int>(rng.uniform_below(8));
            const SubjectId sub = "s" + std::to_string(subject_num);
            ClassLabel cls;
            if (subject_class.count(sub)) {
                cls = subject_class[sub];
            } else {
                cls = static_cast<ClassLabel>(
                    rng.uniform_below(static_cast<std::uint64_t>(num_classes)));
                subject_class[sub] = cls;
            }
            // Quantized scores so crafted ties appear regularly.
            const double value = static_cast<double>(rng.uniform_below(5)) / 4.0;
            pool.push_back(scored(static_cast<std::int64_t>(i), value, cls));
            subject_of[static_cast<std::int64_t>(i)] = sub;
        }
        const std::size_t k = 1 + rng.uniform_below(3);
        const auto expected = brute_force_two_phase(pool, subject_of, k);
        const auto got = select_subjects_two_phase(pool, subject_of, k);
        CHECK(got.moved_instance_ids == expected);
    }
}

TEST_CASE("transfers conserve instances and keep subjects whole") {
    GeneratorSpec s;
    s.num_classes = 3;
    s.subjects_per_class = {4, 3, 3};
    s.instances_per_subject = 5;
    const auto ds = generate(s);
    auto part = split_by_subject(ds, 0.25, 1);
    part = select_balanced_seed(part, ds, 1, 2);

    std::unordered_map<std::int64_t, SubjectId> subject_of;
    for (const auto& inst : ds.instances) subject_of[inst.instance_id] = inst.subject;

    Rng rng(3);
    int transfers = 0;
    while (!part.pool.empty()) {
        std::vector<ScoredInstance> pool_scores;
        for (std::size_t i : part.pool)
            pool_scores.push_back(scored(ds.instances[i].instance_id, rng.uniform(),
                                         ds.instances[i].label));
        const std::size_t pool_before = part.pool.size();
        const auto d = select_subjects_two_phase(pool_scores, subject_of, 1);
        part = apply_transfer(part, ds, d);
        CHECK(part.pool.size() + d.moved_instance_ids.size() == pool_before);
        validate_partition(part, ds, true);  // subject closure after every move
        ++transfers;
        REQUIRE(transfers < 100);
    }
    CHECK(part.pool.empty());
}

TEST_CASE("instance transfers exhaust the pool in ceil(pool/k) steps") {
    GeneratorSpec s;
    s.num_classes = 2;
    s.subjects_per_class = {3, 3};
    s.instances_per_subject = 4;
    const auto ds = generate(s);
    auto part = split_by_subject(ds, 0.34, 1);
    part = select_balanced_seed(part, ds, 1, 2);

    const std::size_t k = 3;
    const std::size_t expected_steps = (part.pool.size() + k - 1) / k;
    Rng rng(9);
    std::size_t steps = 0;
    while (!part.pool.empty()) {
        std::vector<ScoredInstance> pool_scores;
        for (std::size_t i : part.pool)
            pool_scores.push_back(
                scored(ds.instances[i].instance_id, rng.uniform(), ds.instances[i].label));
        part = apply_transfer(part, ds, select_instances_topk(pool_scores, k));
        ++steps;
        REQUIRE(steps <= expected_steps);
    }
    CHECK(steps == expected_steps);
}

TEST_CASE("apply_transfer rejects ids missing from the pool") {
    GeneratorSpec s;
    s.num_classes = 2;
    s.subjects_per_class = {3, 3};
    s.instances_per_subject = 2;
    const auto ds = generate(s);
    auto part = split_by_subject(ds, 0.34, 1);
    TransferDecision d;
    d.moved_instance_ids = {ds.instances[part.test.front()].instance_id};
    CHECK_THROWS_AS(apply_transfer(part, ds, d), DataError);
}

TEST_CASE("random undersampling") {
    GeneratorSpec s;
    s.num_classes = 4;
    s.subjects_per_class = {8, 5, 5, 6};
    s.instances_per_subject = 20;
    const auto ds = generate(s);
    std::vector<SubjectId> all_subjects;
    {
        std::set<SubjectId> seen;
        for (const auto& inst : ds.instances) seen.insert(inst.subject);
        all_subjects.assign(seen.begin(), seen.end());
    }

    SECTION("four subjects per class at twenty instances each") {
        const auto part = random_undersample(ds, all_subjects, 4, 7);
        validate_partition(part, ds, true);
        CHECK(part.train.size() == 320);
        CHECK(ds.subject_counts(part.train) == std::vector<std::int64_t>{4, 4, 4, 4});
    }
    SECTION("deterministic per seed") {
        const auto a = random_undersample(ds, all_subjects, 3, 11);
        const auto b = random_undersample(ds, all_subjects, 3, 11);
        CHECK(a.train == b.train);
    }
    SECTION("taking every available subject is the degenerate full-data case") {
        const auto part = random_undersample(ds, all_subjects, 5, 1);
        CHECK(ds.subject_counts(part.train) == std::vector<std::int64_t>{5, 5, 5, 5});
    }
    SECTION("insufficient subjects rejected") {
        CHECK_THROWS_AS(random_undersample(ds, all_subjects, 6, 1), ConfigError);
    }
}

TEST_CASE("oversample multipliers") {
    GeneratorSpec s;
    s.num_classes = 4;
    s.subjects_per_class = {4, 3, 3, 3};
    s.instances_per_subject = 2;
    const auto ds = generate(s);
    IndexSet all(ds.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    SECTION("factor applies to the minority classes only") {
        CHECK(build_oversample_multipliers(ds, all, 2, {1, 2}) ==
              std::vector<int>{1, 2, 2, 1});
    }
    SECTION("no minority classes is the identity") {
        CHECK(build_oversample_multipliers(ds, all, 3, {}) == std::vector<int>{1, 1, 1, 1});
    }
    SECTION("factors outside {2,3} need the override") {
        CHECK_THROWS_AS(build_oversample_multipliers(ds, all, 5, {1}), ConfigError);
        CHECK(build_oversample_multipliers(ds, all, 5, {1}, true) ==
              std::vector<int>{1, 5, 1, 1});
    }
    SECTION("unknown minority class rejected") {
        CHECK_THROWS_AS(build_oversample_multipliers(ds, all, 2, {7}), ConfigError);
    }
}
