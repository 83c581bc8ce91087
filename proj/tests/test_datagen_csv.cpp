#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "alcurate/csv_io.hpp"
#include "alcurate/datagen.hpp"
#include "alcurate/rng.hpp"

using namespace alcurate;

namespace {

bool datasets_equal(const Dataset& a, const Dataset& b) {
    if (a.num_classes != b.num_classes || a.feature_dim != b.feature_dim ||
        a.instances.size() != b.instances.size())
        return false;
    for (std::size_t i = 0; i < a.instances.size(); ++i) {
        const Instance& x = a.instances[i];
        const Instance& y = b.instances[i];
        if (x.instance_id != y.instance_id || x.subject != y.subject || x.label != y.label ||
            x.features != y.features)
            return false;
    }
    return true;
}

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string write_tmp_csv(const std::string& name, const std::string& content) {
    const std::string path = tmp_path(name);
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

double mean_pairwise_distance(const std::vector<const Instance*>& xs) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < xs[i]->features.size(); ++k) {
                const double d = xs[i]->features[k] - xs[j]->features[k];
                d2 += d * d;
            }
            sum += std::sqrt(d2);
            ++count;
        }
    return sum / count;
}

}  // namespace

TEST_CASE("generator produces the specified counts") {
    GeneratorSpec spec;  // defaults: (40,4,4,10) subjects x 20 instances, d=16
    const auto ds = generate(spec);
    CHECK(ds.size() == 1160);
    CHECK(ds.num_classes == 4);
    CHECK(ds.feature_dim == 16);
    IndexSet all(ds.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    CHECK(ds.subject_counts(all) == std::vector<std::int64_t>{40, 4, 4, 10});
    CHECK(ds.class_counts(all) == std::vector<std::int64_t>{800, 80, 80, 200});
}

TEST_CASE("generator is deterministic per seed") {
    GeneratorSpec spec;
    spec.rng_seed = 31337;
    CHECK(datasets_equal(generate(spec), generate(spec)));
    GeneratorSpec other = spec;
    other.rng_seed = 31338;
    CHECK_FALSE(datasets_equal(generate(spec), generate(other)));
}

TEST_CASE("zero sigmas collapse each class onto its mean") {
    GeneratorSpec spec;
    spec.subjects_per_class = {2, 2, 2, 2};
    spec.instances_per_subject = 3;
    spec.subject_sigma = 0.0;
    spec.noise_sigma = 0.0;
    const auto ds = generate(spec);
    for (const auto& inst : ds.instances) {
        const auto& first = ds.instances[static_cast<std::size_t>(inst.label) * 6].features;
        CHECK(inst.features == first);
    }
    // With everything collapsed, class means sit exactly class_separation apart.
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            double d2 = 0.0;
            const auto& xa = ds.instances[static_cast<std::size_t>(a) * 6].features;
            const auto& xb = ds.instances[static_cast<std::size_t>(b) * 6].features;
            for (std::size_t k = 0; k < xa.size(); ++k) d2 += (xa[k] - xb[k]) * (xa[k] - xb[k]);
            CHECK(std::sqrt(d2) == Catch::Approx(spec.class_separation).epsilon(1e-9));
        }
}

TEST_CASE("strong subject effect makes within-subject instances mutually closer") {
    for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
        GeneratorSpec spec;
        spec.subjects_per_class = {6, 6};
        spec.num_classes = 2;
        spec.instances_per_subject = 8;
        spec.subject_sigma = 1.5;
        spec.noise_sigma = 0.1;
        spec.rng_seed = seed;
        const auto ds = generate(spec);

        const auto groups = ds.subject_indices();
        double within = 0.0;
        int n_subjects = 0;
        for (const auto& [sub, idx] : groups) {
            std::vector<const Instance*> xs;
            for (std::size_t i : idx) xs.push_back(&ds.instances[i]);
            within += mean_pairwise_distance(xs);
            ++n_subjects;
        }
        within /= n_subjects;

        // Across-subject distances inside class 0.
        std::vector<const Instance*> class0;
        for (const auto& inst : ds.instances)
            if (inst.label == 0) class0.push_back(&inst);
        const double across = mean_pairwise_distance(class0);
        CHECK(within < across);
    }
}

TEST_CASE("invalid generator specs rejected") {
    GeneratorSpec spec;
    spec.feature_dim = 3;  // below num_classes
    CHECK_THROWS_AS(generate(spec), ConfigError);
    spec = GeneratorSpec{};
    spec.subjects_per_class = {1, 1};
    CHECK_THROWS_AS(generate(spec), ConfigError);
    spec = GeneratorSpec{};
    spec.class_separation = 0.0;
    CHECK_THROWS_AS(generate(spec), ConfigError);
}

TEST_CASE("csv round trip is the identity") {
    Rng rng(404);
    for (int trial = 0; trial < 10; ++trial) {
        GeneratorSpec spec;
        spec.num_classes = 2 + static_cast<int>(rng.uniform_below(3));
        spec.feature_dim = spec.num_classes + rng.uniform_below(6);
        spec.subjects_per_class.assign(static_cast<std::size_t>(spec.num_classes), 0);
        for (int& n : spec.subjects_per_class) n = 1 + static_cast<int>(rng.uniform_below(5));
        spec.instances_per_subject = 1 + static_cast<int>(rng.uniform_below(6));
        spec.rng_seed = rng.next_u64();
        const auto ds = generate(spec);
        const std::string path = tmp_path("alcurate_roundtrip.csv");
        save_csv(ds, path);
        CHECK(datasets_equal(ds, load_csv(path)));
        std::remove(path.c_str());
    }
}

TEST_CASE("csv loader rejects malformed input") {
    const std::string header = "instance_id,subject_id,label,f0,f1\n";

    SECTION("empty file") {
        const auto path = write_tmp_csv("alcurate_empty.csv", "");
        CHECK_THROWS_AS(load_csv(path), DataError);
    }
    SECTION("header only has no data rows") {
        const auto path = write_tmp_csv("alcurate_nodata.csv", header);
        CHECK_THROWS_WITH(load_csv(path), Catch::Matchers::ContainsSubstring("no data rows"));
    }
    SECTION("bad header") {
        const auto path = write_tmp_csv("alcurate_badheader.csv",
                                        "id,subject,label,f0\n1,s1,0,0.5\n");
        CHECK_THROWS_AS(load_csv(path), DataError);
    }
    SECTION("wrong field count names the line") {
        const auto path =
            write_tmp_csv("alcurate_fields.csv", header + "1,s1,0,0.5,0.5\n2,s2,0,0.5\n");
        CHECK_THROWS_WITH(load_csv(path), Catch::Matchers::ContainsSubstring("line 3"));
    }
    SECTION("unparseable feature") {
        const auto path = write_tmp_csv("alcurate_badnum.csv", header + "1,s1,0,0.5,zap\n");
        CHECK_THROWS_WITH(load_csv(path), Catch::Matchers::ContainsSubstring("line 2"));
    }
    SECTION("non-finite feature") {
        const auto path = write_tmp_csv("alcurate_inf.csv", header + "1,s1,0,0.5,inf\n");
        CHECK_THROWS_AS(load_csv(path), DataError);
    }
    SECTION("duplicate instance id") {
        const auto path = write_tmp_csv("alcurate_dup.csv",
                                        header + "1,s1,0,0.5,0.5\n1,s2,0,0.5,0.5\n");
        CHECK_THROWS_WITH(load_csv(path),
                          Catch::Matchers::ContainsSubstring("duplicate instance_id 1"));
    }
    SECTION("conflicting subject labels name the subject") {
        const auto path = write_tmp_csv("alcurate_conflict.csv",
                                        header + "1,s1,0,0.5,0.5\n2,s1,1,0.5,0.5\n");
        CHECK_THROWS_WITH(load_csv(path), Catch::Matchers::ContainsSubstring("s1"));
    }
    SECTION("negative label") {
        const auto path = write_tmp_csv("alcurate_neglabel.csv", header + "1,s1,-1,0.5,0.5\n");
        CHECK_THROWS_AS(load_csv(path), DataError);
    }
    SECTION("subject id with forbidden characters") {
        const auto path = write_tmp_csv("alcurate_badsub.csv", header + "1,s 1,0,0.5,0.5\n");
        CHECK_THROWS_AS(load_csv(path), DataError);
    }
    SECTION("missing file") {
        CHECK_THROWS_AS(load_csv(tmp_path("alcurate_no_such_file.csv")), ConfigError);
    }
}

TEST_CASE("csv header matches the documented format exactly") {
    GeneratorSpec spec;
    spec.subjects_per_class = {1, 1, 1, 1};
    spec.instances_per_subject = 1;
    spec.feature_dim = 4;
    const auto ds = generate(spec);
    const std::string path = tmp_path("alcurate_header.csv");
    save_csv(ds, path);
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    CHECK(first == "instance_id,subject_id,label,f0,f1,f2,f3");
    std::remove(path.c_str());
}
