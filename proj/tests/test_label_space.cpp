#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "emocorr/errors.hpp"
#include "emocorr/label_space.hpp"
#include "emocorr/rng.hpp"

using namespace emocorr;

TEST_CASE("canonical semeval set") {
    EmotionSet s = EmotionSet::semeval11();
    s.validate();
    REQUIRE(s.size() == 11);
    CHECK(s.names == std::vector<std::string>{"anger", "anticipation", "disgust", "fear", "joy",
                                              "love", "optimism", "pessimism", "sadness",
                                              "surprise", "trust"});
    CHECK(*s.wheel_angle_deg[s.index_of("joy")] == doctest::Approx(0.0));
    CHECK(*s.wheel_angle_deg[s.index_of("love")] == doctest::Approx(22.5));
    CHECK(*s.wheel_angle_deg[s.index_of("pessimism")] == doctest::Approx(247.5));
}

TEST_CASE("projection to unit interval") {
    CHECK(project_to_unit_interval(-1.0) == doctest::Approx(0.0));
    CHECK(project_to_unit_interval(0.0) == doctest::Approx(0.5));
    CHECK(project_to_unit_interval(0.7071) == doctest::Approx(0.8536).epsilon(1e-4));
    CHECK(project_to_unit_interval(1.0 + 5e-10) == doctest::Approx(1.0));
    CHECK_THROWS_AS(project_to_unit_interval(1.1), std::domain_error);
    // order preserving
    CHECK(project_to_unit_interval(-0.5) < project_to_unit_interval(-0.4999));
}

TEST_CASE("empirical correlation worked cases") {
    auto off = [](const CorrelationPrior& p) { return p.at(0, 1); };
    CHECK(off(empirical_correlation({{1, 1}, {1, 1}, {0, 0}, {0, 0}})) == doctest::Approx(1.0));
    CHECK(off(empirical_correlation({{1, 0}, {0, 1}})) == doctest::Approx(0.0));
    CHECK(off(empirical_correlation({{1, 1}, {1, 0}, {0, 1}, {0, 0}})) == doctest::Approx(0.5));
    // degenerate constant column: neutral midpoint
    CHECK(off(empirical_correlation({{1, 1}, {1, 0}, {1, 1}})) == doctest::Approx(0.5));
}

TEST_CASE("empirical correlation properties on random label matrices") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 2 + rng.uniform_int(30);
        const int n = 2 + rng.uniform_int(6);
        std::vector<std::vector<int>> labels(m, std::vector<int>(n));
        for (auto& row : labels) {
            for (auto& v : row) v = rng.uniform_int(2);
        }
        CorrelationPrior p = empirical_correlation(labels);
        p.validate();  // symmetric, unit diagonal, entries in [0,1]
    }
}

TEST_CASE("wheel cosine cases") {
    EmotionSet s = EmotionSet::semeval11();
    const int joy = s.index_of("joy");
    const int sadness = s.index_of("sadness");
    const int trust = s.index_of("trust");
    CHECK(wheel_cosine(s, joy, joy) == doctest::Approx(1.0));
    CHECK(wheel_cosine(s, joy, sadness) == doctest::Approx(0.0));
    CHECK(wheel_cosine(s, joy, trust) == doctest::Approx(0.8536).epsilon(1e-4));
}

TEST_CASE("wheel cosine invariant under global rotation") {
    EmotionSet a = EmotionSet::semeval11();
    EmotionSet b = a;
    for (auto& ang : b.wheel_angle_deg) ang = *ang + 123.4;
    for (int i = 0; i < a.size(); ++i) {
        for (int j = 0; j < a.size(); ++j) {
            CHECK(wheel_cosine(a, i, j) == doctest::Approx(wheel_cosine(b, i, j)).epsilon(1e-12));
        }
    }
}

TEST_CASE("missing wheel angle names the emotion") {
    EmotionSet s;
    s.names = {"alpha", "beta"};
    s.wheel_angle_deg = {std::optional<double>(10.0), std::nullopt};
    try {
        wheel_cosine(s, 0, 1);
        FAIL("expected missing-angle error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("beta") != std::string::npos);
    }
}

TEST_CASE("pair weights") {
    CorrelationPrior c = CorrelationPrior::constant_one(3);
    c.matrix.at(0, 1) = 0.8;
    c.matrix.at(1, 0) = 0.8;
    c.matrix.at(0, 2) = 0.0;
    c.matrix.at(2, 0) = 0.0;

    PairWeights ones = pair_weights(c, WeightMode::constant_one);
    for (double v : ones.f.v) CHECK(v == 1.0);
    for (double v : ones.f_prime.v) CHECK(v == 1.0);

    PairWeights w = pair_weights(c, WeightMode::from_prior);
    CHECK(w.f.at(0, 1) == doctest::Approx(0.2));
    CHECK(w.f_prime.at(0, 1) == doctest::Approx(0.8));
    CHECK(w.f.at(0, 2) == doctest::Approx(1.0));
    CHECK(w.f_prime.at(0, 2) == doctest::Approx(0.0));
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            CHECK(w.f.at(i, j) + w.f_prime.at(i, j) == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("wheel angles load from file") {
    const char* path = "wheel_angles_test.txt";
    {
        std::ofstream out(path);
        out << "# custom layout\n";
        out << "joy = 10\n";
        out << "sadness = 190.5\n";
    }
    EmotionSet s = EmotionSet::semeval11();
    apply_wheel_angles(s, load_wheel_angles(path));
    CHECK(*s.wheel_angle_deg[s.index_of("joy")] == doctest::Approx(10.0));
    CHECK(*s.wheel_angle_deg[s.index_of("sadness")] == doctest::Approx(190.5));
    CHECK(*s.wheel_angle_deg[s.index_of("trust")] == doctest::Approx(45.0));
    std::remove(path);

    CHECK_THROWS_AS(load_wheel_angles("definitely_missing_file.txt"), DataError);
}

TEST_CASE("emotion set validation") {
    EmotionSet dup;
    dup.names = {"joy", "joy"};
    CHECK_THROWS_AS(dup.validate(), ConfigError);
    EmotionSet one;
    one.names = {"joy"};
    CHECK_THROWS_AS(one.validate(), ConfigError);
}
