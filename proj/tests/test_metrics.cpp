#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "emocorr/metrics.hpp"
#include "emocorr/rng.hpp"

using namespace emocorr;

namespace {

// Independent brute force built on explicit set operations per sample/label.
struct BruteReport {
    double jaccard, micro, macro;
    std::vector<double> per_label;
};

BruteReport brute_force(const std::vector<std::vector<int>>& gold,
                        const std::vector<std::vector<double>>& prob, double threshold) {
    const int m = static_cast<int>(gold.size());
    const int n = static_cast<int>(gold[0].size());
    std::vector<std::set<int>> gsets(m), psets(m);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < n; ++c) {
            if (gold[r][c] == 1) gsets[r].insert(c);
            if (prob[r][c] >= threshold) psets[r].insert(c);
        }
    }
    BruteReport out;
    double js = 0.0;
    for (int r = 0; r < m; ++r) {
        std::vector<int> inter, uni;
        std::set_intersection(gsets[r].begin(), gsets[r].end(), psets[r].begin(), psets[r].end(),
                              std::back_inserter(inter));
        std::set_union(gsets[r].begin(), gsets[r].end(), psets[r].begin(), psets[r].end(),
                       std::back_inserter(uni));
        js += uni.empty() ? 1.0 : static_cast<double>(inter.size()) / uni.size();
    }
    out.jaccard = js / m;

    long tps = 0, fps = 0, fns = 0;
    double macro = 0.0;
    for (int c = 0; c < n; ++c) {
        long tp = 0, fp = 0, fn = 0;
        for (int r = 0; r < m; ++r) {
            const bool g = gsets[r].count(c) > 0;
            const bool p = psets[r].count(c) > 0;
            if (g && p) ++tp;
            if (!g && p) ++fp;
            if (g && !p) ++fn;
        }
        tps += tp;
        fps += fp;
        fns += fn;
        const long denom = 2 * tp + fp + fn;
        const double f1 = denom == 0 ? 0.0 : 2.0 * tp / static_cast<double>(denom);
        out.per_label.push_back(f1);
        macro += f1;
    }
    out.macro = macro / n;
    const long md = 2 * tps + fps + fns;
    out.micro = md == 0 ? 1.0 : 2.0 * tps / static_cast<double>(md);
    return out;
}

}  // namespace

TEST_CASE("hand-counted case") {
    std::vector<std::vector<int>> gold{{1, 0, 1}, {0, 1, 0}};
    std::vector<std::vector<double>> prob{{1, 0, 0}, {0, 1, 0}};
    EvaluationReport r = evaluate(gold, prob, 0.5);
    CHECK(r.micro_f1 == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(r.macro_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(r.jaccard == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(r.per_emotion_f1 == std::vector<double>{1.0, 1.0, 0.0});
}

TEST_CASE("perfect prediction scores all ones") {
    std::vector<std::vector<int>> gold{{1, 0, 1}, {0, 1, 1}, {1, 1, 0}};
    std::vector<std::vector<double>> prob;
    for (const auto& row : gold) {
        prob.push_back(std::vector<double>(row.begin(), row.end()));
    }
    EvaluationReport r = evaluate(gold, prob, 0.5);
    CHECK(r.jaccard == 1.0);
    CHECK(r.micro_f1 == 1.0);
    CHECK(r.macro_f1 == 1.0);
}

TEST_CASE("all-zero conventions") {
    std::vector<std::vector<int>> gold{{0, 0}, {0, 0}};
    std::vector<std::vector<double>> prob{{0.1, 0.2}, {0.0, 0.4}};
    EvaluationReport r = evaluate(gold, prob, 0.5);
    CHECK(r.jaccard == 1.0);    // empty-set convention
    CHECK(r.micro_f1 == 1.0);   // 0/0 pooled case
    CHECK(r.macro_f1 == 0.0);   // zero-support, zero-prediction emotions score 0
}

TEST_CASE("matches brute force on random instances") {
    Rng rng(31);
    for (int trial = 0; trial < 1000; ++trial) {
        const int m = 1 + rng.uniform_int(12);
        const int n = 1 + rng.uniform_int(8);
        std::vector<std::vector<int>> gold(m, std::vector<int>(n));
        std::vector<std::vector<double>> prob(m, std::vector<double>(n));
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < n; ++c) {
                gold[r][c] = rng.uniform_int(2);
                prob[r][c] = rng.uniform(0, 1);
            }
        }
        EvaluationReport rep = evaluate(gold, prob, 0.5);
        BruteReport want = brute_force(gold, prob, 0.5);
        REQUIRE(std::fabs(rep.jaccard - want.jaccard) < 1e-12);
        REQUIRE(std::fabs(rep.micro_f1 - want.micro) < 1e-12);
        REQUIRE(std::fabs(rep.macro_f1 - want.macro) < 1e-12);
        REQUIRE(rep.per_emotion_f1 == want.per_label);
        CHECK(rep.jaccard >= 0.0);
        CHECK(rep.jaccard <= 1.0);
        CHECK(rep.micro_f1 >= 0.0);
        CHECK(rep.micro_f1 <= 1.0);
        CHECK(rep.macro_f1 >= 0.0);
        CHECK(rep.macro_f1 <= 1.0);
    }
}

TEST_CASE("permutation invariance over the emotion axis") {
    Rng rng(37);
    const int m = 6, n = 5;
    std::vector<std::vector<int>> gold(m, std::vector<int>(n));
    std::vector<std::vector<double>> prob(m, std::vector<double>(n));
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < n; ++c) {
            gold[r][c] = rng.uniform_int(2);
            prob[r][c] = rng.uniform(0, 1);
        }
    }
    const std::vector<int> perm{4, 2, 0, 3, 1};
    std::vector<std::vector<int>> gold_p(m, std::vector<int>(n));
    std::vector<std::vector<double>> prob_p(m, std::vector<double>(n));
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < n; ++c) {
            gold_p[r][c] = gold[r][perm[c]];
            prob_p[r][c] = prob[r][perm[c]];
        }
    }
    EvaluationReport a = evaluate(gold, prob, 0.5);
    EvaluationReport b = evaluate(gold_p, prob_p, 0.5);
    CHECK(a.jaccard == doctest::Approx(b.jaccard).epsilon(1e-15));
    CHECK(a.micro_f1 == doctest::Approx(b.micro_f1).epsilon(1e-15));
    CHECK(a.macro_f1 == doctest::Approx(b.macro_f1).epsilon(1e-15));
    for (int c = 0; c < n; ++c) {
        CHECK(a.per_emotion_f1[perm[c]] == doctest::Approx(b.per_emotion_f1[c]).epsilon(1e-15));
    }
}

TEST_CASE("shape mismatch and bad threshold rejected") {
    std::vector<std::vector<int>> gold{{1, 0}};
    std::vector<std::vector<double>> prob{{0.6, 0.4, 0.2}};
    CHECK_THROWS_AS(evaluate(gold, prob, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(evaluate(gold, {{0.5, 0.5}}, 1.5), std::invalid_argument);
}

TEST_CASE("report serializes to json text") {
    EvaluationReport r;
    r.jaccard = 0.75;
    r.micro_f1 = 0.8;
    r.macro_f1 = 2.0 / 3.0;
    r.per_emotion_f1 = {1.0, 0.5};
    const std::string j = r.to_json();
    CHECK(j.find("\"jaccard\": 0.750000") != std::string::npos);
    CHECK(j.find("\"per_emotion_f1\": [1.000000, 0.500000]") != std::string::npos);
}
