#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "emocorr/errors.hpp"
#include "emocorr/losses.hpp"
#include "emocorr/rng.hpp"
#include "support/gradcheck.hpp"

using namespace emocorr;

namespace {

// Brute-force oracles working on plain doubles, independent of the graph path.

double oracle_lca(const std::vector<int>& y, const std::vector<double>& yh) {
    std::vector<int> N, P;
    for (int i = 0; i < static_cast<int>(y.size()); ++i) {
        (y[i] ? P : N).push_back(i);
    }
    double s = 0.0;
    for (int i : N) {
        for (int j : P) {
            s += std::exp(yh[i] - yh[j]);
        }
    }
    return s / (static_cast<double>(N.size()) * P.size());
}

double oracle_global_ordered(const std::vector<std::vector<double>>& h, const SquareMatrix& c) {
    const int n = static_cast<int>(h.size());
    auto cossim = [&](int i, int j) {
        double dot = 0, ni = 0, nj = 0;
        for (std::size_t k = 0; k < h[i].size(); ++k) {
            dot += h[i][k] * h[j][k];
            ni += h[i][k] * h[i][k];
            nj += h[j][k] * h[j][k];
        }
        return dot / std::sqrt(ni * nj);
    };
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double gap = cossim(i, j) - c.at(i, j);
            s += gap * gap;
        }
    }
    return s / (static_cast<double>(n) * n - n);
}

LossTarget prediction_target(const std::vector<double>& yh) {
    LossTarget t;
    t.predictions = Tensor::vector_of(yh, true);
    return t;
}

LossTarget representation_target(const std::vector<std::vector<double>>& h) {
    LossTarget t;
    for (const auto& v : h) {
        t.representations.push_back(Tensor::vector_of(v, true));
    }
    return t;
}

LossConfig cfg_of(LocalGroup g, LossFamily f) {
    LossConfig c;
    c.local_group = g;
    c.family = f;
    return c;
}

}  // namespace

TEST_CASE("bce worked values") {
    CHECK(bce_loss({1}, Tensor::vector_of({1.0 - 1e-7})).item() == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(bce_loss({1, 0}, Tensor::vector_of({0.5, 0.5})).item() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(bce_loss({0}, Tensor::vector_of({0.5})).item() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK_THROWS_AS(bce_loss({1, 0}, Tensor::vector_of({0.5})), std::invalid_argument);
}

TEST_CASE("global cosine loss worked values") {
    {
        std::vector<Tensor> h(3, Tensor::vector_of({1.0, 2.0}));
        CHECK(global_cosine_loss(h, CorrelationPrior::constant_one(3)).item() ==
              doctest::Approx(0.0));
    }
    {
        std::vector<Tensor> h{Tensor::vector_of({1.0, 0.0}), Tensor::vector_of({0.0, 1.0})};
        CorrelationPrior c = CorrelationPrior::constant_one(2);
        c.matrix.at(0, 1) = c.matrix.at(1, 0) = 0.5;
        CHECK(global_cosine_loss(h, c).item() == doctest::Approx(0.25));
    }
    {
        std::vector<Tensor> h{Tensor::vector_of({1.0, 0.0}), Tensor::vector_of({-1.0, 0.0})};
        CorrelationPrior c = CorrelationPrior::constant_one(2);
        c.matrix.at(0, 1) = c.matrix.at(1, 0) = 0.0;
        CHECK(global_cosine_loss(h, c).item() == doctest::Approx(1.0));
    }
}

TEST_CASE("global loss matches ordered-pair brute force on random inputs") {
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + rng.uniform_int(5);
        const int d = 2 + rng.uniform_int(4);
        std::vector<std::vector<double>> h(n, std::vector<double>(d));
        for (auto& v : h) {
            for (auto& x : v) x = rng.uniform(-2, 2);
        }
        CorrelationPrior c = CorrelationPrior::constant_one(n);
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                c.matrix.at(i, j) = c.matrix.at(j, i) = rng.uniform(0, 1);
            }
        }
        LossTarget t = representation_target(h);
        CHECK(global_cosine_loss(t.representations, c).item() ==
              doctest::Approx(oracle_global_ordered(h, c.matrix)).epsilon(1e-12));
    }
}

TEST_CASE("global loss zero iff cosines match targets") {
    std::vector<Tensor> h{Tensor::vector_of({1.0, 0.0}), Tensor::vector_of({0.0, 1.0})};
    CorrelationPrior c = CorrelationPrior::constant_one(2);
    c.matrix.at(0, 1) = c.matrix.at(1, 0) = project_to_unit_interval(0.0);
    // cossim = 0, target 0.5: not a match -> strictly positive
    CHECK(global_cosine_loss(h, c).item() > 0.0);
    c.matrix.at(0, 1) = c.matrix.at(1, 0) = 0.0;
    CHECK(global_cosine_loss(h, c).item() == doctest::Approx(0.0));
}

TEST_CASE("local inter exp worked value") {
    // y=(1,0,0), yh=(0.9,0.2,0.1): (e^-0.7 + e^-0.8)/2
    const double expected = (std::exp(-0.7) + std::exp(-0.8)) / 2.0;
    Tensor loss = local_loss({1, 0, 0}, prediction_target({0.9, 0.2, 0.1}),
                             cfg_of(LocalGroup::inter, LossFamily::exp_predictions),
                             PairWeights::ones(3));
    CHECK(loss.item() == doctest::Approx(expected).epsilon(1e-12));
    CHECK(loss.item() == doctest::Approx(0.4730).epsilon(1e-3));
}

TEST_CASE("local intra exp worked value") {
    // y=(1,1,0,0), yh=(0.8,0.7,0.3,0.2): 0.5*(e^{0.5} + e^{-1.5})
    const double expected = 0.5 * (std::exp(0.5) + std::exp(-1.5));
    Tensor loss = local_loss({1, 1, 0, 0}, prediction_target({0.8, 0.7, 0.3, 0.2}),
                             cfg_of(LocalGroup::intra, LossFamily::exp_predictions),
                             PairWeights::ones(4));
    CHECK(loss.item() == doctest::Approx(expected).epsilon(1e-12));
    CHECK(loss.item() == doctest::Approx(0.9359).epsilon(1e-3));
}

TEST_CASE("local intra with singleton groups is zero") {
    Tensor loss = local_loss({1, 0}, prediction_target({0.6, 0.4}),
                             cfg_of(LocalGroup::intra, LossFamily::exp_predictions),
                             PairWeights::ones(2));
    CHECK(loss.item() == doctest::Approx(0.0));
    std::vector<std::vector<double>> h{{1, 0}, {0, 1}};
    Tensor closs = local_loss({1, 0}, representation_target(h),
                              cfg_of(LocalGroup::intra, LossFamily::cosine_representations),
                              PairWeights::ones(2));
    CHECK(closs.item() == doctest::Approx(0.0));
}

TEST_CASE("local inter cosine with equal representations is one") {
    std::vector<std::vector<double>> h{{0.3, 0.4}, {0.3, 0.4}};
    Tensor loss = local_loss({1, 0}, representation_target(h),
                             cfg_of(LocalGroup::inter, LossFamily::cosine_representations),
                             PairWeights::ones(2));
    CHECK(loss.item() == doctest::Approx(1.0));
}

TEST_CASE("lca equivalence against double-loop oracle") {
    Rng rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + rng.uniform_int(10);
        std::vector<int> y(n);
        int ones = 0;
        for (auto& v : y) {
            v = rng.uniform_int(2);
            ones += v;
        }
        if (ones == 0) y[rng.uniform_int(n)] = 1;
        ones = std::accumulate(y.begin(), y.end(), 0);
        if (ones == n) y[rng.uniform_int(n)] = 0;
        std::vector<double> yh(n);
        for (auto& v : yh) v = rng.uniform(0.001, 0.999);
        const double got = lca_loss(y, Tensor::vector_of(yh)).item();
        REQUIRE(std::fabs(got - oracle_lca(y, yh)) < 1e-9);
    }
}

TEST_CASE("lca degenerate groups are zero") {
    CHECK(lca_loss({1, 1, 1}, Tensor::vector_of({0.5, 0.6, 0.7})).item() == doctest::Approx(0.0));
    CHECK(lca_loss({0, 0, 0}, Tensor::vector_of({0.5, 0.6, 0.7})).item() == doctest::Approx(0.0));
}

TEST_CASE("combined loss mixing") {
    Tensor bce = Tensor::scalar(1.0);
    Tensor local = Tensor::scalar(0.5);
    Tensor global = Tensor::scalar(0.25);
    CHECK(combined_loss(bce, local, global, 0.2, 0.1).item() == doctest::Approx(0.925));
    CHECK(combined_loss(bce, local, global, 0.0, 0.0).item() == 1.0);
    CHECK(combined_loss(bce, local, global, 1.0, 0.0).item() == 0.5);
    CHECK(combined_loss(bce, Tensor(), Tensor(), 0.2, 0.1).item() == doctest::Approx(0.8));
    CHECK_THROWS_AS(combined_loss(bce, local, global, 1.5, 0.1), ConfigError);
}

TEST_CASE("cosine family with prediction-only target is a configuration error") {
    CHECK_THROWS_AS(local_loss({1, 0}, prediction_target({0.6, 0.4}),
                               cfg_of(LocalGroup::inter, LossFamily::cosine_representations),
                               PairWeights::ones(2)),
                    ConfigError);
}

TEST_CASE("empty-group conventions for both") {
    // All absent: inter undefined, both collapses to intra (not halved).
    std::vector<int> y{0, 0, 0};
    std::vector<double> yh{0.2, 0.3, 0.4};
    const double intra = local_loss(y, prediction_target(yh),
                                    cfg_of(LocalGroup::intra, LossFamily::exp_predictions),
                                    PairWeights::ones(3))
                             .item();
    const double both = local_loss(y, prediction_target(yh),
                                   cfg_of(LocalGroup::both, LossFamily::exp_predictions),
                                   PairWeights::ones(3))
                            .item();
    CHECK(both == doctest::Approx(intra).epsilon(1e-12));
    CHECK(intra > 0.0);

    // Singleton p/n: intra undefined, both collapses to inter.
    const double inter2 = local_loss({1, 0}, prediction_target({0.6, 0.4}),
                                     cfg_of(LocalGroup::inter, LossFamily::exp_predictions),
                                     PairWeights::ones(2))
                              .item();
    const double both2 = local_loss({1, 0}, prediction_target({0.6, 0.4}),
                                    cfg_of(LocalGroup::both, LossFamily::exp_predictions),
                                    PairWeights::ones(2))
                             .item();
    CHECK(both2 == doctest::Approx(inter2).epsilon(1e-12));
}

TEST_CASE("exp family losses are finite and nonnegative") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + rng.uniform_int(8);
        std::vector<int> y(n);
        for (auto& v : y) v = rng.uniform_int(2);
        std::vector<double> yh(n);
        for (auto& v : yh) v = rng.uniform(0.001, 0.999);
        for (LocalGroup g : {LocalGroup::inter, LocalGroup::intra, LocalGroup::both}) {
            const double v =
                local_loss(y, prediction_target(yh), cfg_of(g, LossFamily::exp_predictions),
                           PairWeights::ones(n))
                    .item();
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
        }
    }
}

TEST_CASE("cosine family per-term values stay in [-1,1]") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + rng.uniform_int(5);
        std::vector<int> y(n);
        for (auto& v : y) v = rng.uniform_int(2);
        std::vector<std::vector<double>> h(n, std::vector<double>(3));
        for (auto& v : h) {
            for (auto& x : v) x = rng.uniform(-1, 1);
            if (std::fabs(v[0]) + std::fabs(v[1]) + std::fabs(v[2]) < 1e-6) v[0] = 1.0;
        }
        for (LocalGroup g : {LocalGroup::inter, LocalGroup::intra, LocalGroup::both}) {
            const double v = local_loss(y, representation_target(h),
                                        cfg_of(g, LossFamily::cosine_representations),
                                        PairWeights::ones(n))
                                 .item();
            CHECK(v >= -1.0 - 1e-12);
            CHECK(v <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("exp family monotonicity") {
    const std::vector<int> y{1, 1, 0, 0};
    std::vector<double> yh{0.7, 0.6, 0.3, 0.2};
    auto inter = [&](const std::vector<double>& p) {
        return local_loss(y, prediction_target(p), cfg_of(LocalGroup::inter, LossFamily::exp_predictions),
                          PairWeights::ones(4))
            .item();
    };
    auto intra = [&](const std::vector<double>& p) {
        return local_loss(y, prediction_target(p), cfg_of(LocalGroup::intra, LossFamily::exp_predictions),
                          PairWeights::ones(4))
            .item();
    };
    std::vector<double> up_present = yh, up_absent = yh;
    up_present[0] += 0.05;  // j in P: inter must strictly decrease
    up_absent[2] += 0.05;   // i in N: inter must strictly increase
    CHECK(inter(up_present) < inter(yh));
    CHECK(inter(up_absent) > inter(yh));
    CHECK(intra(up_absent) > intra(yh));    // N-term grows
    CHECK(intra(up_present) < intra(yh));   // P-term shrinks
}

TEST_CASE("permutation invariance of losses") {
    Rng rng(23);
    const int n = 5;
    std::vector<int> y{1, 0, 1, 0, 0};
    std::vector<double> yh(n);
    for (auto& v : yh) v = rng.uniform(0.05, 0.95);
    std::vector<std::vector<double>> h(n, std::vector<double>(4));
    for (auto& v : h) {
        for (auto& x : v) x = rng.uniform(-1, 1);
    }
    CorrelationPrior c = CorrelationPrior::constant_one(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) c.matrix.at(i, j) = c.matrix.at(j, i) = rng.uniform(0, 1);
    }
    PairWeights w = pair_weights(c, WeightMode::from_prior);

    const std::vector<int> perm{3, 0, 4, 1, 2};
    std::vector<int> yp(n);
    std::vector<double> yhp(n);
    std::vector<std::vector<double>> hp(n);
    CorrelationPrior cp = CorrelationPrior::constant_one(n);
    for (int i = 0; i < n; ++i) {
        yp[i] = y[perm[i]];
        yhp[i] = yh[perm[i]];
        hp[i] = h[perm[i]];
        for (int j = 0; j < n; ++j) cp.matrix.at(i, j) = c.at(perm[i], perm[j]);
    }
    PairWeights wp = pair_weights(cp, WeightMode::from_prior);

    for (LocalGroup g : {LocalGroup::inter, LocalGroup::intra, LocalGroup::both}) {
        const double a = local_loss(y, prediction_target(yh),
                                    cfg_of(g, LossFamily::exp_predictions), w)
                             .item();
        const double b = local_loss(yp, prediction_target(yhp),
                                    cfg_of(g, LossFamily::exp_predictions), wp)
                             .item();
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
    CHECK(global_cosine_loss(representation_target(h).representations, c).item() ==
          doctest::Approx(global_cosine_loss(representation_target(hp).representations, cp).item())
              .epsilon(1e-12));
    CHECK(bce_loss(y, Tensor::vector_of(yh)).item() ==
          doctest::Approx(bce_loss(yp, Tensor::vector_of(yhp)).item()).epsilon(1e-12));
}

TEST_CASE("loss gradients match finite differences") {
    Rng rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3 + rng.uniform_int(3);
        std::vector<int> y(n);
        for (auto& v : y) v = rng.uniform_int(2);
        y[0] = 1;
        y[n - 1] = 0;
        std::vector<double> yh(n);
        for (auto& v : yh) v = rng.uniform(0.1, 0.9);
        Tensor pred = Tensor::vector_of(yh, true);
        CorrelationPrior c = CorrelationPrior::constant_one(n);
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) c.matrix.at(i, j) = c.matrix.at(j, i) = rng.uniform(0, 1);
        }
        PairWeights w = pair_weights(c, WeightMode::from_prior);

        // BCE
        auto res = gradcheck::check([&]() { return bce_loss(y, pred); }, {pred});
        CHECK(res.max_rel_err < 1e-4);

        // exp-family local losses
        for (LocalGroup g : {LocalGroup::inter, LocalGroup::intra, LocalGroup::both}) {
            LossTarget t;
            t.predictions = pred;
            res = gradcheck::check(
                [&]() { return local_loss(y, t, cfg_of(g, LossFamily::exp_predictions), w); }, {pred});
            CHECK(res.max_rel_err < 1e-4);
        }

        // cosine-family local + global losses over representations
        std::vector<Tensor> reps;
        for (int i = 0; i < n; ++i) {
            std::vector<double> v(4);
            for (auto& x : v) x = rng.uniform(0.2, 1.0);
            reps.push_back(Tensor::vector_of(v, true));
        }
        LossTarget rt;
        rt.representations = reps;
        for (LocalGroup g : {LocalGroup::inter, LocalGroup::intra, LocalGroup::both}) {
            res = gradcheck::check(
                [&]() { return local_loss(y, rt, cfg_of(g, LossFamily::cosine_representations), w); },
                reps);
            CHECK(res.max_rel_err < 1e-4);
        }
        res = gradcheck::check([&]() { return global_cosine_loss(reps, c); }, reps);
        CHECK(res.max_rel_err < 1e-4);

        // composite
        res = gradcheck::check(
            [&]() {
                LossTarget t;
                t.predictions = pred;
                Tensor local = local_loss(y, t, cfg_of(LocalGroup::both, LossFamily::exp_predictions), w);
                return combined_loss(bce_loss(y, pred), local, global_cosine_loss(reps, c), 0.2, 0.1);
            },
            {pred, reps[0], reps[1]});
        CHECK(res.max_rel_err < 1e-4);
    }
}
