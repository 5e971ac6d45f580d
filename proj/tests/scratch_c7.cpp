// Scratch probe for the directional-replication setup: sweeps noise/alpha
// and prints the three quantities the acceptance check compares.
#include <cstdio>
#include <cstdlib>

#include "emocorr/data_io.hpp"
#include "emocorr/grid.hpp"
#include "emocorr/stats.hpp"
#include "emocorr/trainer.hpp"

using namespace emocorr;

int main(int argc, char** argv) {
    double noise = argc > 1 ? std::atof(argv[1]) : 0.2;
    double alpha = argc > 2 ? std::atof(argv[2]) : 0.2;
    int n_seeds = argc > 3 ? std::atoi(argv[3]) : 3;
    int epochs = argc > 4 ? std::atoi(argv[4]) : 25;
    double rate = argc > 5 ? std::atof(argv[5]) : 0.4;
    int dim = argc > 6 ? std::atoi(argv[6]) : 16;

    SyntheticSpec spec;
    spec.n_emotions = 6;
    spec.m_examples = 2000;
    spec.seed = 2024;
    spec.target_correlation = SquareMatrix::identity(6);
    spec.target_correlation.at(0, 1) = spec.target_correlation.at(1, 0) = 0.9;
    spec.target_correlation.at(2, 3) = spec.target_correlation.at(3, 2) = -0.6;
    spec.marginal_rates.assign(6, rate);
    spec.noise_rate = noise;
    spec.tokens_per_text = 8;
    SyntheticDataset data = generate_synthetic(spec);

    TrainConfig base;
    base.model = ModelKind::demux;
    base.encoder.dim = dim;
    base.encoder.heads = 2;
    base.encoder.ff_dim = 2 * dim;
    base.encoder.max_len = 48;
    base.learning_rate = 5e-3;
    base.batch_size = 32;
    base.max_epochs = epochs;
    base.patience = 5;
    base.seeds.clear();
    int s0 = argc > 7 ? std::atoi(argv[7]) : 1;
    for (int s = s0; s < s0 + n_seeds; ++s) base.seeds.push_back(static_cast<std::uint64_t>(s));

    TrainConfig baseline = base;
    baseline.loss.local_group = LocalGroup::none;
    baseline.canonicalize();

    TrainConfig intra_exp = base;
    intra_exp.loss.local_group = LocalGroup::intra;
    intra_exp.loss.family = LossFamily::exp_predictions;
    intra_exp.loss.weight_mode = WeightMode::from_prior;
    intra_exp.loss.weight_prior = PriorChoice::empirical_rho;
    intra_exp.loss.alpha = alpha;
    intra_exp.canonicalize();

    TrainConfig cos_cell = base;
    cos_cell.loss.local_group = LocalGroup::both;
    cos_cell.loss.family = LossFamily::cosine_representations;
    cos_cell.loss.weight_mode = WeightMode::from_prior;
    cos_cell.loss.weight_prior = PriorChoice::empirical_rho;
    cos_cell.loss.alpha = alpha;
    cos_cell.canonicalize();

    GridOptions options;
    options.threads = 1;
    const auto results =
        run_grid({baseline, intra_exp, cos_cell}, options,
                 training_phase1(data.set, data.train, data.dev),
                 training_phase2(data.set, data.train, data.dev, data.test));
    auto frob = [&](const RunResult& r) {
        double s = 0.0;
        std::printf("  per-seed frob:");
        for (const auto& corr : r.test_prediction_correlations) {
            const double d = frobenius_distance(corr, data.target);
            std::printf(" %.4f", d);
            s += d;
        }
        std::printf("\n");
        return s / static_cast<double>(r.test_prediction_correlations.size());
    };
    std::printf("noise=%.2f alpha=%.2f seeds=%d epochs=%d rate=%.2f dim=%d\n", noise, alpha, n_seeds,
                epochs, rate, dim);
    const char* names[] = {"base ", "intra", "cos  "};
    for (int i = 0; i < 3; ++i) {
        const auto& r = results[i];
        if (!r.ok()) {
            std::printf("%s %s\n", names[i], r.status.c_str());
            continue;
        }
        std::printf("%s devJS=%.4f (std %.4f)  frob=%.4f\n", names[i],
                    mean_of(r.dev_values(MetricKind::jaccard)),
                    stddev_of(r.dev_values(MetricKind::jaccard)), frob(r));
    }
    const double d_js = mean_of(results[1].dev_values(MetricKind::jaccard)) -
                        mean_of(results[0].dev_values(MetricKind::jaccard));
    const double d_frob = frob(results[1]) - frob(results[0]);
    const double d_cos = mean_of(results[2].dev_values(MetricKind::jaccard)) -
                         mean_of(results[1].dev_values(MetricKind::jaccard));
    std::printf("intra-base JS %+0.4f (want >= -0.005) | intra-base frob %+0.4f (want <= 0) | "
                "cos-intra JS %+0.4f (want <= 0)\n",
                d_js, d_frob, d_cos);
    return 0;
}
