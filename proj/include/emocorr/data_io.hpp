#pragma once

#include <string>
#include <vector>

#include "emocorr/label_space.hpp"
#include "emocorr/matrix.hpp"

namespace emocorr {

struct LabeledExample {
    std::string id;
    std::string text;
    std::vector<int> labels;  // canonical emotion order
};

struct DatasetSplit {
    std::string name;  // train | dev | test
    std::vector<LabeledExample> examples;

    std::vector<std::vector<int>> label_matrix() const;
};

// SemEval 2018 Task 1 E-c TSV: header `ID<TAB>Tweet<TAB><emotion>...`,
// one 0/1 cell per emotion. Columns are remapped to the canonical order by
// header name; text cells pass through untouched.
DatasetSplit load_semeval_tsv(const std::string& path, const EmotionSet& set,
                              const std::string& split_name);

void write_semeval_tsv(const std::string& path, const DatasetSplit& split, const EmotionSet& set);

struct SyntheticSpec {
    int n_emotions = 6;
    int m_examples = 2000;
    SquareMatrix target_correlation;     // [-1,1], unit diagonal, PSD
    std::vector<double> marginal_rates;  // per-emotion P(y=1), in (0,1)
    int vocabulary_per_emotion = 8;
    double noise_rate = 0.1;
    int tokens_per_text = 8;
    unsigned long seed = 0;

    void validate() const;
    static SyntheticSpec from_kv_file(const std::string& path);
};

struct SyntheticDataset {
    EmotionSet set;
    DatasetSplit train, dev, test;
    SquareMatrix target;  // the requested binary label correlation
};

// Correlated multi-label sampler. Labels come from thresholded latent
// Gaussians; the latent correlation of each pair is calibrated (tetrachoric
// inversion) so the binary label correlation converges to the requested
// target. Text is a fixed-length token stream whose signal tokens come from
// each present emotion's private vocabulary; a token is replaced by noise
// with probability noise_rate. Splits are 70/10/20 after a seeded shuffle.
SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

// Latent Gaussian correlation whose thresholded-binary (phi) correlation
// equals `target` at the given marginal rates; raises when unattainable.
double calibrate_latent_correlation(double target, double rate_i, double rate_j);

}  // namespace emocorr
