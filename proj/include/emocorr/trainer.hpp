#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emocorr/config.hpp"
#include "emocorr/data_io.hpp"
#include "emocorr/label_space.hpp"
#include "emocorr/losses.hpp"
#include "emocorr/metrics.hpp"
#include "emocorr/model.hpp"

namespace emocorr {

struct TrainConfig {
    ModelKind model = ModelKind::demux;
    MemoHead memo_head = MemoHead::new_classifier;
    LossConfig loss;
    EncoderConfig encoder;
    double learning_rate = 1e-3;
    int batch_size = 32;
    int max_epochs = 50;
    int patience = 5;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    double threshold = 0.5;
    int vocab_min_count = 2;
    int vocab_max_piece = 4;

    void validate() const;

    // Normalizes axes that carry no information for this cell (e.g. family
    // and weights when the local group is none), so equivalent cells compare
    // and deduplicate as equals.
    void canonicalize();

    // Deterministic one-line cell id used in report rows.
    std::string fingerprint() const;

    static TrainConfig from_kv(const KvFile& kv);
    std::string to_kv_string() const;
};

// Patience-based early stopping on a to-be-maximized dev metric; strict
// improvement resets the counter.
class EarlyStopper {
public:
    explicit EarlyStopper(int patience);
    // Returns true when training should stop after this epoch.
    bool observe(double value, int epoch);
    int best_epoch() const { return best_epoch_; }
    double best_value() const { return best_value_; }

private:
    int patience_;
    int best_epoch_ = 0;
    double best_value_ = 0.0;
    int since_best_ = 0;
    bool seen_ = false;
};

// Lower median: middle element for odd counts, the smaller middle for even.
int median_lower(std::vector<int> values);

// Divergence guard: raises DivergenceError when a loss value is NaN/Inf.
void ensure_finite_loss(double value, const std::string& context);

class AdamOptimizer {
public:
    explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    void step(ParamStore& params);

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> state_;
};

struct FittedModel {
    TextModel model;
    Vocabulary vocab;
    EmotionSet set;
    double threshold = 0.5;
};

struct TrainOutcome {
    FittedModel fitted;
    int best_epoch = 0;     // epoch whose parameters are kept (1-based)
    int stopped_epoch = 0;  // epoch after which training halted
    EvaluationReport dev_report;
    std::vector<double> dev_js_history;
};

// Early-stopped training on the train split, model selection on dev Jaccard.
TrainOutcome train_model(const TrainConfig& config, const EmotionSet& set,
                         const DatasetSplit& train, const DatasetSplit& dev, std::uint64_t seed);

// Fixed-epoch retraining on train+dev: exactly median_lower(best_epochs)
// epochs, no early stopping.
FittedModel retrain_full(const TrainConfig& config, const std::vector<int>& best_epochs,
                         const EmotionSet& set, const DatasetSplit& train_plus_dev,
                         std::uint64_t seed);

std::vector<std::vector<double>> predict_probabilities(const FittedModel& fitted,
                                                       const DatasetSplit& split);

EvaluationReport evaluate_split(const FittedModel& fitted, const DatasetSplit& split);

// Pearson correlation (unprojected, in [-1,1]) of thresholded predictions.
SquareMatrix prediction_correlation(const FittedModel& fitted, const DatasetSplit& split);

}  // namespace emocorr
