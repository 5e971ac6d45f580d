#pragma once

#include <vector>

#include "emocorr/label_space.hpp"
#include "emocorr/tensor.hpp"

namespace emocorr {

enum class LocalGroup { none, inter, intra, both };
enum class LossFamily { exp_predictions, cosine_representations };
enum class PriorChoice { none, empirical_rho, wheel_theta };

struct LossConfig {
    LocalGroup local_group = LocalGroup::none;
    LossFamily family = LossFamily::exp_predictions;
    WeightMode weight_mode = WeightMode::constant_one;
    PriorChoice weight_prior = PriorChoice::empirical_rho;
    PriorChoice global_prior = PriorChoice::none;
    double alpha = 0.2;
    double beta = 0.1;

    void validate() const;
};

// Gold labels split into present (P) and absent (N) index sets.
struct LabelPartition {
    std::vector<int> present;
    std::vector<int> absent;

    static LabelPartition from_labels(const std::vector<int>& y);
};

// What a model exposes to the local losses: output probabilities always,
// per-emotion representations only for models that have them.
struct LossTarget {
    Tensor predictions;                     // [n]
    std::vector<Tensor> representations;    // n vectors, possibly empty
};

// Mean over emotions of the binary cross entropy; probabilities are clamped
// to [1e-7, 1 - 1e-7] first.
Tensor bce_loss(const std::vector<int>& y, const Tensor& y_hat);

// Mean squared gap between pairwise representation cosines and the prior,
// over all ordered pairs i != j.
Tensor global_cosine_loss(const std::vector<Tensor>& representations, const CorrelationPrior& prior);

// Label-conditioned pairwise regularizer. Terms whose pair set is empty
// contribute 0 (the intra halves keep their 1/2); `both` averages only its
// defined constituents, so a lone defined term is not halved.
Tensor local_loss(const std::vector<int>& y, const LossTarget& target, const LossConfig& config,
                  const PairWeights& weights);

// The inter/exp/unit-weight special case under its historical name.
Tensor lca_loss(const std::vector<int>& y, const Tensor& y_hat);

// (1-alpha)*bce + alpha*local + beta*global; undefined tensors count as 0.
Tensor combined_loss(const Tensor& bce, const Tensor& local, const Tensor& global, double alpha,
                     double beta);

}  // namespace emocorr
