#include "emocorr/losses.hpp"

#include <stdexcept>
#include <string>

#include "emocorr/errors.hpp"

namespace emocorr {

void LossConfig::validate() const {
    if (alpha < 0.0 || alpha > 1.0) {
        throw ConfigError("loss alpha must lie in [0,1], got " + std::to_string(alpha));
    }
    if (beta < 0.0) {
        throw ConfigError("loss beta must be >= 0, got " + std::to_string(beta));
    }
}

LabelPartition LabelPartition::from_labels(const std::vector<int>& y) {
    LabelPartition p;
    for (int i = 0; i < static_cast<int>(y.size()); ++i) {
        const int v = y[static_cast<std::size_t>(i)];
        if (v == 1) {
            p.present.push_back(i);
        } else if (v == 0) {
            p.absent.push_back(i);
        } else {
            throw std::invalid_argument("labels must be 0/1, got " + std::to_string(v) +
                                        " at index " + std::to_string(i));
        }
    }
    return p;
}

Tensor bce_loss(const std::vector<int>& y, const Tensor& y_hat) {
    const int n = static_cast<int>(y.size());
    if (y_hat.size() != n) {
        throw std::invalid_argument("bce_loss: " + std::to_string(n) + " labels vs " +
                                    std::to_string(y_hat.size()) + " probabilities");
    }
    std::vector<double> pos(static_cast<std::size_t>(n)), negv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        pos[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)];
        negv[static_cast<std::size_t>(i)] = 1.0 - y[static_cast<std::size_t>(i)];
    }
    const Shape shape = y_hat.shape();
    Tensor y_t = Tensor::from_values(shape, pos);
    Tensor ny_t = Tensor::from_values(shape, negv);
    Tensor p = clamp(y_hat, 1e-7, 1.0 - 1e-7);
    Tensor ones = Tensor::full(shape, 1.0);
    Tensor ll = add(mul(y_t, log(p)), mul(ny_t, log(sub(ones, p))));
    return neg(mean(ll));
}

namespace {

Tensor average_or_zero(const std::vector<Tensor>& terms) {
    if (terms.empty()) {
        return Tensor::scalar(0.0);
    }
    Tensor total = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) {
        total = add(total, terms[i]);
    }
    return div(total, Tensor::scalar(static_cast<double>(terms.size())));
}

Tensor weighted(Tensor term, double w) {
    return mul(std::move(term), Tensor::scalar(w));
}

}  // namespace

Tensor global_cosine_loss(const std::vector<Tensor>& representations, const CorrelationPrior& prior) {
    const int n = static_cast<int>(representations.size());
    if (n < 2) {
        throw std::invalid_argument("global_cosine_loss: need at least 2 representations");
    }
    if (prior.size() != n) {
        throw std::invalid_argument("global_cosine_loss: prior size " + std::to_string(prior.size()) +
                                    " vs " + std::to_string(n) + " representations");
    }
    // The summand is symmetric, so each unordered pair stands in for two
    // ordered ones; the ordered-pair count n^2-n stays the denominator.
    std::vector<Tensor> terms;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            Tensor gap = sub(cosine_similarity(representations[static_cast<std::size_t>(i)],
                                               representations[static_cast<std::size_t>(j)]),
                             Tensor::scalar(prior.at(i, j)));
            terms.push_back(weighted(mul(gap, gap), 2.0));
        }
    }
    Tensor total = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) total = add(total, terms[i]);
    return div(total, Tensor::scalar(static_cast<double>(n) * n - n));
}

namespace {

struct PairwiseOps {
    // r-values are prediction scalars (exp family) or representation vectors
    // (cosine family); index into the model output.
    const LossTarget& target;
    bool use_cosine;

    Tensor similarity(int i, int j) const {  // S(r_i, r_j)
        if (use_cosine) {
            return cosine_similarity(target.representations[static_cast<std::size_t>(i)],
                                     target.representations[static_cast<std::size_t>(j)]);
        }
        return exp(sub(element(target.predictions, i), element(target.predictions, j)));
    }

    Tensor distance(int i, int j) const {  // D(r_i, r_j)
        if (use_cosine) {
            return neg(cosine_similarity(target.representations[static_cast<std::size_t>(i)],
                                         target.representations[static_cast<std::size_t>(j)]));
        }
        return exp(add(element(target.predictions, i), element(target.predictions, j)));
    }

    Tensor distance_negated(int i, int j) const {  // D(-r_i, -r_j)
        if (use_cosine) {
            // D(-h_i, -h_j) = D(h_i, h_j) for the cosine family.
            return distance(i, j);
        }
        return exp(neg(add(element(target.predictions, i), element(target.predictions, j))));
    }
};

}  // namespace

Tensor local_loss(const std::vector<int>& y, const LossTarget& target, const LossConfig& config,
                  const PairWeights& weights) {
    config.validate();
    if (config.local_group == LocalGroup::none) {
        return Tensor::scalar(0.0);
    }
    const bool use_cosine = config.family == LossFamily::cosine_representations;
    if (use_cosine && target.representations.empty()) {
        throw ConfigError(
            "cosine-representation local loss requires per-emotion representations, "
            "which this model does not produce");
    }
    const int n = static_cast<int>(y.size());
    if (use_cosine) {
        if (static_cast<int>(target.representations.size()) != n) {
            throw std::invalid_argument("local_loss: representation count mismatch");
        }
    } else {
        if (!target.predictions.defined() || target.predictions.size() != n) {
            throw std::invalid_argument("local_loss: prediction length mismatch");
        }
    }
    const LabelPartition part = LabelPartition::from_labels(y);
    const auto& N = part.absent;
    const auto& P = part.present;
    const PairwiseOps ops{target, use_cosine};

    const bool inter_defined = !N.empty() && !P.empty();
    const bool intra_defined = N.size() >= 2 || P.size() >= 2;

    auto build_inter = [&]() {
        std::vector<Tensor> terms;
        for (int i : N) {
            for (int j : P) {
                terms.push_back(weighted(ops.similarity(i, j), weights.f.at(i, j)));
            }
        }
        return average_or_zero(terms);
    };

    auto build_intra = [&]() {
        std::vector<Tensor> n_terms;
        for (std::size_t a = 0; a < N.size(); ++a) {
            for (std::size_t b = a + 1; b < N.size(); ++b) {
                n_terms.push_back(weighted(ops.distance(N[a], N[b]), weights.f_prime.at(N[a], N[b])));
            }
        }
        std::vector<Tensor> p_terms;
        for (std::size_t a = 0; a < P.size(); ++a) {
            for (std::size_t b = a + 1; b < P.size(); ++b) {
                p_terms.push_back(
                    weighted(ops.distance_negated(P[a], P[b]), weights.f_prime.at(P[a], P[b])));
            }
        }
        return weighted(add(average_or_zero(n_terms), average_or_zero(p_terms)), 0.5);
    };

    switch (config.local_group) {
        case LocalGroup::inter:
            return inter_defined ? build_inter() : Tensor::scalar(0.0);
        case LocalGroup::intra:
            return intra_defined ? build_intra() : Tensor::scalar(0.0);
        case LocalGroup::both: {
            // Average the defined constituents only; a lone defined term is
            // not halved on all-present/all-absent examples.
            if (inter_defined && intra_defined) {
                return weighted(add(build_inter(), build_intra()), 0.5);
            }
            if (inter_defined) return build_inter();
            if (intra_defined) return build_intra();
            return Tensor::scalar(0.0);
        }
        case LocalGroup::none:
            break;
    }
    return Tensor::scalar(0.0);
}

Tensor lca_loss(const std::vector<int>& y, const Tensor& y_hat) {
    LossConfig cfg;
    cfg.local_group = LocalGroup::inter;
    cfg.family = LossFamily::exp_predictions;
    cfg.weight_mode = WeightMode::constant_one;
    LossTarget target;
    target.predictions = y_hat;
    return local_loss(y, target, cfg, PairWeights::ones(static_cast<int>(y.size())));
}

Tensor combined_loss(const Tensor& bce, const Tensor& local, const Tensor& global, double alpha,
                     double beta) {
    if (alpha < 0.0 || alpha > 1.0) {
        throw ConfigError("combined_loss: alpha must lie in [0,1]");
    }
    if (beta < 0.0) {
        throw ConfigError("combined_loss: beta must be >= 0");
    }
    if (!bce.defined()) {
        throw std::invalid_argument("combined_loss: bce term is required");
    }
    Tensor total = mul(bce, Tensor::scalar(1.0 - alpha));
    if (local.defined()) {
        total = add(total, mul(local, Tensor::scalar(alpha)));
    }
    if (global.defined()) {
        total = add(total, mul(global, Tensor::scalar(beta)));
    }
    return total;
}

}  // namespace emocorr
