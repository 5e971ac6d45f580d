#include "emocorr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "emocorr/enum_names.hpp"
#include "emocorr/errors.hpp"
#include "emocorr/rng.hpp"
#include "emocorr/stats.hpp"

namespace emocorr {

void TrainConfig::validate() const {
    encoder.validate();
    loss.validate();
    if (learning_rate <= 0.0) {
        throw ConfigError("learning rate must be positive");
    }
    if (batch_size < 1 || max_epochs < 1) {
        throw ConfigError("batch size and max epochs must be positive");
    }
    if (patience < 1) {
        throw ConfigError("patience must be at least 1");
    }
    if (seeds.empty()) {
        throw ConfigError("at least one seed is required");
    }
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ConfigError("threshold must lie in (0,1)");
    }
    if (vocab_min_count < 1 || vocab_max_piece < 1) {
        throw ConfigError("vocabulary settings must be positive");
    }
    if (model == ModelKind::memo) {
        if (loss.local_group != LocalGroup::none &&
            loss.family == LossFamily::cosine_representations) {
            throw ConfigError("cosine family requires per-emotion representations");
        }
        if (loss.global_prior != PriorChoice::none) {
            throw ConfigError("global loss requires per-emotion representations");
        }
    }
}

void TrainConfig::canonicalize() {
    if (loss.local_group == LocalGroup::none) {
        loss.alpha = 0.0;
        loss.family = LossFamily::exp_predictions;
        loss.weight_mode = WeightMode::constant_one;
    }
    if (loss.weight_mode == WeightMode::constant_one) {
        loss.weight_prior = PriorChoice::empirical_rho;
    }
    if (loss.global_prior == PriorChoice::none) {
        loss.beta = 0.0;
    }
}

std::string TrainConfig::fingerprint() const {
    char buf[64];
    std::string out = "model=" + to_string(model);
    if (model == ModelKind::memo) {
        out += ":" + to_string(memo_head);
    }
    out += " group=" + to_string(loss.local_group);
    if (loss.local_group != LocalGroup::none) {
        out += " family=" + to_string(loss.family);
        out += " weights=" + to_string(loss.weight_mode);
        if (loss.weight_mode == WeightMode::from_prior) {
            out += "(" + to_string(loss.weight_prior) + ")";
        }
        std::snprintf(buf, sizeof(buf), " alpha=%g", loss.alpha);
        out += buf;
    }
    out += " global=" + to_string(loss.global_prior);
    if (loss.global_prior != PriorChoice::none) {
        std::snprintf(buf, sizeof(buf), " beta=%g", loss.beta);
        out += buf;
    }
    return out;
}

namespace {

void check_known_keys(const KvFile& kv, const std::string& section,
                      const std::set<std::string>& allowed) {
    for (const auto* block : kv.sections(section)) {
        for (const auto& [key, value] : block->entries) {
            if (!allowed.count(key)) {
                throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
            }
        }
    }
}

}  // namespace

TrainConfig TrainConfig::from_kv(const KvFile& kv) {
    check_known_keys(kv, "model", {"kind", "memo.head", "vocab.min.count", "vocab.max.piece"});
    check_known_keys(kv, "loss", {"local.group", "family", "weight.mode", "weight.prior",
                                  "global.prior", "alpha", "beta"});
    check_known_keys(kv, "encoder", {"layers", "heads", "dim", "ff.dim", "max.len"});
    check_known_keys(kv, "trainer",
                     {"lr", "batch.size", "max.epochs", "patience", "seeds", "threshold"});

    TrainConfig c;
    if (auto v = kv.get("model", "kind")) c.model = parse_model_kind(*v);
    if (auto v = kv.get("model", "memo.head")) c.memo_head = parse_memo_head(*v);
    if (auto v = kv.get("model", "vocab.min.count")) c.vocab_min_count = parse_int("vocab.min.count", *v);
    if (auto v = kv.get("model", "vocab.max.piece")) c.vocab_max_piece = parse_int("vocab.max.piece", *v);

    if (auto v = kv.get("loss", "local.group")) c.loss.local_group = parse_local_group(*v);
    if (auto v = kv.get("loss", "family")) c.loss.family = parse_loss_family(*v);
    if (auto v = kv.get("loss", "weight.mode")) c.loss.weight_mode = parse_weight_mode(*v);
    if (auto v = kv.get("loss", "weight.prior")) c.loss.weight_prior = parse_prior_choice(*v);
    if (auto v = kv.get("loss", "global.prior")) c.loss.global_prior = parse_prior_choice(*v);
    if (auto v = kv.get("loss", "alpha")) c.loss.alpha = parse_double("alpha", *v);
    if (auto v = kv.get("loss", "beta")) c.loss.beta = parse_double("beta", *v);

    if (auto v = kv.get("encoder", "layers")) c.encoder.layers = parse_int("layers", *v);
    if (auto v = kv.get("encoder", "heads")) c.encoder.heads = parse_int("heads", *v);
    if (auto v = kv.get("encoder", "dim")) c.encoder.dim = parse_int("dim", *v);
    if (auto v = kv.get("encoder", "ff.dim")) c.encoder.ff_dim = parse_int("ff.dim", *v);
    if (auto v = kv.get("encoder", "max.len")) c.encoder.max_len = parse_int("max.len", *v);

    if (auto v = kv.get("trainer", "lr")) c.learning_rate = parse_double("lr", *v);
    if (auto v = kv.get("trainer", "batch.size")) c.batch_size = parse_int("batch.size", *v);
    if (auto v = kv.get("trainer", "max.epochs")) c.max_epochs = parse_int("max.epochs", *v);
    if (auto v = kv.get("trainer", "patience")) c.patience = parse_int("patience", *v);
    if (auto v = kv.get("trainer", "threshold")) c.threshold = parse_double("threshold", *v);
    if (auto v = kv.get("trainer", "seeds")) {
        c.seeds.clear();
        for (const auto& item : split_list(*v)) {
            try {
                c.seeds.push_back(std::stoull(item));
            } catch (const std::exception&) {
                throw ConfigError("key 'seeds': expected integers, got '" + item + "'");
            }
        }
    }
    return c;
}

std::string TrainConfig::to_kv_string() const {
    char buf[64];
    std::ostringstream out;
    out << "[model]\n";
    out << "kind = " << to_string(model) << "\n";
    out << "memo.head = " << to_string(memo_head) << "\n";
    out << "vocab.min.count = " << vocab_min_count << "\n";
    out << "vocab.max.piece = " << vocab_max_piece << "\n";
    out << "\n[loss]\n";
    out << "local.group = " << to_string(loss.local_group) << "\n";
    out << "family = " << to_string(loss.family) << "\n";
    out << "weight.mode = " << to_string(loss.weight_mode) << "\n";
    out << "weight.prior = " << to_string(loss.weight_prior) << "\n";
    out << "global.prior = " << to_string(loss.global_prior) << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", loss.alpha);
    out << "alpha = " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", loss.beta);
    out << "beta = " << buf << "\n";
    out << "\n[encoder]\n";
    out << "layers = " << encoder.layers << "\n";
    out << "heads = " << encoder.heads << "\n";
    out << "dim = " << encoder.dim << "\n";
    out << "ff.dim = " << encoder.ff_dim << "\n";
    out << "max.len = " << encoder.max_len << "\n";
    out << "\n[trainer]\n";
    std::snprintf(buf, sizeof(buf), "%.17g", learning_rate);
    out << "lr = " << buf << "\n";
    out << "batch.size = " << batch_size << "\n";
    out << "max.epochs = " << max_epochs << "\n";
    out << "patience = " << patience << "\n";
    out << "seeds = ";
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        out << (i ? "," : "") << seeds[i];
    }
    out << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", threshold);
    out << "threshold = " << buf << "\n";
    return out.str();
}

EarlyStopper::EarlyStopper(int patience) : patience_(patience) {
    if (patience < 1) {
        throw ConfigError("patience must be at least 1");
    }
}

bool EarlyStopper::observe(double value, int epoch) {
    if (!seen_ || value > best_value_) {
        seen_ = true;
        best_value_ = value;
        best_epoch_ = epoch;
        since_best_ = 0;
        return false;
    }
    ++since_best_;
    return since_best_ >= patience_;
}

int median_lower(std::vector<int> values) {
    if (values.empty()) {
        throw std::invalid_argument("median_lower: empty list");
    }
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

void ensure_finite_loss(double value, const std::string& context) {
    if (!std::isfinite(value)) {
        throw DivergenceError("training loss became non-finite " + context);
    }
}

AdamOptimizer::AdamOptimizer(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamOptimizer::step(ParamStore& params) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (auto& [name, tensor] : params.tensors) {
        auto& [m, v] = state_[name];
        auto& values = tensor.values_mut();
        if (m.size() != values.size()) {
            m.assign(values.size(), 0.0);
            v.assign(values.size(), 0.0);
        }
        if (!tensor.has_grad()) {
            continue;
        }
        const auto& g = tensor.grad();
        for (std::size_t i = 0; i < values.size(); ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            values[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

namespace {

std::vector<std::string> texts_of(const DatasetSplit& split) {
    std::vector<std::string> out;
    out.reserve(split.examples.size());
    for (const auto& e : split.examples) out.push_back(e.text);
    return out;
}

std::vector<TokenSequence> tokenize_split(const Vocabulary& vocab, const EmotionSet& set,
                                          ModelKind kind, const DatasetSplit& split) {
    std::vector<TokenSequence> out;
    out.reserve(split.examples.size());
    for (const auto& e : split.examples) {
        out.push_back(kind == ModelKind::demux ? tokenize_demux(vocab, set, e.text)
                                               : tokenize_memo(vocab, e.text));
    }
    return out;
}

struct LossContext {
    LossConfig loss;
    PairWeights weights;
    CorrelationPrior global_prior;
};

CorrelationPrior prior_of(PriorChoice choice, const std::vector<std::vector<int>>& labels,
                          const EmotionSet& set) {
    switch (choice) {
        case PriorChoice::empirical_rho: return empirical_correlation(labels);
        case PriorChoice::wheel_theta: return wheel_prior(set);
        case PriorChoice::none: break;
    }
    throw ConfigError("prior_of: no prior requested");
}

LossContext make_loss_context(const TrainConfig& config, const std::vector<std::vector<int>>& labels,
                              const EmotionSet& set) {
    LossContext ctx;
    ctx.loss = config.loss;
    const int n = set.size();
    if (config.loss.local_group != LocalGroup::none &&
        config.loss.weight_mode == WeightMode::from_prior) {
        ctx.weights = pair_weights(prior_of(config.loss.weight_prior, labels, set),
                                   WeightMode::from_prior);
    } else {
        ctx.weights = PairWeights::ones(n);
    }
    if (config.loss.global_prior != PriorChoice::none) {
        ctx.global_prior = prior_of(config.loss.global_prior, labels, set);
    }
    return ctx;
}

Tensor example_loss(const TextModel& model, const Vocabulary& vocab, const EmotionSet& set,
                    const TokenSequence& seq, const std::vector<int>& y, const LossContext& ctx) {
    ModelOutput out = model.predict(seq, vocab, set);
    Tensor bce = bce_loss(y, out.probabilities);
    Tensor local, global;
    if (ctx.loss.local_group != LocalGroup::none) {
        LossTarget target;
        target.predictions = out.probabilities;
        target.representations = out.emotion_representations;
        local = local_loss(y, target, ctx.loss, ctx.weights);
    }
    if (ctx.loss.global_prior != PriorChoice::none) {
        global = global_cosine_loss(out.emotion_representations, ctx.global_prior);
    }
    return combined_loss(bce, local, global, ctx.loss.alpha, ctx.loss.beta);
}

void run_epoch(TextModel& model, const Vocabulary& vocab, const EmotionSet& set,
               const std::vector<TokenSequence>& sequences, const DatasetSplit& data,
               const LossContext& ctx, AdamOptimizer& adam, int batch_size, Rng& rng, int epoch) {
    std::vector<int> order(data.examples.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const int m = static_cast<int>(order.size());
    for (int start = 0; start < m; start += batch_size) {
        const int end = std::min(m, start + batch_size);
        std::vector<Tensor> losses;
        losses.reserve(static_cast<std::size_t>(end - start));
        for (int k = start; k < end; ++k) {
            const int idx = order[static_cast<std::size_t>(k)];
            losses.push_back(example_loss(model, vocab, set, sequences[static_cast<std::size_t>(idx)],
                                          data.examples[static_cast<std::size_t>(idx)].labels, ctx));
        }
        Tensor batch_loss = mean(concat_scalars(losses));
        ensure_finite_loss(batch_loss.item(), "at epoch " + std::to_string(epoch) +
                                                  ", batch starting at example " +
                                                  std::to_string(start));
        model.params().zero_grad();
        batch_loss.backward();
        adam.step(model.params());
    }
}

std::vector<std::vector<double>> predict_matrix(const TextModel& model, const Vocabulary& vocab,
                                                const EmotionSet& set,
                                                const std::vector<TokenSequence>& sequences) {
    std::vector<std::vector<double>> out;
    out.reserve(sequences.size());
    for (const auto& seq : sequences) {
        out.push_back(model.predict(seq, vocab, set).probabilities.values());
    }
    return out;
}

}  // namespace

TrainOutcome train_model(const TrainConfig& config, const EmotionSet& set,
                         const DatasetSplit& train, const DatasetSplit& dev, std::uint64_t seed) {
    config.validate();
    set.validate();
    if (train.examples.empty() || dev.examples.empty()) {
        throw DataError("train_model: train and dev splits must be nonempty");
    }

    Vocabulary vocab = Vocabulary::build(texts_of(train), set, config.vocab_max_piece,
                                         config.vocab_min_count);
    TextModel model = TextModel::init(config.model, config.memo_head, config.encoder, vocab.size(),
                                      set.size(), seed);
    const auto train_seqs = tokenize_split(vocab, set, config.model, train);
    const auto dev_seqs = tokenize_split(vocab, set, config.model, dev);
    const LossContext ctx = make_loss_context(config, train.label_matrix(), set);
    const auto dev_gold = dev.label_matrix();

    AdamOptimizer adam(config.learning_rate);
    EarlyStopper stopper(config.patience);
    Rng shuffle_rng(seed + 0x9E3779B97F4A7C15ULL);

    TrainOutcome outcome;
    ParamStore best = model.params().snapshot();
    int stopped = config.max_epochs;
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        run_epoch(model, vocab, set, train_seqs, train, ctx, adam, config.batch_size, shuffle_rng,
                  epoch);
        const auto probs = predict_matrix(model, vocab, set, dev_seqs);
        const EvaluationReport report = evaluate(dev_gold, probs, config.threshold);
        outcome.dev_js_history.push_back(report.jaccard);
        const bool stop = stopper.observe(report.jaccard, epoch);
        if (stopper.best_epoch() == epoch) {
            best = model.params().snapshot();
            outcome.dev_report = report;
        }
        if (stop) {
            stopped = epoch;
            break;
        }
    }
    outcome.best_epoch = stopper.best_epoch();
    outcome.stopped_epoch = stopped;
    model.params() = std::move(best);
    outcome.fitted = FittedModel{std::move(model), std::move(vocab), set, config.threshold};
    return outcome;
}

FittedModel retrain_full(const TrainConfig& config, const std::vector<int>& best_epochs,
                         const EmotionSet& set, const DatasetSplit& train_plus_dev,
                         std::uint64_t seed) {
    config.validate();
    const int epochs = median_lower(best_epochs);
    Vocabulary vocab = Vocabulary::build(texts_of(train_plus_dev), set, config.vocab_max_piece,
                                         config.vocab_min_count);
    TextModel model = TextModel::init(config.model, config.memo_head, config.encoder, vocab.size(),
                                      set.size(), seed);
    const auto seqs = tokenize_split(vocab, set, config.model, train_plus_dev);
    const LossContext ctx = make_loss_context(config, train_plus_dev.label_matrix(), set);
    AdamOptimizer adam(config.learning_rate);
    Rng shuffle_rng(seed + 0x9E3779B97F4A7C15ULL);
    for (int epoch = 1; epoch <= epochs; ++epoch) {
        run_epoch(model, vocab, set, seqs, train_plus_dev, ctx, adam, config.batch_size, shuffle_rng,
                  epoch);
    }
    return FittedModel{std::move(model), std::move(vocab), set, config.threshold};
}

std::vector<std::vector<double>> predict_probabilities(const FittedModel& fitted,
                                                       const DatasetSplit& split) {
    const auto seqs = tokenize_split(fitted.vocab, fitted.set, fitted.model.kind(), split);
    return predict_matrix(fitted.model, fitted.vocab, fitted.set, seqs);
}

EvaluationReport evaluate_split(const FittedModel& fitted, const DatasetSplit& split) {
    return evaluate(split.label_matrix(), predict_probabilities(fitted, split), fitted.threshold);
}

SquareMatrix prediction_correlation(const FittedModel& fitted, const DatasetSplit& split) {
    const auto probs = predict_probabilities(fitted, split);
    const auto flat = pearson_columns(probs);
    SquareMatrix out(fitted.set.size());
    out.v = flat;
    return out;
}

}  // namespace emocorr
