#include "emocorr/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "emocorr/errors.hpp"
#include "emocorr/rng.hpp"

namespace emocorr {

void EncoderConfig::validate() const {
    if (layers < 1 || heads < 1 || dim < 1 || ff_dim < 1 || max_len < 1) {
        throw ConfigError("encoder config values must be positive");
    }
    if (dim % heads != 0) {
        throw ConfigError("encoder dim " + std::to_string(dim) + " must be divisible by heads " +
                          std::to_string(heads));
    }
}

Tensor& ParamStore::at(const std::string& name) {
    const auto it = tensors.find(name);
    if (it == tensors.end()) {
        throw std::out_of_range("parameter '" + name + "' not found");
    }
    return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
    const auto it = tensors.find(name);
    if (it == tensors.end()) {
        throw std::out_of_range("parameter '" + name + "' not found");
    }
    return it->second;
}

void ParamStore::add(const std::string& name, Tensor t) {
    if (!tensors.emplace(name, std::move(t)).second) {
        throw std::invalid_argument("duplicate parameter '" + name + "'");
    }
}

void ParamStore::zero_grad() {
    for (auto& [name, t] : tensors) {
        t.zero_grad();
    }
}

ParamStore ParamStore::snapshot() const {
    ParamStore out;
    for (const auto& [name, t] : tensors) {
        out.add(name, Tensor::from_values(t.shape(), t.values(), t.requires_grad()));
    }
    return out;
}

void ParamStore::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write checkpoint file: " + path);
    }
    char buf[40];
    for (const auto& [name, t] : tensors) {
        out << name << ' ' << t.rank();
        for (int d : t.shape()) out << ' ' << d;
        out << '\n';
        const auto& v = t.values();
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
            out << buf << (i + 1 == v.size() ? "" : " ");
        }
        out << '\n';
    }
    if (!out) {
        throw DataError("failed writing checkpoint file: " + path);
    }
}

ParamStore ParamStore::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open checkpoint file: " + path);
    }
    ParamStore out;
    std::string header;
    while (std::getline(in, header)) {
        if (header.empty()) continue;
        std::istringstream hs(header);
        std::string name;
        int rank = 0;
        if (!(hs >> name >> rank) || rank < 1) {
            throw DataError(path + ": bad tensor header '" + header + "'");
        }
        Shape shape(static_cast<std::size_t>(rank));
        long total = 1;
        for (int i = 0; i < rank; ++i) {
            if (!(hs >> shape[static_cast<std::size_t>(i)])) {
                throw DataError(path + ": bad shape in header '" + header + "'");
            }
            total *= shape[static_cast<std::size_t>(i)];
        }
        std::string values_line;
        if (!std::getline(in, values_line)) {
            throw DataError(path + ": missing values for tensor '" + name + "'");
        }
        std::istringstream vs(values_line);
        std::vector<double> values(static_cast<std::size_t>(total));
        for (long i = 0; i < total; ++i) {
            if (!(vs >> values[static_cast<std::size_t>(i)])) {
                throw DataError(path + ": short value row for tensor '" + name + "'");
            }
        }
        out.add(name, Tensor::from_values(shape, std::move(values), true));
    }
    return out;
}

namespace {

Tensor init_matrix(Rng& rng, int rows, int cols, int fan_in = 0) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in > 0 ? fan_in : rows));
    std::vector<double> v(static_cast<std::size_t>(rows) * cols);
    for (auto& x : v) x = rng.uniform(-bound, bound);
    return Tensor::from_values({rows, cols}, std::move(v), true);
}

Tensor positional_encoding(int len, int dim) {
    std::vector<double> v(static_cast<std::size_t>(len) * dim);
    for (int pos = 0; pos < len; ++pos) {
        for (int i = 0; i < dim; ++i) {
            const double rate = std::pow(10000.0, static_cast<double>(2 * (i / 2)) / dim);
            const double angle = pos / rate;
            v[static_cast<std::size_t>(pos) * dim + i] = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    }
    return Tensor::from_values({len, dim}, std::move(v));
}

Tensor linear(const Tensor& x, const ParamStore& params, const std::string& prefix) {
    return add_row_vector(matmul(x, params.at(prefix + ".w")), params.at(prefix + ".b"));
}

}  // namespace

Tensor encode_tokens(const std::vector<int>& ids, const EncoderConfig& config,
                     const ParamStore& params) {
    config.validate();
    const int len = static_cast<int>(ids.size());
    if (len == 0) {
        throw std::invalid_argument("encode_tokens: empty sequence");
    }
    if (len > config.max_len) {
        throw std::invalid_argument("encode_tokens: sequence length " + std::to_string(len) +
                                    " exceeds maximum " + std::to_string(config.max_len) +
                                    " (sequences are never truncated)");
    }
    const int dim = config.dim;
    const int head_dim = dim / config.heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

    Tensor x = add(embedding_lookup(params.at("embedding"), ids), positional_encoding(len, dim));
    for (int l = 0; l < config.layers; ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        Tensor q = linear(x, params, p + "attn.q");
        Tensor k = linear(x, params, p + "attn.k");
        Tensor v = linear(x, params, p + "attn.v");
        std::vector<Tensor> head_outputs;
        for (int h = 0; h < config.heads; ++h) {
            Tensor qh = slice_cols(q, h * head_dim, head_dim);
            Tensor kh = slice_cols(k, h * head_dim, head_dim);
            Tensor vh = slice_cols(v, h * head_dim, head_dim);
            Tensor scores = mul(matmul(qh, transpose(kh)), Tensor::scalar(scale));
            head_outputs.push_back(matmul(softmax_rows(scores), vh));
        }
        Tensor attn = linear(concat_cols(head_outputs), params, p + "attn.o");
        x = layer_norm_rows(add(x, attn), params.at(p + "ln1.gain"), params.at(p + "ln1.bias"));
        Tensor ff = linear(gelu(linear(x, params, p + "ff.1")), params, p + "ff.2");
        x = layer_norm_rows(add(x, ff), params.at(p + "ln2.gain"), params.at(p + "ln2.bias"));
    }
    return x;
}

ModelOutput demux_predict(const Tensor& embeddings, const std::vector<TokenSpan>& spans,
                          const ParamStore& params) {
    const int len = embeddings.shape()[0];
    const int dim = embeddings.shape()[1];
    ModelOutput out;
    std::vector<Tensor> probs;
    for (const auto& span : spans) {
        if (span.start < 0 || span.length < 1 || span.start + span.length > len) {
            throw std::out_of_range("demux_predict: span [" + std::to_string(span.start) + ", " +
                                    std::to_string(span.start + span.length) +
                                    ") out of bounds for sequence length " + std::to_string(len));
        }
        Tensor h = mean(slice_rows(embeddings, span.start, span.length), 0);  // [dim]
        Tensor hidden = tanh(linear(reshape(h, {1, dim}), params, "head.1"));
        Tensor logit = linear(hidden, params, "head.2");  // [1x1]
        probs.push_back(sigmoid(reshape(logit, {1})));
        out.emotion_representations.push_back(h);
    }
    out.probabilities = concat_scalars(probs);
    return out;
}

ModelOutput memo_predict(const Tensor& embeddings, int mask_position, MemoHead head,
                         const ParamStore& params, const Vocabulary& vocab, const EmotionSet& set) {
    const int len = embeddings.shape()[0];
    const int dim = embeddings.shape()[1];
    if (mask_position < 0 || mask_position >= len) {
        throw std::out_of_range("memo_predict: mask position " + std::to_string(mask_position) +
                                " out of bounds for sequence length " + std::to_string(len));
    }
    Tensor h_row = slice_rows(embeddings, mask_position, 1);  // [1 x dim]
    ModelOutput out;
    out.mask_representation = reshape(h_row, {dim});
    if (head == MemoHead::new_classifier) {
        Tensor hidden = tanh(linear(h_row, params, "head.1"));
        Tensor logits = linear(hidden, params, "head.2");  // [1 x n]
        out.probabilities = sigmoid(reshape(logits, {logits.shape()[1]}));
        return out;
    }
    Tensor logits = reshape(linear(h_row, params, "mlm"), {vocab.size()});
    std::vector<Tensor> probs;
    for (const auto& name : set.names) {
        const int id = vocab.id_of(name);
        if (id < 0) {
            throw ConfigError("mlm head requires a whole-word vocabulary entry for emotion '" + name +
                              "'");
        }
        probs.push_back(sigmoid(element(logits, id)));
    }
    out.probabilities = concat_scalars(probs);
    return out;
}

TextModel TextModel::init(ModelKind kind, MemoHead memo_head, const EncoderConfig& config,
                          int vocab_size, int n_emotions, std::uint64_t seed) {
    config.validate();
    if (vocab_size < Vocabulary::kUnk + 1) {
        throw ConfigError("vocabulary too small");
    }
    if (n_emotions < 2) {
        throw ConfigError("need at least 2 emotions");
    }
    TextModel m;
    m.kind_ = kind;
    m.memo_head_ = memo_head;
    m.config_ = config;
    m.n_emotions_ = n_emotions;

    Rng rng(seed);
    const int dim = config.dim;
    auto& ps = m.params_;
    // embedding rows scale with the feature dimension, not the vocab size
    ps.add("embedding", init_matrix(rng, vocab_size, dim, dim));
    for (int l = 0; l < config.layers; ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        for (const char* name : {"attn.q", "attn.k", "attn.v", "attn.o"}) {
            ps.add(p + name + ".w", init_matrix(rng, dim, dim));
            ps.add(p + name + ".b", Tensor::zeros({dim}, true));
        }
        ps.add(p + "ln1.gain", Tensor::full({dim}, 1.0, true));
        ps.add(p + "ln1.bias", Tensor::zeros({dim}, true));
        ps.add(p + "ff.1.w", init_matrix(rng, dim, config.ff_dim));
        ps.add(p + "ff.1.b", Tensor::zeros({config.ff_dim}, true));
        ps.add(p + "ff.2.w", init_matrix(rng, config.ff_dim, dim));
        ps.add(p + "ff.2.b", Tensor::zeros({dim}, true));
        ps.add(p + "ln2.gain", Tensor::full({dim}, 1.0, true));
        ps.add(p + "ln2.bias", Tensor::zeros({dim}, true));
    }
    if (kind == ModelKind::demux) {
        ps.add("head.1.w", init_matrix(rng, dim, dim));
        ps.add("head.1.b", Tensor::zeros({dim}, true));
        ps.add("head.2.w", init_matrix(rng, dim, 1));
        ps.add("head.2.b", Tensor::zeros({1}, true));
    } else if (memo_head == MemoHead::new_classifier) {
        ps.add("head.1.w", init_matrix(rng, dim, dim));
        ps.add("head.1.b", Tensor::zeros({dim}, true));
        ps.add("head.2.w", init_matrix(rng, dim, n_emotions));
        ps.add("head.2.b", Tensor::zeros({n_emotions}, true));
    } else {
        ps.add("mlm.w", init_matrix(rng, dim, vocab_size));
        ps.add("mlm.b", Tensor::zeros({vocab_size}, true));
    }
    return m;
}

Tensor TextModel::encode(const TokenSequence& seq) const {
    return encode_tokens(seq.ids, config_, params_);
}

ModelOutput TextModel::predict(const TokenSequence& seq, const Vocabulary& vocab,
                               const EmotionSet& set) const {
    Tensor embeddings = encode(seq);
    if (kind_ == ModelKind::demux) {
        if (static_cast<int>(seq.emotion_spans.size()) != n_emotions_) {
            throw std::invalid_argument("demux sequence must carry one span per emotion");
        }
        return demux_predict(embeddings, seq.emotion_spans, params_);
    }
    return memo_predict(embeddings, seq.mask_position, memo_head_, params_, vocab, set);
}

}  // namespace emocorr
