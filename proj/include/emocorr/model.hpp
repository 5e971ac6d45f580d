#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "emocorr/label_space.hpp"
#include "emocorr/tensor.hpp"
#include "emocorr/vocab.hpp"

namespace emocorr {

struct EncoderConfig {
    int layers = 2;
    int heads = 2;
    int dim = 32;
    int ff_dim = 64;
    int max_len = 64;

    void validate() const;
};

enum class ModelKind { demux, memo };
enum class MemoHead { new_classifier, mlm_analog };

// Named parameter tensors; map order keeps every traversal deterministic.
struct ParamStore {
    std::map<std::string, Tensor> tensors;

    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    void add(const std::string& name, Tensor t);
    void zero_grad();

    // Deep value copy detached from any graph.
    ParamStore snapshot() const;

    // Textual key -> tensor map with shape headers; round-trips exactly.
    void save(const std::string& path) const;
    static ParamStore load(const std::string& path);
};

struct ModelOutput {
    Tensor probabilities;                        // [n], strictly in (0,1)
    std::vector<Tensor> emotion_representations; // Demux: n subtoken-averaged vectors
    Tensor mask_representation;                  // MEmo: the mask embedding
};

// Per-token contextual embeddings: token embedding + sinusoidal positions,
// then `layers` blocks of multi-head self-attention and feed-forward, each
// with residual connection and layer norm.
Tensor encode_tokens(const std::vector<int>& ids, const EncoderConfig& config,
                     const ParamStore& params);

// Per-emotion probabilities from subtoken-averaged span representations,
// one shared 2-layer head applied per emotion.
ModelOutput demux_predict(const Tensor& embeddings, const std::vector<TokenSpan>& spans,
                          const ParamStore& params);

// Probabilities from the mask embedding, via a joint 2-layer classifier or
// a vocabulary-logit decoder read at each emotion's whole-word token.
ModelOutput memo_predict(const Tensor& embeddings, int mask_position, MemoHead head,
                         const ParamStore& params, const Vocabulary& vocab, const EmotionSet& set);

class TextModel {
public:
    static TextModel init(ModelKind kind, MemoHead memo_head, const EncoderConfig& config,
                          int vocab_size, int n_emotions, std::uint64_t seed);

    ModelKind kind() const { return kind_; }
    MemoHead memo_head() const { return memo_head_; }
    const EncoderConfig& encoder_config() const { return config_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    Tensor encode(const TokenSequence& seq) const;
    ModelOutput predict(const TokenSequence& seq, const Vocabulary& vocab,
                        const EmotionSet& set) const;

private:
    ModelKind kind_ = ModelKind::demux;
    MemoHead memo_head_ = MemoHead::new_classifier;
    EncoderConfig config_;
    int n_emotions_ = 0;
    ParamStore params_;
};

}  // namespace emocorr
