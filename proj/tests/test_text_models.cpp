#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "emocorr/errors.hpp"
#include "emocorr/losses.hpp"
#include "emocorr/model.hpp"
#include "emocorr/rng.hpp"
#include "emocorr/vocab.hpp"
#include "support/gradcheck.hpp"

using namespace emocorr;

namespace {

std::vector<std::string> tiny_corpus() {
    return {"happy happy days are here", "sad and gloomy skies today",
            "happy sad mixed feelings", "the optimisms of youth"};
}

EmotionSet two_emotions() {
    EmotionSet s;
    s.names = {"joyful", "gloomy"};
    s.wheel_angle_deg = {std::optional<double>(0.0), std::optional<double>(180.0)};
    return s;
}

}  // namespace

TEST_CASE("demux prompt strings") {
    CHECK(build_demux_prompt(EmotionSet::semeval11()) ==
          "anger, anticipation, disgust, fear, joy, love, optimism, pessimism, sadness, "
          "surprise, or trust?");
    EmotionSet two;
    two.names = {"anger", "joy"};
    CHECK(build_demux_prompt(two) == "anger, or joy?");
    EmotionSet one;
    one.names = {"anger"};
    CHECK_THROWS_AS(build_demux_prompt(one), ConfigError);
}

TEST_CASE("memo prompt strings") {
    CHECK(build_memo_prompt("I can't stop smiling") == "emotion [MASK] in tweet I can't stop smiling");
    CHECK(build_memo_prompt("") == "emotion [MASK] in tweet ");
    CHECK(build_memo_prompt("my tweet about tweets") ==
          "emotion [MASK] in tweet my tweet about tweets");
}

TEST_CASE("vocabulary build") {
    Vocabulary v = Vocabulary::build(tiny_corpus(), two_emotions(), 4, 2);
    // reserved markers occupy fixed low ids
    CHECK(v.id_of("[PAD]") == 0);
    CHECK(v.id_of("[CLS]") == 1);
    CHECK(v.id_of("[SEP]") == 2);
    CHECK(v.id_of("[MASK]") == 3);
    CHECK(v.id_of("[UNK]") == 4);
    // emotion names are forced whole tokens even when rare in the corpus
    CHECK(v.contains("joyful"));
    CHECK(v.contains("gloomy"));
    CHECK(tokenize_word(v, "joyful").size() == 1);
    // frequent corpus words become whole tokens
    CHECK(v.contains("happy"));
    CHECK(v.contains("sad"));
    // rare words split into fixed-length pieces
    const auto pieces = tokenize_word(v, "optimisms");
    CHECK(pieces.size() == 3);
    CHECK(v.tokens[pieces[0]] == "opti");
    CHECK(v.tokens[pieces[1]] == "mism");
    CHECK(v.tokens[pieces[2]] == "s");
    // empty text gives zero text tokens
    CHECK(tokenize_text(v, "").empty());
}

TEST_CASE("vocabulary save/load round trip") {
    Vocabulary v = Vocabulary::build(tiny_corpus(), two_emotions(), 4, 2);
    v.save("vocab_test.txt");
    Vocabulary w = Vocabulary::load("vocab_test.txt", 4);
    CHECK(w.tokens == v.tokens);
    CHECK(w.size() == v.size());
    std::remove("vocab_test.txt");
}

TEST_CASE("demux tokenization structure") {
    Vocabulary v = Vocabulary::build(tiny_corpus(), two_emotions(), 4, 2);
    TokenSequence seq = tokenize_demux(v, two_emotions(), "happy days");
    CHECK(seq.ids.front() == Vocabulary::kCls);
    CHECK(seq.ids.back() == Vocabulary::kSep);
    int seps = 0;
    for (int id : seq.ids) {
        if (id == Vocabulary::kSep) ++seps;
    }
    CHECK(seps == 2);  // one between prompt and text, one terminal
    REQUIRE(seq.emotion_spans.size() == 2);
    // spans are disjoint, ordered, and land on the emotion tokens
    CHECK(seq.emotion_spans[0].start == 1);
    CHECK(seq.emotion_spans[0].length == 1);
    CHECK(v.tokens[seq.ids[seq.emotion_spans[0].start]] == "joyful");
    CHECK(seq.emotion_spans[1].start >
          seq.emotion_spans[0].start + seq.emotion_spans[0].length);
    CHECK(v.tokens[seq.ids[seq.emotion_spans[1].start]] == "gloomy");
    // prompt tokens: [CLS] joyful , or gloomy ? [SEP]
    CHECK(v.tokens[seq.ids[2]] == ",");
    CHECK(v.tokens[seq.ids[3]] == "or");
    CHECK(v.tokens[seq.ids[5]] == "?");
}

TEST_CASE("demux span bookkeeping survives prompt reordering") {
    Vocabulary v = Vocabulary::build(tiny_corpus(), two_emotions(), 4, 2);
    EmotionSet fwd = two_emotions();
    EmotionSet rev = two_emotions();
    std::swap(rev.names[0], rev.names[1]);
    std::swap(rev.wheel_angle_deg[0], rev.wheel_angle_deg[1]);
    TokenSequence a = tokenize_demux(v, fwd, "happy");
    TokenSequence b = tokenize_demux(v, rev, "happy");
    // each span still points at its own emotion's tokens
    CHECK(v.tokens[a.ids[a.emotion_spans[0].start]] == "joyful");
    CHECK(v.tokens[b.ids[b.emotion_spans[0].start]] == "gloomy");
    CHECK(v.tokens[b.ids[b.emotion_spans[1].start]] == "joyful");
}

TEST_CASE("multi-piece emotion names keep one span per emotion") {
    // hand-built vocabulary without the whole-word entry for "gloomy"
    Vocabulary v;
    v.max_piece_length = 4;
    v.add("joyful");
    v.add("gloo");
    v.add("my");
    v.add(",");
    v.add("or");
    v.add("?");
    TokenSequence seq = tokenize_demux(v, two_emotions(), "");
    REQUIRE(seq.emotion_spans.size() == 2);
    CHECK(seq.emotion_spans[1].length == 2);
    CHECK(v.tokens[seq.ids[seq.emotion_spans[1].start]] == "gloo");
    CHECK(v.tokens[seq.ids[seq.emotion_spans[1].start + 1]] == "my");
}

TEST_CASE("memo tokenization carries exactly one mask") {
    Vocabulary v = Vocabulary::build(tiny_corpus(), two_emotions(), 4, 2);
    TokenSequence seq = tokenize_memo(v, "happy days");
    int masks = 0;
    for (int id : seq.ids) {
        if (id == Vocabulary::kMask) ++masks;
    }
    CHECK(masks == 1);
    CHECK(seq.ids[seq.mask_position] == Vocabulary::kMask);
    CHECK(seq.mask_position == 2);  // [CLS] emotion [MASK] ...
    // a literal [MASK] inside the text is rejected
    CHECK_THROWS_AS(tokenize_memo(v, "evil [MASK] injection"), DataError);
}

TEST_CASE("encoder output shape and determinism") {
    Vocabulary v = Vocabulary::build(tiny_corpus(), two_emotions(), 4, 2);
    EncoderConfig cfg;
    cfg.layers = 2;
    cfg.heads = 2;
    cfg.dim = 16;
    cfg.ff_dim = 24;
    cfg.max_len = 32;
    TextModel m1 = TextModel::init(ModelKind::demux, MemoHead::new_classifier, cfg, v.size(), 2, 99);
    TextModel m2 = TextModel::init(ModelKind::demux, MemoHead::new_classifier, cfg, v.size(), 2, 99);
    TokenSequence seq = tokenize_demux(v, two_emotions(), "happy sad days");
    Tensor e1 = m1.encode(seq);
    Tensor e2 = m2.encode(seq);
    CHECK(e1.shape() == Shape{static_cast<int>(seq.ids.size()), 16});
    CHECK(e1.values() == e2.values());  // bit-identical across runs

    // permuting two text tokens changes outputs (position encoding active)
    TokenSequence swapped = seq;
    std::swap(swapped.ids[seq.ids.size() - 2], swapped.ids[seq.ids.size() - 3]);
    Tensor e3 = m1.encode(swapped);
    bool any_diff = false;
    for (std::size_t i = 0; i < e1.values().size(); ++i) {
        if (e1.values()[i] != e3.values()[i]) any_diff = true;
    }
    CHECK(any_diff);

    // overlong sequences error out rather than truncate
    EncoderConfig tiny = cfg;
    tiny.max_len = 3;
    CHECK_THROWS_AS(encode_tokens(seq.ids, tiny, m1.params()), std::invalid_argument);
}

TEST_CASE("demux predict span averaging and zero-head behavior") {
    EncoderConfig cfg;
    cfg.dim = 4;
    cfg.heads = 1;
    cfg.ff_dim = 8;
    Vocabulary v;
    TextModel m = TextModel::init(ModelKind::demux, MemoHead::new_classifier, cfg, 8, 2, 1);
    Tensor emb = Tensor::from_values(
        {4, 4}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 0.5, 0.5, 0.5, 0.5});

    ModelOutput out = demux_predict(emb, {{0, 1}, {1, 2}}, m.params());
    REQUIRE(out.emotion_representations.size() == 2);
    CHECK(out.emotion_representations[0].values() == std::vector<double>{1, 2, 3, 4});
    CHECK(out.emotion_representations[1].values() == std::vector<double>{7, 8, 9, 10});  // (u+v)/2
    CHECK(out.probabilities.size() == 2);

    // zero-initialized final layer gives sigma(0) = 0.5 everywhere
    for (auto& x : m.params().at("head.2.w").values_mut()) x = 0.0;
    ModelOutput flat = demux_predict(emb, {{0, 1}, {1, 2}}, m.params());
    CHECK(flat.probabilities.values() == std::vector<double>{0.5, 0.5});

    CHECK_THROWS_AS(demux_predict(emb, {{3, 2}}, m.params()), std::out_of_range);
}

TEST_CASE("memo predict heads") {
    EmotionSet set = two_emotions();
    Vocabulary v = Vocabulary::build(tiny_corpus(), set, 4, 2);
    EncoderConfig cfg;
    cfg.dim = 8;
    cfg.heads = 2;
    cfg.ff_dim = 12;
    Tensor emb = Tensor::full({5, 8}, 0.3);

    TextModel nc = TextModel::init(ModelKind::memo, MemoHead::new_classifier, cfg, v.size(), 2, 5);
    ModelOutput a = memo_predict(emb, 2, MemoHead::new_classifier, nc.params(), v, set);
    CHECK(a.probabilities.size() == 2);
    CHECK(a.mask_representation.values() == std::vector<double>(8, 0.3));
    CHECK(a.emotion_representations.empty());

    // zero-initialized head gives 0.5 everywhere
    for (auto& x : nc.params().at("head.1.w").values_mut()) x = 0.0;
    for (auto& x : nc.params().at("head.2.w").values_mut()) x = 0.0;
    ModelOutput flat = memo_predict(emb, 2, MemoHead::new_classifier, nc.params(), v, set);
    CHECK(flat.probabilities.values() == std::vector<double>{0.5, 0.5});

    TextModel mlm = TextModel::init(ModelKind::memo, MemoHead::mlm_analog, cfg, v.size(), 2, 5);
    ModelOutput b = memo_predict(emb, 2, MemoHead::mlm_analog, mlm.params(), v, set);
    CHECK(b.probabilities.size() == 2);

    // distinct parameterizations: generally different outputs on the same input
    bool differs = false;
    for (int i = 0; i < 2; ++i) {
        if (a.probabilities.at(i) != b.probabilities.at(i)) differs = true;
    }
    CHECK(differs);

    // mlm head requires whole-word entries for every emotion
    EmotionSet missing;
    missing.names = {"joyful", "unseenemotion"};
    CHECK_THROWS_AS(memo_predict(emb, 2, MemoHead::mlm_analog, mlm.params(), v, missing),
                    ConfigError);

    CHECK_THROWS_AS(memo_predict(emb, 9, MemoHead::new_classifier, nc.params(), v, set),
                    std::out_of_range);
}

TEST_CASE("probabilities stay strictly inside (0,1)") {
    EmotionSet set = two_emotions();
    Vocabulary v = Vocabulary::build(tiny_corpus(), set, 4, 2);
    EncoderConfig cfg;
    cfg.dim = 8;
    cfg.heads = 2;
    cfg.ff_dim = 12;
    Rng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        TextModel m = TextModel::init(ModelKind::demux, MemoHead::new_classifier, cfg, v.size(), 2,
                                      rng.raw());
        TokenSequence seq = tokenize_demux(v, set, "happy sad gloomy skies");
        ModelOutput out = m.predict(seq, v, set);
        for (int i = 0; i < out.probabilities.size(); ++i) {
            CHECK(out.probabilities.at(i) > 0.0);
            CHECK(out.probabilities.at(i) < 1.0);
        }
        REQUIRE(out.emotion_representations.size() == 2);
    }
}

TEST_CASE("checkpoint save/load round trip preserves forward results") {
    EmotionSet set = two_emotions();
    Vocabulary v = Vocabulary::build(tiny_corpus(), set, 4, 2);
    EncoderConfig cfg;
    cfg.dim = 8;
    cfg.heads = 2;
    cfg.ff_dim = 12;
    TextModel m = TextModel::init(ModelKind::demux, MemoHead::new_classifier, cfg, v.size(), 2, 17);
    m.params().save("ckpt_test.txt");
    ParamStore loaded = ParamStore::load("ckpt_test.txt");
    TokenSequence seq = tokenize_demux(v, set, "happy days");
    Tensor a = encode_tokens(seq.ids, cfg, m.params());
    Tensor b = encode_tokens(seq.ids, cfg, loaded);
    CHECK(a.values() == b.values());
    std::remove("ckpt_test.txt");
}

TEST_CASE("end-to-end gradients match finite differences at d=8") {
    EmotionSet set = two_emotions();
    Vocabulary v = Vocabulary::build(tiny_corpus(), set, 4, 2);
    EncoderConfig cfg;
    cfg.layers = 2;
    cfg.heads = 2;
    cfg.dim = 8;
    cfg.ff_dim = 12;
    cfg.max_len = 24;
    const std::vector<int> y{1, 0};
    CorrelationPrior prior = wheel_prior(set);
    PairWeights weights = pair_weights(prior, WeightMode::from_prior);

    SUBCASE("demux with combined loss") {
        TextModel m = TextModel::init(ModelKind::demux, MemoHead::new_classifier, cfg, v.size(), 2, 21);
        TokenSequence seq = tokenize_demux(v, set, "happy sad");
        auto build = [&]() {
            ModelOutput out = m.predict(seq, v, set);
            LossTarget target;
            target.predictions = out.probabilities;
            target.representations = out.emotion_representations;
            LossConfig lc;
            lc.local_group = LocalGroup::both;
            lc.family = LossFamily::exp_predictions;
            Tensor local = local_loss(y, target, lc, weights);
            Tensor global = global_cosine_loss(out.emotion_representations, prior);
            return combined_loss(bce_loss(y, out.probabilities), local, global, 0.2, 0.1);
        };
        std::vector<Tensor> leaves;
        for (auto& [name, t] : m.params().tensors) leaves.push_back(t);
        auto res = gradcheck::check(build, leaves);
        CHECK(res.max_rel_err < 1e-4);
    }

    SUBCASE("memo with bce + local") {
        TextModel m = TextModel::init(ModelKind::memo, MemoHead::new_classifier, cfg, v.size(), 2, 22);
        TokenSequence seq = tokenize_memo(v, "gloomy skies");
        auto build = [&]() {
            ModelOutput out = m.predict(seq, v, set);
            LossTarget target;
            target.predictions = out.probabilities;
            LossConfig lc;
            lc.local_group = LocalGroup::inter;
            lc.family = LossFamily::exp_predictions;
            Tensor local = local_loss(y, target, lc, weights);
            return combined_loss(bce_loss(y, out.probabilities), local, Tensor(), 0.2, 0.0);
        };
        std::vector<Tensor> leaves;
        for (auto& [name, t] : m.params().tensors) leaves.push_back(t);
        auto res = gradcheck::check(build, leaves);
        CHECK(res.max_rel_err < 1e-4);
    }
}
