#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "emocorr/label_space.hpp"

namespace emocorr {

// Token inventory with fixed low ids for the structural markers. Emotion
// names always have whole-word entries when built through build(); rare
// words tokenize into fixed-length character pieces.
struct Vocabulary {
    static constexpr int kPad = 0;
    static constexpr int kCls = 1;
    static constexpr int kSep = 2;
    static constexpr int kMask = 3;
    static constexpr int kUnk = 4;

    std::vector<std::string> tokens;
    std::unordered_map<std::string, int> index;
    int max_piece_length = 4;

    Vocabulary();

    int size() const { return static_cast<int>(tokens.size()); }
    int add(const std::string& token);            // idempotent, returns id
    int id_of(const std::string& token) const;    // -1 when absent
    bool contains(const std::string& token) const { return id_of(token) >= 0; }

    static Vocabulary build(const std::vector<std::string>& corpus, const EmotionSet& set,
                            int max_piece_length = 4, int min_count = 2);

    // Token-per-line text; ids are implicit in line order.
    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path, int max_piece_length = 4);
};

struct TokenSpan {
    int start = 0;
    int length = 0;
};

struct TokenSequence {
    std::vector<int> ids;
    std::vector<TokenSpan> emotion_spans;  // Demux: one span per emotion
    int mask_position = -1;                // MEmo: the single mask marker
};

// Lowercased word/punctuation split; ASCII punctuation becomes single-char
// tokens, bytes >= 0x80 are treated as word characters.
std::vector<std::string> split_words(const std::string& text);

// Ids for one word: whole-word entry when present, otherwise fixed-length
// character pieces (unknown pieces map to [UNK]).
std::vector<int> tokenize_word(const Vocabulary& vocab, const std::string& word);

std::vector<int> tokenize_text(const Vocabulary& vocab, const std::string& text);

// "e1, e2, ..., or en?" over the emotion names; needs at least 2 emotions.
std::string build_demux_prompt(const EmotionSet& set);

// The literal mask prompt prefix followed by the text.
std::string build_memo_prompt(const std::string& text);

// [CLS] prompt [SEP] text [SEP] with per-emotion subtoken spans.
TokenSequence tokenize_demux(const Vocabulary& vocab, const EmotionSet& set, const std::string& text);

// [CLS] "emotion" [MASK] "in tweet" text [SEP]; exactly one mask marker.
TokenSequence tokenize_memo(const Vocabulary& vocab, const std::string& text);

}  // namespace emocorr
