#include "emocorr/vocab.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

#include "emocorr/errors.hpp"

namespace emocorr {

namespace {

const char* kMaskLiteral = "[MASK]";

bool is_word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

Vocabulary::Vocabulary() {
    tokens = {"[PAD]", "[CLS]", "[SEP]", "[MASK]", "[UNK]"};
    for (int i = 0; i < static_cast<int>(tokens.size()); ++i) {
        index[tokens[static_cast<std::size_t>(i)]] = i;
    }
}

int Vocabulary::add(const std::string& token) {
    const auto it = index.find(token);
    if (it != index.end()) {
        return it->second;
    }
    const int id = size();
    tokens.push_back(token);
    index[token] = id;
    return id;
}

int Vocabulary::id_of(const std::string& token) const {
    const auto it = index.find(token);
    return it == index.end() ? -1 : it->second;
}

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> out;
    std::string word;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text.compare(i, 6, kMaskLiteral) == 0) {
            if (!word.empty()) {
                out.push_back(word);
                word.clear();
            }
            out.push_back(kMaskLiteral);
            i += 6;
            continue;
        }
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            if (!word.empty()) {
                out.push_back(word);
                word.clear();
            }
        } else if (is_word_char(c)) {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else {
            if (!word.empty()) {
                out.push_back(word);
                word.clear();
            }
            out.push_back(std::string(1, static_cast<char>(c)));
        }
        ++i;
    }
    if (!word.empty()) {
        out.push_back(word);
    }
    return out;
}

std::vector<int> tokenize_word(const Vocabulary& vocab, const std::string& word) {
    const int whole = vocab.id_of(word);
    if (whole >= 0) {
        return {whole};
    }
    std::vector<int> out;
    const int piece = std::max(1, vocab.max_piece_length);
    for (std::size_t pos = 0; pos < word.size(); pos += static_cast<std::size_t>(piece)) {
        const std::string chunk = word.substr(pos, static_cast<std::size_t>(piece));
        const int id = vocab.id_of(chunk);
        out.push_back(id >= 0 ? id : Vocabulary::kUnk);
    }
    if (out.empty()) {
        out.push_back(Vocabulary::kUnk);
    }
    return out;
}

std::vector<int> tokenize_text(const Vocabulary& vocab, const std::string& text) {
    std::vector<int> out;
    for (const auto& w : split_words(text)) {
        if (w == kMaskLiteral) {
            out.push_back(Vocabulary::kMask);
            continue;
        }
        const auto ids = tokenize_word(vocab, w);
        out.insert(out.end(), ids.begin(), ids.end());
    }
    return out;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus, const EmotionSet& set,
                             int max_piece_length, int min_count) {
    if (corpus.empty()) {
        throw std::invalid_argument("build_vocabulary: empty corpus");
    }
    if (max_piece_length < 1) {
        throw std::invalid_argument("build_vocabulary: max_piece_length must be positive");
    }
    Vocabulary vocab;
    vocab.max_piece_length = max_piece_length;

    // Emotion names first (always whole tokens), then the prompt scaffolding.
    for (const auto& name : set.names) {
        vocab.add(name);
    }
    for (const char* t : {",", "?", "or", "emotion", "in", "tweet"}) {
        vocab.add(t);
    }

    std::unordered_map<std::string, int> counts;
    std::vector<std::string> appearance;
    for (const auto& text : corpus) {
        for (const auto& w : split_words(text)) {
            if (w == kMaskLiteral) continue;
            if (++counts[w] == 1) {
                appearance.push_back(w);
            }
        }
    }
    for (const auto& w : appearance) {
        if (counts[w] >= min_count) {
            vocab.add(w);
        }
    }
    // Character pieces keep the rare words representable.
    for (const auto& w : appearance) {
        if (counts[w] >= min_count) continue;
        for (std::size_t pos = 0; pos < w.size(); pos += static_cast<std::size_t>(max_piece_length)) {
            vocab.add(w.substr(pos, static_cast<std::size_t>(max_piece_length)));
        }
    }
    return vocab;
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write vocabulary file: " + path);
    }
    for (const auto& t : tokens) {
        out << t << '\n';
    }
    if (!out) {
        throw DataError("failed writing vocabulary file: " + path);
    }
}

Vocabulary Vocabulary::load(const std::string& path, int max_piece_length) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open vocabulary file: " + path);
    }
    Vocabulary vocab;
    vocab.max_piece_length = max_piece_length;
    std::string line;
    int id = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (id < vocab.size()) {
            if (line != vocab.tokens[static_cast<std::size_t>(id)]) {
                throw DataError(path + ": reserved token mismatch at id " + std::to_string(id) +
                                " (got '" + line + "')");
            }
        } else {
            if (vocab.index.count(line)) {
                throw DataError(path + ": duplicate token '" + line + "'");
            }
            vocab.add(line);
        }
        ++id;
    }
    if (id < vocab.size()) {
        throw DataError(path + ": fewer tokens than the reserved marker set");
    }
    return vocab;
}

std::string build_demux_prompt(const EmotionSet& set) {
    if (set.size() < 2) {
        throw ConfigError("demux prompt needs at least 2 emotions");
    }
    std::string out;
    const int n = set.size();
    for (int i = 0; i < n; ++i) {
        if (i > 0) {
            out += ", ";
            if (i == n - 1) {
                out += "or ";
            }
        }
        out += set.names[static_cast<std::size_t>(i)];
    }
    out += "?";
    return out;
}

std::string build_memo_prompt(const std::string& text) {
    return "emotion [MASK] in tweet " + text;
}

TokenSequence tokenize_demux(const Vocabulary& vocab, const EmotionSet& set, const std::string& text) {
    if (set.size() < 2) {
        throw ConfigError("demux prompt needs at least 2 emotions");
    }
    TokenSequence seq;
    seq.ids.push_back(Vocabulary::kCls);
    const int n = set.size();
    const int comma = vocab.id_of(",");
    const int question = vocab.id_of("?");
    const int or_id = vocab.id_of("or");
    auto push = [&](int id) { seq.ids.push_back(id >= 0 ? id : Vocabulary::kUnk); };
    for (int i = 0; i < n; ++i) {
        if (i > 0) {
            push(comma);
            if (i == n - 1) {
                push(or_id);
            }
        }
        const auto pieces = tokenize_word(vocab, set.names[static_cast<std::size_t>(i)]);
        seq.emotion_spans.push_back(
            {static_cast<int>(seq.ids.size()), static_cast<int>(pieces.size())});
        seq.ids.insert(seq.ids.end(), pieces.begin(), pieces.end());
    }
    push(question);
    seq.ids.push_back(Vocabulary::kSep);
    const auto text_ids = tokenize_text(vocab, text);
    seq.ids.insert(seq.ids.end(), text_ids.begin(), text_ids.end());
    seq.ids.push_back(Vocabulary::kSep);
    return seq;
}

TokenSequence tokenize_memo(const Vocabulary& vocab, const std::string& text) {
    TokenSequence seq;
    seq.ids.push_back(Vocabulary::kCls);
    const auto prompt_ids = tokenize_text(vocab, build_memo_prompt(text));
    seq.ids.insert(seq.ids.end(), prompt_ids.begin(), prompt_ids.end());
    seq.ids.push_back(Vocabulary::kSep);
    int masks = 0;
    for (int i = 0; i < static_cast<int>(seq.ids.size()); ++i) {
        if (seq.ids[static_cast<std::size_t>(i)] == Vocabulary::kMask) {
            seq.mask_position = i;
            ++masks;
        }
    }
    if (masks != 1) {
        throw DataError("memo sequence must contain exactly one mask marker, found " +
                        std::to_string(masks));
    }
    return seq;
}

}  // namespace emocorr
