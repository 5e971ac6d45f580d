#include "emocorr/metrics.hpp"

#include <cstdio>
#include <stdexcept>

namespace emocorr {

std::string EvaluationReport::to_json() const {
    char buf[64];
    std::string out = "{";
    auto field = [&](const char* name, double v, bool comma = true) {
        std::snprintf(buf, sizeof(buf), "\"%s\": %.6f%s", name, v, comma ? ", " : "");
        out += buf;
    };
    field("jaccard", jaccard);
    field("micro_f1", micro_f1);
    field("macro_f1", macro_f1);
    field("threshold", threshold);
    out += "\"per_emotion_f1\": [";
    for (std::size_t i = 0; i < per_emotion_f1.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%s%.6f", i ? ", " : "", per_emotion_f1[i]);
        out += buf;
    }
    out += "]}";
    return out;
}

EvaluationReport evaluate(const std::vector<std::vector<int>>& gold,
                          const std::vector<std::vector<double>>& probabilities, double threshold) {
    if (gold.size() != probabilities.size()) {
        throw std::invalid_argument("evaluate: " + std::to_string(gold.size()) + " gold rows vs " +
                                    std::to_string(probabilities.size()) + " probability rows");
    }
    if (gold.empty()) {
        throw std::invalid_argument("evaluate: empty input");
    }
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw std::invalid_argument("evaluate: threshold must lie in (0,1)");
    }
    const int m = static_cast<int>(gold.size());
    const int n = static_cast<int>(gold[0].size());
    for (int r = 0; r < m; ++r) {
        if (static_cast<int>(gold[static_cast<std::size_t>(r)].size()) != n ||
            static_cast<int>(probabilities[static_cast<std::size_t>(r)].size()) != n) {
            throw std::invalid_argument("evaluate: shape mismatch at row " + std::to_string(r));
        }
    }

    EvaluationReport rep;
    rep.threshold = threshold;

    double jaccard_sum = 0.0;
    long tp_total = 0, fp_total = 0, fn_total = 0;
    std::vector<long> tp(static_cast<std::size_t>(n), 0), fp(static_cast<std::size_t>(n), 0),
        fn(static_cast<std::size_t>(n), 0);

    for (int r = 0; r < m; ++r) {
        int inter = 0, uni = 0;
        for (int c = 0; c < n; ++c) {
            const int g = gold[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            const int p = probabilities[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] >= threshold ? 1 : 0;
            inter += g & p;
            uni += g | p;
            if (g == 1 && p == 1) {
                ++tp[static_cast<std::size_t>(c)];
            } else if (g == 0 && p == 1) {
                ++fp[static_cast<std::size_t>(c)];
            } else if (g == 1 && p == 0) {
                ++fn[static_cast<std::size_t>(c)];
            }
        }
        jaccard_sum += uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
    }
    rep.jaccard = jaccard_sum / m;

    double macro_sum = 0.0;
    rep.per_emotion_f1.resize(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        const std::size_t ci = static_cast<std::size_t>(c);
        tp_total += tp[ci];
        fp_total += fp[ci];
        fn_total += fn[ci];
        const long denom = 2 * tp[ci] + fp[ci] + fn[ci];
        const double f1 = denom == 0 ? 0.0 : 2.0 * tp[ci] / static_cast<double>(denom);
        rep.per_emotion_f1[ci] = f1;
        macro_sum += f1;
    }
    rep.macro_f1 = macro_sum / n;

    const long micro_denom = 2 * tp_total + fp_total + fn_total;
    rep.micro_f1 = micro_denom == 0 ? 1.0 : 2.0 * tp_total / static_cast<double>(micro_denom);
    return rep;
}

}  // namespace emocorr
