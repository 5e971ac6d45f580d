#pragma once

#include <string>
#include <vector>

namespace emocorr {

struct EvaluationReport {
    double jaccard = 0.0;
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
    std::vector<double> per_emotion_f1;
    double threshold = 0.5;

    std::string to_json() const;
};

// Multi-label evaluation at a fixed threshold (predictions = prob >= t).
// Zero-denominator conventions, centralized here so they can be revisited:
//   - a sample with empty gold and empty prediction scores Jaccard 1;
//   - micro F1 with no positive cells anywhere (0/0) is 1;
//   - an emotion with zero support and zero predictions scores F1 = 0 for
//     the macro average.
EvaluationReport evaluate(const std::vector<std::vector<int>>& gold,
                          const std::vector<std::vector<double>>& probabilities,
                          double threshold = 0.5);

}  // namespace emocorr
