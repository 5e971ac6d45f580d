#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emocorr/matrix.hpp"

namespace emocorr {

// Ordered emotion inventory; wheel angles (degrees) are optional per emotion.
struct EmotionSet {
    std::vector<std::string> names;
    std::vector<std::optional<double>> wheel_angle_deg;

    int size() const { return static_cast<int>(names.size()); }
    int index_of(const std::string& name) const;  // -1 when absent
    void validate() const;

    // The 11 SemEval 2018 Task 1 E-c emotions in canonical order, with the
    // default wheel layout: the 8 basic emotions at 45-degree steps starting
    // from joy at 0, the 3 dyads at the circular midpoint of their parents.
    static EmotionSet semeval11();

    // n distinct names emo0..emo{n-1} with evenly spaced wheel angles.
    static EmotionSet synthetic(int n);
};

enum class PriorMode { constant_one, empirical_rho, wheel_theta };

// Symmetric pairwise correlation prior with entries in [0,1] and unit diagonal.
struct CorrelationPrior {
    PriorMode mode = PriorMode::constant_one;
    SquareMatrix matrix;

    int size() const { return matrix.n; }
    double at(int i, int j) const { return matrix.at(i, j); }
    void validate() const;

    static CorrelationPrior constant_one(int n);
};

enum class WeightMode { constant_one, from_prior };

// Per-pair loss weights: f modulates inter-group terms, f_prime intra-group.
struct PairWeights {
    SquareMatrix f;
    SquareMatrix f_prime;

    static PairWeights ones(int n);
};

// Affine map [-1,1] -> [0,1]; inputs outside by more than 1e-9 raise,
// closer overshoots are clamped.
double project_to_unit_interval(double v);

// Pearson correlation of binary label columns, in [-1,1]; constant columns
// correlate 0 with everything, the diagonal is forced to 1.
SquareMatrix pearson_binary_correlation(const std::vector<std::vector<int>>& labels);

// Projected train-set correlation prior (the empirical-rho mode).
CorrelationPrior empirical_correlation(const std::vector<std::vector<int>>& labels);

// Projected cosine of the wheel-angle difference for one emotion pair.
double wheel_cosine(const EmotionSet& set, int i, int j);

// Full wheel-theta prior over an emotion set.
CorrelationPrior wheel_prior(const EmotionSet& set);

PairWeights pair_weights(const CorrelationPrior& prior, WeightMode mode);

// Key-value file of `emotion = degrees` lines; unknown names raise.
std::map<std::string, double> load_wheel_angles(const std::string& path);
void apply_wheel_angles(EmotionSet& set, const std::map<std::string, double>& angles);

}  // namespace emocorr
