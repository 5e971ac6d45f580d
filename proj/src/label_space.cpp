#include "emocorr/label_space.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "emocorr/errors.hpp"

namespace emocorr {

int EmotionSet::index_of(const std::string& name) const {
    for (int i = 0; i < size(); ++i) {
        if (names[static_cast<std::size_t>(i)] == name) {
            return i;
        }
    }
    return -1;
}

void EmotionSet::validate() const {
    if (size() < 2) {
        throw ConfigError("emotion set needs at least 2 emotions, got " + std::to_string(size()));
    }
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (n.empty()) {
            throw ConfigError("emotion names must be nonempty");
        }
        for (char c : n) {
            if (std::isupper(static_cast<unsigned char>(c))) {
                throw ConfigError("emotion names must be lowercase: '" + n + "'");
            }
        }
        if (!seen.insert(n).second) {
            throw ConfigError("duplicate emotion name '" + n + "'");
        }
    }
    if (!wheel_angle_deg.empty() && wheel_angle_deg.size() != names.size()) {
        throw ConfigError("wheel angle list length does not match emotion count");
    }
}

EmotionSet EmotionSet::semeval11() {
    EmotionSet s;
    s.names = {"anger",    "anticipation", "disgust", "fear",     "joy",   "love",
               "optimism", "pessimism",    "sadness", "surprise", "trust"};
    // Basic wheel: joy 0, trust 45, fear 90, surprise 135, sadness 180,
    // disgust 225, anger 270, anticipation 315. Dyads at parent midpoints:
    // love = mid(joy, trust), optimism = mid(joy, anticipation),
    // pessimism = mid(sadness, anticipation), shorter arc.
    s.wheel_angle_deg = {270.0, 315.0, 225.0, 90.0, 0.0, 22.5, 337.5, 247.5, 180.0, 135.0, 45.0};
    return s;
}

EmotionSet EmotionSet::synthetic(int n) {
    if (n < 2) {
        throw ConfigError("synthetic emotion set needs at least 2 emotions");
    }
    EmotionSet s;
    for (int i = 0; i < n; ++i) {
        s.names.push_back("emo" + std::to_string(i));
        s.wheel_angle_deg.push_back(360.0 * i / n);
    }
    return s;
}

void CorrelationPrior::validate() const {
    const int n = matrix.n;
    for (int i = 0; i < n; ++i) {
        if (std::fabs(matrix.at(i, i) - 1.0) > 1e-12) {
            throw ConfigError("correlation prior diagonal must be 1");
        }
        for (int j = 0; j < n; ++j) {
            const double c = matrix.at(i, j);
            if (c < 0.0 || c > 1.0) {
                throw ConfigError("correlation prior entry out of [0,1]: " + std::to_string(c));
            }
            if (std::fabs(c - matrix.at(j, i)) > 1e-12) {
                throw ConfigError("correlation prior must be symmetric");
            }
        }
    }
}

CorrelationPrior CorrelationPrior::constant_one(int n) {
    CorrelationPrior p;
    p.mode = PriorMode::constant_one;
    p.matrix = SquareMatrix(n, 1.0);
    return p;
}

PairWeights PairWeights::ones(int n) {
    PairWeights w;
    w.f = SquareMatrix(n, 1.0);
    w.f_prime = SquareMatrix(n, 1.0);
    return w;
}

double project_to_unit_interval(double v) {
    constexpr double tol = 1e-9;
    if (v < -1.0 - tol || v > 1.0 + tol) {
        throw std::domain_error("project_to_unit_interval: " + std::to_string(v) +
                                " outside [-1,1] beyond clamp tolerance");
    }
    v = std::min(1.0, std::max(-1.0, v));
    return (v + 1.0) / 2.0;
}

SquareMatrix pearson_binary_correlation(const std::vector<std::vector<int>>& labels) {
    if (labels.size() < 2) {
        throw std::invalid_argument("pearson_binary_correlation: need at least 2 rows");
    }
    const int m = static_cast<int>(labels.size());
    const int n = static_cast<int>(labels[0].size());
    for (const auto& row : labels) {
        if (static_cast<int>(row.size()) != n) {
            throw std::invalid_argument("pearson_binary_correlation: ragged label matrix");
        }
        for (int v : row) {
            if (v != 0 && v != 1) {
                throw std::invalid_argument("pearson_binary_correlation: entries must be 0/1");
            }
        }
    }
    std::vector<double> means(static_cast<std::size_t>(n), 0.0);
    for (const auto& row : labels) {
        for (int j = 0; j < n; ++j) means[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j)];
    }
    for (auto& x : means) x /= m;
    std::vector<double> var(static_cast<std::size_t>(n), 0.0);
    for (const auto& row : labels) {
        for (int j = 0; j < n; ++j) {
            const double d = row[static_cast<std::size_t>(j)] - means[static_cast<std::size_t>(j)];
            var[static_cast<std::size_t>(j)] += d * d;
        }
    }
    SquareMatrix corr(n);
    for (int i = 0; i < n; ++i) {
        corr.at(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            double cov = 0.0;
            for (const auto& row : labels) {
                cov += (row[static_cast<std::size_t>(i)] - means[static_cast<std::size_t>(i)]) *
                       (row[static_cast<std::size_t>(j)] - means[static_cast<std::size_t>(j)]);
            }
            const double denom = std::sqrt(var[static_cast<std::size_t>(i)] * var[static_cast<std::size_t>(j)]);
            // Constant columns carry no pairwise information: correlation 0.
            double r = denom > 0.0 ? cov / denom : 0.0;
            r = std::min(1.0, std::max(-1.0, r));
            corr.at(i, j) = r;
            corr.at(j, i) = r;
        }
    }
    return corr;
}

CorrelationPrior empirical_correlation(const std::vector<std::vector<int>>& labels) {
    const SquareMatrix raw = pearson_binary_correlation(labels);
    CorrelationPrior p;
    p.mode = PriorMode::empirical_rho;
    p.matrix = SquareMatrix(raw.n);
    for (int i = 0; i < raw.n; ++i) {
        for (int j = 0; j < raw.n; ++j) {
            p.matrix.at(i, j) = i == j ? 1.0 : project_to_unit_interval(raw.at(i, j));
        }
    }
    return p;
}

double wheel_cosine(const EmotionSet& set, int i, int j) {
    const bool have = !set.wheel_angle_deg.empty();
    const std::optional<double> ai = have ? set.wheel_angle_deg.at(static_cast<std::size_t>(i)) : std::nullopt;
    const std::optional<double> aj = have ? set.wheel_angle_deg.at(static_cast<std::size_t>(j)) : std::nullopt;
    if (!ai.has_value()) {
        throw ConfigError("wheel_cosine: emotion '" + set.names[static_cast<std::size_t>(i)] +
                          "' has no wheel angle");
    }
    if (!aj.has_value()) {
        throw ConfigError("wheel_cosine: emotion '" + set.names[static_cast<std::size_t>(j)] +
                          "' has no wheel angle");
    }
    constexpr double deg2rad = 3.14159265358979323846 / 180.0;
    return project_to_unit_interval(std::cos((*ai - *aj) * deg2rad));
}

CorrelationPrior wheel_prior(const EmotionSet& set) {
    const int n = set.size();
    CorrelationPrior p;
    p.mode = PriorMode::wheel_theta;
    p.matrix = SquareMatrix(n);
    for (int i = 0; i < n; ++i) {
        p.matrix.at(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const double c = wheel_cosine(set, i, j);
            p.matrix.at(i, j) = c;
            p.matrix.at(j, i) = c;
        }
    }
    return p;
}

PairWeights pair_weights(const CorrelationPrior& prior, WeightMode mode) {
    const int n = prior.size();
    if (mode == WeightMode::constant_one) {
        return PairWeights::ones(n);
    }
    PairWeights w;
    w.f = SquareMatrix(n);
    w.f_prime = SquareMatrix(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            w.f.at(i, j) = 1.0 - prior.at(i, j);
            w.f_prime.at(i, j) = prior.at(i, j);
        }
    }
    return w;
}

std::map<std::string, double> load_wheel_angles(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open wheel angle file: " + path);
    }
    std::map<std::string, double> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        if (eq == std::string::npos) {
            throw DataError("wheel angle file line " + std::to_string(lineno) + ": expected 'name = degrees'");
        }
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r\n");
            const auto e = s.find_last_not_of(" \t\r\n");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string name = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (name.empty() || value.empty()) {
            throw DataError("wheel angle file line " + std::to_string(lineno) + ": empty name or value");
        }
        try {
            out[name] = std::stod(value);
        } catch (const std::exception&) {
            throw DataError("wheel angle file line " + std::to_string(lineno) + ": bad number '" + value + "'");
        }
    }
    return out;
}

void apply_wheel_angles(EmotionSet& set, const std::map<std::string, double>& angles) {
    if (set.wheel_angle_deg.size() != set.names.size()) {
        set.wheel_angle_deg.assign(set.names.size(), std::nullopt);
    }
    for (const auto& [name, deg] : angles) {
        const int idx = set.index_of(name);
        if (idx < 0) {
            throw ConfigError("wheel angle given for unknown emotion '" + name + "'");
        }
        set.wheel_angle_deg[static_cast<std::size_t>(idx)] = deg;
    }
}

}  // namespace emocorr
