#include "emocorr/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "emocorr/config.hpp"
#include "emocorr/errors.hpp"
#include "emocorr/rng.hpp"
#include "emocorr/stats.hpp"

namespace emocorr {

std::vector<std::vector<int>> DatasetSplit::label_matrix() const {
    std::vector<std::vector<int>> out;
    out.reserve(examples.size());
    for (const auto& e : examples) out.push_back(e.labels);
    return out;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return out;
}

}  // namespace

DatasetSplit load_semeval_tsv(const std::string& path, const EmotionSet& set,
                              const std::string& split_name) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open dataset file: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(path + ": missing header row");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_tabs(line);
    if (header.size() < 2) {
        throw DataError(path + ": header must start with ID and Tweet columns");
    }
    const int n = set.size();
    std::vector<int> column_of(static_cast<std::size_t>(n), -1);
    for (int e = 0; e < n; ++e) {
        for (std::size_t c = 2; c < header.size(); ++c) {
            if (header[c] == set.names[static_cast<std::size_t>(e)]) {
                column_of[static_cast<std::size_t>(e)] = static_cast<int>(c);
                break;
            }
        }
        if (column_of[static_cast<std::size_t>(e)] < 0) {
            throw DataError(path + ": header is missing emotion column '" +
                            set.names[static_cast<std::size_t>(e)] + "'");
        }
    }

    DatasetSplit split;
    split.name = split_name;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_tabs(line);
        if (cells.size() != header.size()) {
            throw DataError(path + ": row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
        }
        LabeledExample ex;
        ex.id = cells[0];
        ex.text = cells[1];
        ex.labels.resize(static_cast<std::size_t>(n));
        for (int e = 0; e < n; ++e) {
            const auto& cell = cells[static_cast<std::size_t>(column_of[static_cast<std::size_t>(e)])];
            if (cell == "0") {
                ex.labels[static_cast<std::size_t>(e)] = 0;
            } else if (cell == "1") {
                ex.labels[static_cast<std::size_t>(e)] = 1;
            } else {
                throw DataError(path + ": row " + std::to_string(row) + ", column '" +
                                set.names[static_cast<std::size_t>(e)] + "': label cell '" + cell +
                                "' is not 0/1");
            }
        }
        split.examples.push_back(std::move(ex));
    }
    if (split.examples.empty()) {
        throw DataError(path + ": no data rows");
    }
    return split;
}

void write_semeval_tsv(const std::string& path, const DatasetSplit& split, const EmotionSet& set) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write dataset file: " + path);
    }
    out << "ID\tTweet";
    for (const auto& n : set.names) out << '\t' << n;
    out << '\n';
    for (const auto& ex : split.examples) {
        out << ex.id << '\t' << ex.text;
        for (int v : ex.labels) out << '\t' << v;
        out << '\n';
    }
    if (!out) {
        throw DataError("failed writing dataset file: " + path);
    }
}

void SyntheticSpec::validate() const {
    if (n_emotions < 2) {
        throw ConfigError("synthetic spec: need at least 2 emotions");
    }
    if (m_examples < 10) {
        throw ConfigError("synthetic spec: need at least 10 examples");
    }
    if (target_correlation.n != n_emotions) {
        throw ConfigError("synthetic spec: correlation matrix size mismatch");
    }
    if (!target_correlation.is_symmetric(1e-9)) {
        throw ConfigError("synthetic spec: correlation matrix must be symmetric");
    }
    for (int i = 0; i < n_emotions; ++i) {
        if (std::fabs(target_correlation.at(i, i) - 1.0) > 1e-9) {
            throw ConfigError("synthetic spec: correlation diagonal must be 1");
        }
        for (int j = 0; j < n_emotions; ++j) {
            const double c = target_correlation.at(i, j);
            if (c < -1.0 || c > 1.0) {
                throw ConfigError("synthetic spec: correlation entries must lie in [-1,1]");
            }
        }
    }
    const auto eig = jacobi_eigendecomposition(target_correlation);
    if (eig.eigenvalues.front() < -1e-6) {
        throw ConfigError("synthetic spec: correlation matrix is not positive semidefinite (eigenvalue " +
                          std::to_string(eig.eigenvalues.front()) + ")");
    }
    if (static_cast<int>(marginal_rates.size()) != n_emotions) {
        throw ConfigError("synthetic spec: need one marginal rate per emotion");
    }
    for (double r : marginal_rates) {
        if (!(r > 0.0 && r < 1.0)) {
            throw ConfigError("synthetic spec: marginal rates must lie in (0,1)");
        }
    }
    if (vocabulary_per_emotion < 1) {
        throw ConfigError("synthetic spec: vocabulary_per_emotion must be positive");
    }
    if (noise_rate < 0.0 || noise_rate > 1.0) {
        throw ConfigError("synthetic spec: noise_rate must lie in [0,1]");
    }
    if (tokens_per_text < 1) {
        throw ConfigError("synthetic spec: tokens_per_text must be positive");
    }
}

SyntheticSpec SyntheticSpec::from_kv_file(const std::string& path) {
    const KvFile kv = KvFile::parse_file(path);
    SyntheticSpec spec;
    const std::string sec = "synthetic";
    if (auto v = kv.get(sec, "emotions")) spec.n_emotions = parse_int("emotions", *v);
    if (auto v = kv.get(sec, "examples")) spec.m_examples = parse_int("examples", *v);
    if (auto v = kv.get(sec, "vocab.per.emotion"))
        spec.vocabulary_per_emotion = parse_int("vocab.per.emotion", *v);
    if (auto v = kv.get(sec, "noise.rate")) spec.noise_rate = parse_double("noise.rate", *v);
    if (auto v = kv.get(sec, "tokens.per.text")) spec.tokens_per_text = parse_int("tokens.per.text", *v);
    if (auto v = kv.get(sec, "seed")) spec.seed = static_cast<unsigned long>(parse_int("seed", *v));

    spec.marginal_rates.assign(static_cast<std::size_t>(spec.n_emotions), 0.3);
    if (auto v = kv.get(sec, "rates")) {
        const auto items = split_list(*v);
        if (items.size() == 1) {
            spec.marginal_rates.assign(static_cast<std::size_t>(spec.n_emotions),
                                       parse_double("rates", items[0]));
        } else {
            if (static_cast<int>(items.size()) != spec.n_emotions) {
                throw ConfigError("synthetic spec: rates list length " + std::to_string(items.size()) +
                                  " does not match emotions = " + std::to_string(spec.n_emotions));
            }
            spec.marginal_rates.clear();
            for (const auto& it : items) spec.marginal_rates.push_back(parse_double("rates", it));
        }
    }

    spec.target_correlation = SquareMatrix::identity(spec.n_emotions);
    for (const auto* block : kv.sections(sec)) {
        for (const auto& [key, value] : block->entries) {
            if (key.rfind("corr.", 0) != 0) continue;
            const auto rest = key.substr(5);
            const auto dot = rest.find('.');
            if (dot == std::string::npos) {
                throw ConfigError("synthetic spec: bad correlation key '" + key + "', want corr.i.j");
            }
            const int i = parse_int(key, rest.substr(0, dot));
            const int j = parse_int(key, rest.substr(dot + 1));
            if (i < 0 || j < 0 || i >= spec.n_emotions || j >= spec.n_emotions || i == j) {
                throw ConfigError("synthetic spec: correlation key '" + key + "' out of range");
            }
            const double c = parse_double(key, value);
            spec.target_correlation.at(i, j) = c;
            spec.target_correlation.at(j, i) = c;
        }
    }
    spec.validate();
    return spec;
}

double calibrate_latent_correlation(double target, double rate_i, double rate_j) {
    if (std::fabs(target) < 1e-15) {
        return 0.0;
    }
    const double ti = normal_quantile(1.0 - rate_i);
    const double tj = normal_quantile(1.0 - rate_j);
    const double denom = std::sqrt(rate_i * (1.0 - rate_i) * rate_j * (1.0 - rate_j));
    auto phi_of = [&](double rho) {
        const double p11 = bivariate_normal_orthant(ti, tj, rho);
        return (p11 - rate_i * rate_j) / denom;
    };
    const double lo_phi = phi_of(-0.999999);
    const double hi_phi = phi_of(0.999999);
    if (target < lo_phi - 1e-6 || target > hi_phi + 1e-6) {
        throw ConfigError("synthetic spec: binary correlation " + std::to_string(target) +
                          " is unattainable at rates " + std::to_string(rate_i) + "/" +
                          std::to_string(rate_j) + " (attainable range [" + std::to_string(lo_phi) +
                          ", " + std::to_string(hi_phi) + "])");
    }
    double lo = -0.999999, hi = 0.999999;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (phi_of(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const int n = spec.n_emotions;
    const int m = spec.m_examples;

    // Latent Gaussian correlation per pair, calibrated so the binary labels
    // reproduce the requested correlation.
    SquareMatrix latent = SquareMatrix::identity(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double rho = calibrate_latent_correlation(
                spec.target_correlation.at(i, j), spec.marginal_rates[static_cast<std::size_t>(i)],
                spec.marginal_rates[static_cast<std::size_t>(j)]);
            latent.at(i, j) = rho;
            latent.at(j, i) = rho;
        }
    }
    // Calibration can push an already-borderline target matrix slightly
    // outside PSD; small negatives get clipped inside symmetric_sqrt.
    const SquareMatrix root = symmetric_sqrt(latent, 1e-3);

    std::vector<double> thresholds(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        thresholds[static_cast<std::size_t>(i)] =
            normal_quantile(1.0 - spec.marginal_rates[static_cast<std::size_t>(i)]);
    }

    SyntheticDataset out;
    out.set = EmotionSet::synthetic(n);
    out.target = spec.target_correlation;

    Rng rng(spec.seed);
    std::vector<LabeledExample> all;
    all.reserve(static_cast<std::size_t>(m));
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int row = 0; row < m; ++row) {
        for (auto& x : g) x = rng.normal();
        LabeledExample ex;
        ex.id = "syn-" + std::to_string(row);
        ex.labels.resize(static_cast<std::size_t>(n));
        std::vector<int> present;
        for (int i = 0; i < n; ++i) {
            double z = 0.0;
            for (int k = 0; k < n; ++k) z += root.at(i, k) * g[static_cast<std::size_t>(k)];
            const int y = z > thresholds[static_cast<std::size_t>(i)] ? 1 : 0;
            ex.labels[static_cast<std::size_t>(i)] = y;
            if (y) present.push_back(i);
        }
        std::string text;
        for (int t = 0; t < spec.tokens_per_text; ++t) {
            const bool noise = present.empty() || rng.uniform() < spec.noise_rate;
            std::string tok;
            if (noise) {
                tok = "noisetok" + std::to_string(rng.uniform_int(spec.vocabulary_per_emotion));
            } else {
                const int e = present[static_cast<std::size_t>(rng.uniform_int(
                    static_cast<int>(present.size())))];
                tok = out.set.names[static_cast<std::size_t>(e)] + "tok" +
                      std::to_string(rng.uniform_int(spec.vocabulary_per_emotion));
            }
            if (t) text += ' ';
            text += tok;
        }
        ex.text = std::move(text);
        all.push_back(std::move(ex));
    }

    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const int train_count = (m * 7) / 10;
    const int dev_count = m / 10;
    out.train.name = "train";
    out.dev.name = "dev";
    out.test.name = "test";
    for (int idx = 0; idx < m; ++idx) {
        const auto& ex = all[static_cast<std::size_t>(order[static_cast<std::size_t>(idx)])];
        if (idx < train_count) {
            out.train.examples.push_back(ex);
        } else if (idx < train_count + dev_count) {
            out.dev.examples.push_back(ex);
        } else {
            out.test.examples.push_back(ex);
        }
    }
    return out;
}

}  // namespace emocorr
