#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "emocorr/stats.hpp"

namespace emocorr {

// Deterministic random source. All draws go through explicit arithmetic on
// mt19937_64 output so streams are identical across platforms; the standard
// distribution classes are implementation-defined and never used.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via inverse CDF of a strictly interior uniform.
    double normal() {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return normal_quantile(u);
    }

    // Uniform integer in [0, n).
    int uniform_int(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
            std::swap(v[static_cast<std::size_t>(i)],
                      v[static_cast<std::size_t>(uniform_int(i + 1))]);
        }
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace emocorr
