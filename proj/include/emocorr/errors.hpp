#pragma once

#include <stdexcept>
#include <string>

namespace emocorr {

// Configuration / usage problems. CLI maps these to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or missing data files. CLI maps these to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss. CLI maps these to exit code 3.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace emocorr
