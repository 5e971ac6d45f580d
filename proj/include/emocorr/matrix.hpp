#pragma once

#include <string>
#include <vector>

namespace emocorr {

// Dense symmetric-friendly square matrix; row-major doubles.
struct SquareMatrix {
    int n = 0;
    std::vector<double> v;

    SquareMatrix() = default;
    explicit SquareMatrix(int size, double fill = 0.0)
        : n(size), v(static_cast<std::size_t>(size) * size, fill) {}

    double at(int i, int j) const { return v[static_cast<std::size_t>(i) * n + j]; }
    double& at(int i, int j) { return v[static_cast<std::size_t>(i) * n + j]; }

    static SquareMatrix identity(int size) {
        SquareMatrix m(size);
        for (int i = 0; i < size; ++i) m.at(i, i) = 1.0;
        return m;
    }

    bool is_symmetric(double tol = 1e-12) const;
};

struct Eigendecomposition {
    std::vector<double> eigenvalues;  // ascending
    SquareMatrix eigenvectors;        // columns correspond to eigenvalues
};

// Cyclic Jacobi rotation eigensolver for symmetric matrices; sizes here are
// tiny (label counts), so quadratic convergence is more than enough.
Eigendecomposition jacobi_eigendecomposition(const SquareMatrix& m);

// Symmetric PSD square root via eigendecomposition; eigenvalues below
// -tolerance raise, small negatives are clipped to zero.
SquareMatrix symmetric_sqrt(const SquareMatrix& m, double tolerance = 1e-6);

double frobenius_distance(const SquareMatrix& a, const SquareMatrix& b);

std::string to_csv(const SquareMatrix& m, const std::vector<std::string>& labels);

}  // namespace emocorr
