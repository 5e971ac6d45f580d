#include "emocorr/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace emocorr {

bool SquareMatrix::is_symmetric(double tol) const {
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (std::fabs(at(i, j) - at(j, i)) > tol) {
                return false;
            }
        }
    }
    return true;
}

Eigendecomposition jacobi_eigendecomposition(const SquareMatrix& input) {
    if (!input.is_symmetric(1e-9)) {
        throw std::invalid_argument("jacobi_eigendecomposition: matrix is not symmetric");
    }
    const int n = input.n;
    SquareMatrix a = input;
    SquareMatrix q = SquareMatrix::identity(n);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                off += a.at(i, j) * a.at(i, j);
            }
        }
        if (off < 1e-24) {
            break;
        }
        for (int p = 0; p < n - 1; ++p) {
            for (int r = p + 1; r < n; ++r) {
                const double apr = a.at(p, r);
                if (std::fabs(apr) < 1e-300) {
                    continue;
                }
                const double theta = (a.at(r, r) - a.at(p, p)) / (2.0 * apr);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a.at(k, p);
                    const double akr = a.at(k, r);
                    a.at(k, p) = c * akp - s * akr;
                    a.at(k, r) = s * akp + c * akr;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a.at(p, k);
                    const double ark = a.at(r, k);
                    a.at(p, k) = c * apk - s * ark;
                    a.at(r, k) = s * apk + c * ark;
                }
                for (int k = 0; k < n; ++k) {
                    const double qkp = q.at(k, p);
                    const double qkr = q.at(k, r);
                    q.at(k, p) = c * qkp - s * qkr;
                    q.at(k, r) = s * qkp + c * qkr;
                }
            }
        }
    }

    Eigendecomposition out;
    out.eigenvalues.resize(n);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = a.at(i, i);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return diag[x] < diag[y]; });
    out.eigenvectors = SquareMatrix(n);
    for (int c = 0; c < n; ++c) {
        out.eigenvalues[c] = diag[order[c]];
        for (int r = 0; r < n; ++r) {
            out.eigenvectors.at(r, c) = q.at(r, order[c]);
        }
    }
    return out;
}

SquareMatrix symmetric_sqrt(const SquareMatrix& m, double tolerance) {
    const auto eig = jacobi_eigendecomposition(m);
    const int n = m.n;
    for (double lam : eig.eigenvalues) {
        if (lam < -tolerance) {
            throw std::invalid_argument("symmetric_sqrt: matrix is not positive semidefinite (eigenvalue " +
                                        std::to_string(lam) + ")");
        }
    }
    SquareMatrix out(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) {
                const double lam = std::max(eig.eigenvalues[k], 0.0);
                s += eig.eigenvectors.at(i, k) * std::sqrt(lam) * eig.eigenvectors.at(j, k);
            }
            out.at(i, j) = s;
        }
    }
    return out;
}

double frobenius_distance(const SquareMatrix& a, const SquareMatrix& b) {
    if (a.n != b.n) {
        throw std::invalid_argument("frobenius_distance: size mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) {
        const double d = a.v[i] - b.v[i];
        s += d * d;
    }
    return std::sqrt(s);
}

std::string to_csv(const SquareMatrix& m, const std::vector<std::string>& labels) {
    std::string out;
    for (int j = 0; j < m.n; ++j) {
        out += ',';
        out += labels[static_cast<std::size_t>(j)];
    }
    out += '\n';
    char buf[32];
    for (int i = 0; i < m.n; ++i) {
        out += labels[static_cast<std::size_t>(i)];
        for (int j = 0; j < m.n; ++j) {
            std::snprintf(buf, sizeof(buf), ",%.6f", m.at(i, j));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

}  // namespace emocorr
