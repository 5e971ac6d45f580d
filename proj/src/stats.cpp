#include "emocorr/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace emocorr {

double mean_of(const std::vector<double>& v) {
    if (v.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

std::vector<double> pearson_columns(const std::vector<std::vector<double>>& rows) {
    if (rows.size() < 2) {
        throw std::invalid_argument("pearson_columns: need at least 2 rows");
    }
    const int m = static_cast<int>(rows.size());
    const int n = static_cast<int>(rows[0].size());
    std::vector<double> means(static_cast<std::size_t>(n), 0.0);
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != n) {
            throw std::invalid_argument("pearson_columns: ragged matrix");
        }
        for (int j = 0; j < n; ++j) means[static_cast<std::size_t>(j)] += r[static_cast<std::size_t>(j)];
    }
    for (auto& x : means) x /= m;
    std::vector<double> var(static_cast<std::size_t>(n), 0.0);
    for (const auto& r : rows) {
        for (int j = 0; j < n; ++j) {
            const double d = r[static_cast<std::size_t>(j)] - means[static_cast<std::size_t>(j)];
            var[static_cast<std::size_t>(j)] += d * d;
        }
    }
    std::vector<double> corr(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        corr[static_cast<std::size_t>(i) * n + i] = 1.0;
        for (int j = i + 1; j < n; ++j) {
            double cov = 0.0;
            for (const auto& r : rows) {
                cov += (r[static_cast<std::size_t>(i)] - means[static_cast<std::size_t>(i)]) *
                       (r[static_cast<std::size_t>(j)] - means[static_cast<std::size_t>(j)]);
            }
            const double denom =
                std::sqrt(var[static_cast<std::size_t>(i)] * var[static_cast<std::size_t>(j)]);
            double rc = denom > 0.0 ? cov / denom : 0.0;
            rc = std::min(1.0, std::max(-1.0, rc));
            corr[static_cast<std::size_t>(i) * n + j] = rc;
            corr[static_cast<std::size_t>(j) * n + i] = rc;
        }
    }
    return corr;
}

double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

namespace {

double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014327;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

// Acklam's rational approximation for the normal quantile.
double normal_quantile_approx(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        double q = p - 0.5;
        double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("normal_quantile: p must lie in (0,1)");
    }
    double x = normal_quantile_approx(p);
    // Two Newton refinements push the approximation to near machine precision.
    for (int i = 0; i < 2; ++i) {
        const double err = normal_cdf(x) - p;
        const double pdf = normal_pdf(x);
        if (pdf <= 0.0) {
            break;
        }
        x -= err / pdf;
    }
    return x;
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double betacf(double a, double b, double x) {
    const int max_iter = 300;
    const double eps = 3e-14;
    const double fpmin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) {
            break;
        }
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_beta =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_beta);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (std::isinf(t)) {
        return 0.0;
    }
    const double x = df / (df + t * t);
    return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

double bivariate_normal_orthant(double t1, double t2, double rho) {
    if (rho >= 1.0 - 1e-12) {
        // Perfectly correlated: P(Z > max(t1, t2)).
        return 1.0 - normal_cdf(std::max(t1, t2));
    }
    if (rho <= -1.0 + 1e-12) {
        // Perfectly anticorrelated: P(t1 < Z, -Z > t2) = P(t1 < Z < -t2).
        const double hi = -t2;
        return hi > t1 ? normal_cdf(hi) - normal_cdf(t1) : 0.0;
    }
    // Integrate P(Z2 > t2 | Z1 = z) phi(z) over z > t1 with Gauss-Legendre panels.
    static const double nodes[] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                   0.5384693101056831,  0.9061798459386640};
    static const double weights[] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                     0.4786286704993665, 0.2369268850561891};
    const double denom = std::sqrt(1.0 - rho * rho);
    const double upper = std::max(t1, -10.0) + 14.0;  // integrand is negligible beyond
    const double lo = std::max(t1, -10.0);
    const int panels = 200;
    const double h = (upper - lo) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = lo + p * h;
        const double mid = a + 0.5 * h;
        const double half = 0.5 * h;
        for (int k = 0; k < 5; ++k) {
            const double z = mid + half * nodes[k];
            const double cond = 1.0 - normal_cdf((t2 - rho * z) / denom);
            total += weights[k] * half * normal_pdf(z) * cond;
        }
    }
    return total;
}

TTestResult pooled_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) {
        throw std::invalid_argument("pooled_t_test: need at least 2 samples per side");
    }
    TTestResult r;
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    r.mean_diff = ma - mb;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double ssa = 0.0, ssb = 0.0;
    for (double x : a) ssa += (x - ma) * (x - ma);
    for (double x : b) ssb += (x - mb) * (x - mb);
    const double df = na + nb - 2.0;
    const double pooled_var = (ssa + ssb) / df;
    if (pooled_var <= 0.0) {
        if (r.mean_diff == 0.0) {
            r.t = 0.0;
            r.p = 1.0;
        } else {
            r.t = r.mean_diff > 0 ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
            r.p = 0.0;
            r.degenerate = true;
        }
        return r;
    }
    r.t = r.mean_diff / std::sqrt(pooled_var * (1.0 / na + 1.0 / nb));
    r.p = student_t_two_sided_p(r.t, df);
    return r;
}

}  // namespace emocorr
