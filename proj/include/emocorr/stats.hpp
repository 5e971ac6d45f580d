#pragma once

#include <vector>

namespace emocorr {

double mean_of(const std::vector<double>& v);

// Pearson correlation of the columns of a row-major matrix, in [-1,1];
// constant columns correlate 0 with everything, unit diagonal. Returned as
// a flat n*n vector (row-major).
std::vector<double> pearson_columns(const std::vector<std::vector<double>>& rows);

// Unbiased sample standard deviation (m-1 denominator); 0 for fewer than 2 values.
double stddev_of(const std::vector<double>& v);

// Standard normal CDF and its inverse (quantile). The quantile uses a
// rational approximation refined with one Newton step, accurate to ~1e-14.
double normal_cdf(double x);
double normal_quantile(double p);

// Regularized incomplete beta function I_x(a, b) via continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided p-value for a Student t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// P(Z1 > t1, Z2 > t2) for standard bivariate normals with correlation rho.
double bivariate_normal_orthant(double t1, double t2, double rho);

struct TTestResult {
    double mean_diff = 0.0;
    double t = 0.0;
    double p = 1.0;
    bool degenerate = false;  // zero pooled variance with unequal means
};

// Pooled-variance two-sample t-test; requires at least 2 values per side.
TTestResult pooled_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace emocorr
