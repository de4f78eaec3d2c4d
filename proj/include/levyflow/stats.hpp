#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace levyflow {

/// Estimate with its Monte Carlo standard error.
struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

/// Pairwise (cascade) summation; deterministic for a given input order.
double pairwise_sum(std::span<const double> xs);

/// Sample mean and standard error of the mean.
Estimate mean_se(std::span<const double> xs);

/// Sample variance (unbiased).
double sample_variance(std::span<const double> xs);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; ///< root-mean-square residual
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit least_squares(std::span<const double> xs, std::span<const double> ys);

/// Kolmogorov limiting survival function Q(λ) = 2 Σ (-1)^{k-1} exp(-2k²λ²).
double kolmogorov_q(double lambda);

struct KsResult {
    double statistic = 0.0;
    double p_value = 0.0;
};

/// One-sample KS test of `samples` against a continuous CDF.
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Two-sample KS test.
KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b);

/// Geometric grid base^k for k in [k_lo, k_hi].
std::vector<double> dyadic_grid(int k_lo, int k_hi, double base = 2.0);

} // namespace levyflow
