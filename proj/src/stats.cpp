#include "levyflow/stats.hpp"

#include <algorithm>
#include <cmath>

#include "levyflow/errors.hpp"

namespace levyflow {

double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 16) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

double sample_variance(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 2) return 0.0;
    const double mean = pairwise_sum(xs) / static_cast<double>(n);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (xs[i] - mean) * (xs[i] - mean);
    return pairwise_sum(sq) / static_cast<double>(n - 1);
}

Estimate mean_se(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n == 0) return {};
    const double mean = pairwise_sum(xs) / static_cast<double>(n);
    return {mean, std::sqrt(sample_variance(xs) / static_cast<double>(n))};
}

LinearFit least_squares(std::span<const double> xs, std::span<const double> ys) {
    require(xs.size() == ys.size() && xs.size() >= 2, "least_squares needs >= 2 paired points");
    const double n = static_cast<double>(xs.size());
    const double mx = pairwise_sum(xs) / n;
    const double my = pairwise_sum(ys) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - fit.intercept - fit.slope * xs[i];
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / n);
    return fit;
}

double kolmogorov_q(double lambda) {
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    require(!samples.empty(), "ks_test needs samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    const double sn = std::sqrt(n);
    return {d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)};
}

KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
    require(!a.empty() && !b.empty(), "ks_test_two_sample needs samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

std::vector<double> dyadic_grid(int k_lo, int k_hi, double base) {
    std::vector<double> g;
    for (int k = k_lo; k <= k_hi; ++k) g.push_back(std::pow(base, k));
    return g;
}

} // namespace levyflow
