#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace cogsim {

// Linear-interpolated quantile of an ascending sample.
template <class T>
double quantile_sorted(const std::vector<T>& sorted, double p)
{
    if (sorted.empty()) return 0.0;
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return static_cast<double>(sorted[lo]) * (1.0 - frac) + static_cast<double>(sorted[hi]) * frac;
}

inline double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys)
{
    const std::size_t n = std::min(xs.size(), ys.size());
    if (n < 2) return 0.0;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

// Asymptotic Kolmogorov critical constant c(alpha): reject when
// sqrt(n_eff) * D > c(alpha).
inline double ks_critical_constant(double alpha) { return std::sqrt(-0.5 * std::log(alpha / 2.0)); }

// Kolmogorov survival function Q(x) = 2 sum (-1)^{k-1} exp(-2 k^2 x^2).
inline double kolmogorov_survival(double x)
{
    if (x < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;
    double critical = 0.0;     // rejection threshold for D at the requested level
    double p_value = 1.0;
    bool rejected = false;
};

inline KsResult ks_decide(double d, double n_eff, double alpha)
{
    KsResult r;
    r.statistic = d;
    r.critical = ks_critical_constant(alpha) / std::sqrt(n_eff);
    const double root = std::sqrt(n_eff);
    r.p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
    r.rejected = d > r.critical;
    return r;
}

// One-sample KS of integer-valued data against a CDF on the integers. For a
// discrete law the test is conservative.
inline KsResult ks_one_sample_discrete(std::vector<std::int64_t> sample, const std::function<double(std::int64_t)>& cdf,
                                       double alpha = 0.01)
{
    if (sample.empty()) return {};
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    std::size_t i = 0;
    for (std::int64_t k = std::min<std::int64_t>(sample.front(), 0); k <= sample.back(); ++k) {
        while (i < sample.size() && sample[i] <= k) ++i;
        d = std::max(d, std::abs(static_cast<double>(i) / n - cdf(k)));
    }
    return ks_decide(d, n, alpha);
}

inline double ks_two_sample_statistic(std::vector<std::int64_t> a, std::vector<std::int64_t> b)
{
    if (a.empty() || b.empty()) return 0.0;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() || j < b.size()) {
        std::int64_t x;
        if (j >= b.size() || (i < a.size() && a[i] <= b[j]))
            x = a[i];
        else
            x = b[j];
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

inline KsResult ks_two_sample(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b, double alpha = 0.01)
{
    if (a.empty() || b.empty()) return {};
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    return ks_decide(ks_two_sample_statistic(a, b), na * nb / (na + nb), alpha);
}

// Dvoretzky-Kiefer-Wolfowitz half-width: sup |F_n - F| <= eps w.p. >= 1 - alpha.
inline double dkw_epsilon(std::size_t n, double alpha)
{
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

// Largest amount by which the empirical CDF of `smaller` falls below that of
// `larger` (0 when `smaller` is empirically stochastically smaller everywhere).
inline double max_cdf_shortfall(std::vector<std::int64_t> smaller, std::vector<std::int64_t> larger)
{
    if (smaller.empty() || larger.empty()) return 0.0;
    std::sort(smaller.begin(), smaller.end());
    std::sort(larger.begin(), larger.end());
    const double ns = static_cast<double>(smaller.size());
    const double nl = static_cast<double>(larger.size());
    const std::int64_t top = std::max(smaller.back(), larger.back());
    std::size_t i = 0, j = 0;
    double worst = 0.0;
    for (std::int64_t x = std::min(smaller.front(), larger.front()); x <= top; ++x) {
        while (i < smaller.size() && smaller[i] <= x) ++i;
        while (j < larger.size() && larger[j] <= x) ++j;
        worst = std::max(worst, static_cast<double>(j) / nl - static_cast<double>(i) / ns);
    }
    return worst;
}

} // namespace cogsim
