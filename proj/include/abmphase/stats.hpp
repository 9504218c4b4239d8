#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace abmphase::stats {

inline double mean(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("mean: empty input");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double variance(std::span<const double> x) {
    const double m = mean(x);
    double acc = 0.0;
    for (double v : x) acc += (v - m) * (v - m);
    return acc / static_cast<double>(x.size());
}

inline double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

// Midpoint-interpolated median.
inline double median(std::vector<double> x) {
    if (x.empty()) throw std::invalid_argument("median: empty input");
    const std::size_t n = x.size();
    const std::size_t mid = n / 2;
    std::nth_element(x.begin(), x.begin() + mid, x.end());
    double hi = x[mid];
    if (n % 2 == 1) return hi;
    double lo = *std::max_element(x.begin(), x.begin() + mid);
    return 0.5 * (lo + hi);
}

inline double quantile(std::vector<double> x, double q) {
    if (x.empty()) throw std::invalid_argument("quantile: empty input");
    std::sort(x.begin(), x.end());
    const double pos = q * static_cast<double>(x.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= x.size()) return x.back();
    const double frac = pos - static_cast<double>(i);
    return x[i] * (1.0 - frac) + x[i + 1] * frac;
}

inline double interquartile_range(const std::vector<double>& x) {
    return quantile(x, 0.75) - quantile(x, 0.25);
}

inline double pearson_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("pearson_correlation: size mismatch or too few points");
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("pearson_correlation: zero-variance input");
    return sxy / std::sqrt(sxx * syy);
}

// Ranks with ties assigned the average rank.
inline std::vector<double> ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
        i = j + 1;
    }
    return r;
}

inline double spearman_correlation(std::span<const double> x, std::span<const double> y) {
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    return pearson_correlation(rx, ry);
}

// First four sample moments about zero.
struct RawMoments {
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
};

inline RawMoments raw_moments(std::span<const double> x) {
    RawMoments m;
    for (double v : x) {
        m.m1 += v;
        m.m2 += v * v;
        m.m3 += v * v * v;
        m.m4 += v * v * v * v;
    }
    const double n = static_cast<double>(x.size());
    m.m1 /= n;
    m.m2 /= n;
    m.m3 /= n;
    m.m4 /= n;
    return m;
}

// Standardized sample skewness and kurtosis (kurtosis of a normal is 3).
struct ShapeMoments {
    double mean = 0.0, stddev = 0.0, skewness = 0.0, kurtosis = 0.0;
};

inline ShapeMoments shape_moments(std::span<const double> x) {
    ShapeMoments s;
    s.mean = mean(x);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - s.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    const double n = static_cast<double>(x.size());
    m2 /= n;
    m3 /= n;
    m4 /= n;
    s.stddev = std::sqrt(m2);
    s.skewness = m3 / std::pow(m2, 1.5);
    s.kurtosis = m4 / (m2 * m2);
    return s;
}

}  // namespace abmphase::stats
