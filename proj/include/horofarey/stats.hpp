#pragma once

// Descriptive distances between empirical laws. Farey ensembles are
// deterministic, not i.i.d., so these are used as distances rather than
// as hypothesis tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "horofarey/errors.hpp"

namespace horofarey {

/// sup |F_a - F_b| by a merge scan over two ascending samples. Tied values
/// advance both sides before the gap is measured.
inline double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double best = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        best = std::max(best, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    // Once one side is exhausted its CDF is 1 and the gap only shrinks.
    return best;
}

/// sup |F_a - F| against a continuous reference CDF.
inline double ks_one_sample(std::span<const double> a, const std::function<double(double)>& cdf) {
    if (a.empty()) throw DomainError("ks_one_sample: empty sample");
    const double n = static_cast<double>(a.size());
    double best = 0.0;
    for (std::size_t i = 0; i < a.size();) {
        std::size_t k = i;
        while (k < a.size() && a[k] == a[i]) ++k;
        const double f = cdf(a[i]);
        best = std::max({best, std::fabs(f - static_cast<double>(i) / n), std::fabs(static_cast<double>(k) / n - f)});
        i = k;
    }
    return best;
}

/// Mean |a_i - b_i| over the sorted pairing. With unequal sizes and
/// `resample` set, integrates |F_a^{-1} - F_b^{-1}| exactly instead.
inline double wasserstein1(std::span<const double> a, std::span<const double> b, bool resample = false) {
    if (a.empty() || b.empty()) throw DomainError("wasserstein1: empty sample");
    if (a.size() == b.size()) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
        return s / static_cast<double>(a.size());
    }
    if (!resample) throw DomainError("wasserstein1: sample sizes differ");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double u = 0.0, s = 0.0;
    while (i < a.size() && j < b.size()) {
        const double next = std::min(static_cast<double>(i + 1) / na, static_cast<double>(j + 1) / nb);
        s += (next - u) * std::fabs(a[i] - b[j]);
        u = next;
        if (static_cast<double>(i + 1) / na <= u) ++i;
        if (static_cast<double>(j + 1) / nb <= u) ++j;
    }
    return s;
}

/// Type-7 (linear interpolation) quantile of an ascending sample.
inline double quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw DomainError("quantile: empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double mean(std::span<const double> v) {
    if (v.empty()) throw DomainError("mean: empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double pearson_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw DomainError("pearson_correlation: need equal sizes >= 2");
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return (saa == 0.0 && sbb == 0.0) ? 1.0 : 0.0;
    return sab / std::sqrt(saa * sbb);
}

/// sup over a grid x grid lattice of thresholds (placed at the marginal
/// k/grid quantiles) of |F_12(a, b) - F_1(a) F_2(b)| for paired samples.
inline double joint_cdf_product_gap(std::span<const double> g1, std::span<const double> g2, int grid = 50) {
    if (g1.size() != g2.size() || g1.empty()) throw DomainError("joint_cdf_product_gap: need equal nonempty samples");
    if (grid < 1) throw DomainError("joint_cdf_product_gap: grid must be positive");
    std::vector<double> s1(g1.begin(), g1.end()), s2(g2.begin(), g2.end());
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
    std::vector<double> c1, c2;
    for (int k = 1; k <= grid; ++k) {
        c1.push_back(quantile(s1, static_cast<double>(k) / grid));
        c2.push_back(quantile(s2, static_cast<double>(k) / grid));
    }
    // bin(v) = first cut >= v; values above the last cut never occur.
    const auto g = static_cast<std::size_t>(grid);
    std::vector<double> hist(g * g, 0.0);
    for (std::size_t i = 0; i < g1.size(); ++i) {
        const auto a = static_cast<std::size_t>(std::lower_bound(c1.begin(), c1.end(), g1[i]) - c1.begin());
        const auto b = static_cast<std::size_t>(std::lower_bound(c2.begin(), c2.end(), g2[i]) - c2.begin());
        hist[std::min(a, g - 1) * g + std::min(b, g - 1)] += 1.0;
    }
    const double n = static_cast<double>(g1.size());
    // Two-dimensional cumulative sums.
    for (std::size_t a = 0; a < g; ++a)
        for (std::size_t b = 0; b < g; ++b) {
            double v = hist[a * g + b];
            if (a > 0) v += hist[(a - 1) * g + b];
            if (b > 0) v += hist[a * g + b - 1];
            if (a > 0 && b > 0) v -= hist[(a - 1) * g + b - 1];
            hist[a * g + b] = v;
        }
    double best = 0.0;
    for (std::size_t a = 0; a < g; ++a)
        for (std::size_t b = 0; b < g; ++b) {
            const double joint = hist[a * g + b] / n;
            const double f1 = hist[a * g + g - 1] / n;
            const double f2 = hist[(g - 1) * g + b] / n;
            best = std::max(best, std::fabs(joint - f1 * f2));
        }
    return best;
}

} // namespace horofarey
