#pragma once

// Multidimensional Farey sets
//
//   F_{Q,theta} = { p/q in [0,1)^{d-1} : (p, q) primitive, theta Q < q <= Q }
//
// with theta = 0 giving the full set F_Q. Points are produced in
// lexicographic (q, p) order, either materialized (generate_farey) or
// streamed over a q-range (for_each_farey) so that large sets never need
// to live in memory.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "horofarey/errors.hpp"
#include "horofarey/matrix.hpp"

namespace horofarey {

using i64 = std::int64_t;
using i128 = __int128;

inline constexpr i64 kDefaultFareyCap = 100'000'000;

/// True iff gcd of all coordinates is 1. The zero vector is a domain error.
inline bool is_primitive(std::span<const i64> v) {
    i64 g = 0;
    for (i64 x : v) g = std::gcd(g, x);
    if (g == 0) throw DomainError("is_primitive: zero vector");
    return g == 1;
}

inline bool is_primitive(std::initializer_list<i64> v) { return is_primitive(std::span(v.begin(), v.size())); }

/// A primitive (p, q) with 0 <= p_i < q and its location r = p / q.
struct FareyPoint {
    std::vector<i64> p;
    i64 q = 1;
    Vec r;

    FareyPoint(std::vector<i64> numerators, i64 denominator) : p(std::move(numerators)), q(denominator) {
        if (q <= 0) throw DomainError("FareyPoint: q must be positive");
        i64 g = q;
        for (i64 x : p) {
            if (x < 0 || x >= q) throw DomainError("FareyPoint: numerator outside [0, q)");
            g = std::gcd(g, x);
        }
        if (g != 1) throw DomainError("FareyPoint: (p, q) not primitive");
        r.reserve(p.size());
        for (i64 x : p) r.push_back(static_cast<double>(x) / static_cast<double>(q));
    }

    int dim() const { return static_cast<int>(p.size()) + 1; }

    friend bool operator==(const FareyPoint& a, const FareyPoint& b) { return a.q == b.q && a.p == b.p; }
};

namespace detail {

inline void check_farey_args(int d, double Q, double theta) {
    if (d < 2 || d > kMaxDim) throw DomainError("farey: d must lie in [2, 8]");
    if (!(Q >= 1.0) || !std::isfinite(Q)) throw DomainError("farey: Q must be finite and >= 1");
    if (!(theta >= 0.0 && theta < 1.0)) throw DomainError("farey: theta must lie in [0, 1)");
}

// Smallest admissible denominator: q > theta Q.
inline i64 min_denominator(double Q, double theta) {
    const i64 lo = static_cast<i64>(std::floor(theta * Q)) + 1;
    return lo < 1 ? 1 : lo;
}

} // namespace detail

/// Calls fn(std::span<const i64> p, i64 q) for every primitive (p, q)
/// with q in [q_begin, q_end] and 0 <= p_i < q, in lexicographic order.
/// This is the shardable streaming primitive.
template <class Fn>
void for_each_farey_in_range(int d, i64 q_begin, i64 q_end, Fn&& fn) {
    const int k = d - 1;
    std::vector<i64> p(static_cast<std::size_t>(k), 0);
    for (i64 q = std::max<i64>(q_begin, 1); q <= q_end; ++q) {
        std::fill(p.begin(), p.end(), 0);
        while (true) {
            i64 g = q;
            for (i64 x : p) {
                g = std::gcd(g, x);
                if (g == 1) break;
            }
            if (g == 1) fn(std::span<const i64>(p), q);
            int pos = k - 1;
            while (pos >= 0 && ++p[static_cast<std::size_t>(pos)] == q) {
                p[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) break;
        }
    }
}

template <class Fn>
void for_each_farey(int d, double Q, double theta, Fn&& fn) {
    detail::check_farey_args(d, Q, theta);
    for_each_farey_in_range(d, detail::min_denominator(Q, theta), static_cast<i64>(std::floor(Q)), std::forward<Fn>(fn));
}

/// Exact |F_Q| via the Jordan totient sum
///   sum_{q <= Q} J_{d-1}(q) = sum_{e <= Q} mu(e) * sum_{m <= Q/e} m^{d-1}.
/// Independent of the enumeration path.
inline i128 farey_count_exact_wide(int d, i64 Q) {
    if (d < 2 || d > kMaxDim) throw DomainError("farey_count_exact: d must lie in [2, 8]");
    if (Q < 1) throw DomainError("farey_count_exact: Q must be >= 1");
    if (Q > 20'000'000) throw ResourceCapError("farey_count_exact: Q too large for the Moebius sieve");
    if ((d) * std::log10(static_cast<double>(Q)) > 36.0) throw RangeError("farey_count_exact: count overflows 128 bits");
    const int k = d - 1;
    // Linear sieve for the Moebius function.
    std::vector<signed char> mu(static_cast<std::size_t>(Q + 1), 1);
    std::vector<bool> composite(static_cast<std::size_t>(Q + 1), false);
    std::vector<i64> primes;
    for (i64 i = 2; i <= Q; ++i) {
        if (!composite[static_cast<std::size_t>(i)]) {
            primes.push_back(i);
            mu[static_cast<std::size_t>(i)] = -1;
        }
        for (i64 pr : primes) {
            const i64 ip = i * pr;
            if (ip > Q) break;
            composite[static_cast<std::size_t>(ip)] = true;
            if (i % pr == 0) {
                mu[static_cast<std::size_t>(ip)] = 0;
                break;
            }
            mu[static_cast<std::size_t>(ip)] = static_cast<signed char>(-mu[static_cast<std::size_t>(i)]);
        }
    }
    // Swap the order of summation: sum_m m^k * Mertens(Q / m).
    std::vector<std::int32_t> mertens(static_cast<std::size_t>(Q + 1), 0);
    for (i64 e = 1; e <= Q; ++e)
        mertens[static_cast<std::size_t>(e)] = mertens[static_cast<std::size_t>(e - 1)] + mu[static_cast<std::size_t>(e)];
    i128 total = 0;
    for (i64 m = 1; m <= Q; ++m) {
        const std::int32_t mq = mertens[static_cast<std::size_t>(Q / m)];
        if (mq == 0) continue;
        i128 term = 1;
        for (int j = 0; j < k; ++j) term *= m;
        total += term * mq;
    }
    return total;
}

inline i64 farey_count_exact(int d, i64 Q) {
    const i128 c = farey_count_exact_wide(d, Q);
    if (c > static_cast<i128>(INT64_MAX)) throw RangeError("farey_count_exact: count exceeds 64 bits");
    return static_cast<i64>(c);
}

/// |F_{Q,theta}| from the exact counter.
inline i64 farey_count_exact(int d, double Q, double theta) {
    detail::check_farey_args(d, Q, theta);
    const i64 hi = static_cast<i64>(std::floor(Q));
    const i64 lo = detail::min_denominator(Q, theta) - 1;
    return farey_count_exact(d, hi) - (lo >= 1 ? farey_count_exact(d, lo) : 0);
}

inline double zeta(int s) {
    if (s < 2) throw DomainError("zeta: s must be >= 2");
    return std::riemann_zeta(static_cast<double>(s));
}

/// Leading-order |F_Q| ~ Q^d / (d zeta(d)).
inline double farey_count_asymptotic(int d, double Q) {
    if (d < 2 || d > kMaxDim) throw DomainError("farey_count_asymptotic: d must lie in [2, 8]");
    if (!(Q >= 1.0)) throw DomainError("farey_count_asymptotic: Q must be >= 1");
    return std::pow(Q, d) / (d * zeta(d));
}

/// Materialized F_{Q,theta} with flat storage.
class FareySet {
public:
    FareySet(int d, double Q, double theta, i64 cap = kDefaultFareyCap) : d_(d), Q_(Q), theta_(theta) {
        detail::check_farey_args(d, Q, theta);
        const double estimate = farey_count_asymptotic(d, std::floor(Q)) * (1.0 - std::pow(theta, d)) * 1.1 + 16;
        if (estimate > static_cast<double>(cap)) {
            throw ResourceCapError("generate_farey: estimated " + std::to_string(static_cast<long long>(estimate)) +
                                   " points exceeds cap " + std::to_string(cap));
        }
        for_each_farey(d, Q, theta, [&](std::span<const i64> p, i64 q) {
            q_.push_back(q);
            p_.insert(p_.end(), p.begin(), p.end());
        });
    }

    int d() const { return d_; }
    double Q() const { return Q_; }
    double theta() const { return theta_; }
    std::size_t size() const { return q_.size(); }

    i64 denominator(std::size_t i) const { return q_[i]; }
    std::span<const i64> numerators(std::size_t i) const {
        return {p_.data() + i * static_cast<std::size_t>(d_ - 1), static_cast<std::size_t>(d_ - 1)};
    }
    FareyPoint point(std::size_t i) const {
        auto p = numerators(i);
        return FareyPoint(std::vector<i64>(p.begin(), p.end()), q_[i]);
    }

private:
    int d_;
    double Q_;
    double theta_;
    std::vector<i64> q_;
    std::vector<i64> p_;
};

inline FareySet generate_farey(int d, double Q, double theta = 0.0, i64 cap = kDefaultFareyCap) {
    return FareySet(d, Q, theta, cap);
}

/// CSV dump with header q,p1,...,p{d-1} in enumeration order.
inline void write_farey_csv(std::ostream& os, int d, double Q, double theta) {
    os << "q";
    for (int i = 1; i < d; ++i) os << ",p" << i;
    os << "\n";
    for_each_farey(d, Q, theta, [&](std::span<const i64> p, i64 q) {
        os << q;
        for (i64 x : p) os << ',' << x;
        os << '\n';
    });
}

} // namespace horofarey
