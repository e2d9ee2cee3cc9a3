#pragma once

// Unimodular lattices Z^d B (row convention), LLL reduction with integer
// transform tracking, Fincke-Pohst enumeration, and the SL(d, Z)-invariant
// observables evaluated on them.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "horofarey/errors.hpp"
#include "horofarey/farey.hpp"
#include "horofarey/group.hpp"
#include "horofarey/matrix.hpp"

namespace horofarey {

inline constexpr double kDefaultLllDelta = 0.99;
inline constexpr std::uint64_t kEnumerationNodeCap = 50'000'000;

/// An LLL-reduced basis together with the integer matrix U such that
/// reduced = U * original.
struct ReducedBasis {
    SquareMatrix basis;
    std::vector<i64> transform;  // d x d, row-major
    double delta = kDefaultLllDelta;
};

class Lattice {
public:
    explicit Lattice(SquareMatrix basis) : basis_(std::move(basis)) {
        if (basis_.dim() < 2) throw DomainError("Lattice: dimension must be >= 2");
        if (!basis_.all_finite()) throw RangeError("Lattice: non-finite basis entry");
        const double det = determinant(basis_);
        if (!(std::fabs(det - 1.0) <= 1e-8 * basis_.dim())) {
            throw DomainError("Lattice: basis determinant " + std::to_string(det) + " is not 1");
        }
    }

    explicit Lattice(const UnimodularMatrix& basis) : Lattice(basis.matrix()) {}

    static Lattice standard(int d) { return Lattice(SquareMatrix::identity(d)); }

    int dim() const { return basis_.dim(); }
    const SquareMatrix& basis() const { return basis_; }
    const std::optional<ReducedBasis>& reduced() const { return reduced_; }

    Lattice with_reduced(ReducedBasis r) const {
        Lattice out = *this;
        out.reduced_ = std::move(r);
        return out;
    }

private:
    SquareMatrix basis_;
    std::optional<ReducedBasis> reduced_;
};

namespace detail {

using Real = long double;

struct Gso {
    int n = 0;
    std::array<std::array<Real, kMaxDim>, kMaxDim> b{};
    std::array<std::array<Real, kMaxDim>, kMaxDim> mu{};
    std::array<std::array<Real, kMaxDim>, kMaxDim> star{};
    std::array<Real, kMaxDim> norm2{};

    void load(const SquareMatrix& m) {
        n = m.dim();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) b[i][j] = m(i, j);
    }

    Real dot_b(int i, const std::array<Real, kMaxDim>& v) const {
        Real s = 0;
        for (int k = 0; k < n; ++k) s += b[i][k] * v[k];
        return s;
    }

    // Rows 0..n-1 of mu and star from scratch.
    void recompute_from(int first) {
        for (int i = first; i < n; ++i) {
            star[i] = b[i];
            for (int j = 0; j < i; ++j) {
                mu[i][j] = dot_b(i, star[j]) / norm2[j];
                for (int k = 0; k < n; ++k) star[i][k] -= mu[i][j] * star[j][k];
            }
            Real s = 0;
            for (int k = 0; k < n; ++k) s += star[i][k] * star[i][k];
            norm2[i] = s;
            mu[i][i] = 1;
        }
    }
};

inline SquareMatrix to_matrix(const Gso& g) {
    SquareMatrix m(g.n);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) m(i, j) = static_cast<double>(g.b[i][j]);
    return m;
}

inline double lll_failure_condition(const SquareMatrix& m) { return condition_estimate(m); }

} // namespace detail

/// True iff the rows are size-reduced (|mu_ij| <= 1/2 + slack) and satisfy
/// the Lovasz condition with parameter delta.
inline bool is_lll_reduced(const SquareMatrix& basis, double delta, double slack = 1e-9) {
    detail::Gso g;
    g.load(basis);
    g.recompute_from(0);
    for (int i = 1; i < g.n; ++i) {
        for (int j = 0; j < i; ++j)
            if (std::fabs(static_cast<double>(g.mu[i][j])) > 0.5 + slack) return false;
        const detail::Real m = g.mu[i][i - 1];
        if (g.norm2[i] < (delta - m * m) * g.norm2[i - 1] * (1 - slack)) return false;
    }
    return true;
}

/// LLL reduction in extended precision with integer transform tracking.
/// The transform is verified unimodular before returning.
inline Lattice lll_reduce(const Lattice& lattice, double delta = kDefaultLllDelta) {
    if (!(delta > 0.25 && delta < 1.0)) throw DomainError("lll_reduce: delta must lie in (0.25, 1)");
    using detail::Real;
    const int n = lattice.dim();
    detail::Gso g;
    g.load(lattice.basis());
    std::array<std::array<i64, kMaxDim>, kMaxDim> u{};
    for (int i = 0; i < n; ++i) u[i][i] = 1;
    g.recompute_from(0);

    const long iteration_cap = 100'000L * n * n;
    long iterations = 0;
    int k = 1;
    while (k < n) {
        if (++iterations > iteration_cap) {
            throw NumericError("lll_reduce: iteration cap reached (basis condition ~ " +
                               std::to_string(detail::lll_failure_condition(lattice.basis())) + ")");
        }
        // Size-reduce b_k; repeat once more if rounding left a large mu.
        for (int pass = 0; pass < 4; ++pass) {
            bool changed = false;
            for (int j = k - 1; j >= 0; --j) {
                const Real m = g.mu[k][j];
                if (std::fabs(m) <= 0.5L) continue;
                const Real r = std::nearbyint(m);
                if (std::fabs(r) > 0x1.0p52L) throw NumericError("lll_reduce: size-reduction coefficient overflow");
                const i64 ri = static_cast<i64>(r);
                for (int c = 0; c < n; ++c) {
                    g.b[k][c] -= r * g.b[j][c];
                    u[k][c] -= ri * u[j][c];
                }
                for (int i = 0; i < j; ++i) g.mu[k][i] -= r * g.mu[j][i];
                g.mu[k][j] -= r;
                changed = true;
            }
            if (!changed) break;
            g.recompute_from(k);
        }
        const Real m = g.mu[k][k - 1];
        if (g.norm2[k] < (static_cast<Real>(delta) - m * m) * g.norm2[k - 1]) {
            std::swap(g.b[k], g.b[k - 1]);
            std::swap(u[k], u[k - 1]);
            g.recompute_from(k - 1);
            k = std::max(k - 1, 1);
        } else {
            ++k;
        }
    }

    ReducedBasis out{detail::to_matrix(g), std::vector<i64>(static_cast<std::size_t>(n * n)), delta};
    SquareMatrix uf(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            out.transform[static_cast<std::size_t>(i * n + j)] = u[i][j];
            uf(i, j) = static_cast<double>(u[i][j]);
        }
    const double det_u = determinant(uf);
    if (!(std::fabs(std::fabs(det_u) - 1.0) < 1e-6)) {
        throw NumericError("lll_reduce: transform determinant " + std::to_string(det_u) + " is not +-1");
    }
    return lattice.with_reduced(std::move(out));
}

inline const SquareMatrix& reduced_basis_of(const Lattice& lattice, std::optional<Lattice>& holder) {
    if (lattice.reduced()) return lattice.reduced()->basis;
    holder = lll_reduce(lattice);
    return holder->reduced()->basis;
}

/// Depth-first enumeration of all nonzero coefficient vectors x (up to
/// sign: the last nonzero coordinate is positive) with ||x B||^2 <= bound.
///
/// visit(std::span<const i64> x, long double norm2) returns the new bound,
/// which may shrink the search. B should be LLL-reduced.
template <class Visit>
void enumerate_short_vectors(const SquareMatrix& basis, long double bound, Visit&& visit,
                             std::uint64_t node_cap = kEnumerationNodeCap) {
    using detail::Real;
    detail::Gso g;
    g.load(basis);
    g.recompute_from(0);
    const int n = g.n;
    std::array<i64, kMaxDim> x{};
    std::array<Real, kMaxDim> center{};
    std::array<Real, kMaxDim> partial{};  // squared length contributed by levels > j
    std::uint64_t nodes = 0;

    // Iterative Schnorr-Euchner-free plain Fincke-Pohst: at each level run
    // x_j over the full admissible interval in increasing order.
    std::array<i64, kMaxDim> hi{};
    auto interval = [&](int j) {
        Real c = 0;
        for (int i = j + 1; i < n; ++i) c -= static_cast<Real>(x[i]) * g.mu[i][j];
        center[j] = c;
        const Real rem = bound - partial[j];
        if (rem < 0) return false;
        const Real w = std::sqrt(rem / g.norm2[j]);
        i64 lo = static_cast<i64>(std::ceil(c - w));
        hi[j] = static_cast<i64>(std::floor(c + w));
        // Sign convention: the highest nonzero coordinate is positive.
        bool upper_zero = true;
        for (int i = j + 1; i < n; ++i)
            if (x[i] != 0) upper_zero = false;
        if (upper_zero) lo = std::max<i64>(lo, 0);
        x[j] = lo;
        return lo <= hi[j];
    };

    int j = n - 1;
    partial[j] = 0;
    if (!interval(j)) return;
    while (true) {
        if (++nodes > node_cap) throw ResourceCapError("enumerate_short_vectors: node cap exceeded");
        if (x[j] > hi[j]) {
            if (++j >= n) return;
            ++x[j];
            continue;
        }
        const Real diff = static_cast<Real>(x[j]) - center[j];
        const Real len = partial[j] + diff * diff * g.norm2[j];
        if (len > bound) {
            // Past the centre the terms only grow.
            if (static_cast<Real>(x[j]) > center[j]) {
                x[j] = hi[j] + 1;
            } else {
                ++x[j];
            }
            continue;
        }
        if (j == 0) {
            bool zero = true;
            for (int i = 0; i < n; ++i)
                if (x[i] != 0) zero = false;
            if (!zero) bound = visit(std::span<const i64>(x.data(), static_cast<std::size_t>(n)), len);
            ++x[0];
            continue;
        }
        partial[j - 1] = len;
        --j;
        if (!interval(j)) {
            ++j;
            ++x[j];
        }
    }
}

namespace detail {

// Exact length of x B, accumulated in long double from the basis rows.
inline Real combination_norm2(const SquareMatrix& basis, std::span<const i64> x) {
    const int n = basis.dim();
    Real s = 0;
    for (int c = 0; c < n; ++c) {
        Real v = 0;
        for (int i = 0; i < n; ++i) v += static_cast<Real>(x[static_cast<std::size_t>(i)]) * basis(i, c);
        s += v * v;
    }
    return s;
}

} // namespace detail

/// Euclidean length of a shortest nonzero vector.
inline double shortest_vector(const Lattice& lattice) {
    std::optional<Lattice> holder;
    const SquareMatrix& b = reduced_basis_of(lattice, holder);
    detail::Real best = std::numeric_limits<detail::Real>::infinity();
    for (int i = 0; i < b.dim(); ++i) {
        detail::Real s = 0;
        for (double v : b.row(i)) s += static_cast<detail::Real>(v) * v;
        best = std::min(best, s);
    }
    // A small slack keeps the exact minimiser inside the GSO-rounded bound.
    enumerate_short_vectors(b, best * (1 + 1e-12L), [&](std::span<const i64> x, detail::Real) {
        best = std::min(best, detail::combination_norm2(b, x));
        return best * (1 + 1e-12L);
    });
    return static_cast<double>(std::sqrt(best));
}

/// Second successive minimum: the shortest vector linearly independent of
/// a shortest one.
inline double second_minimum(const Lattice& lattice) {
    std::optional<Lattice> holder;
    const SquareMatrix& b = reduced_basis_of(lattice, holder);
    const int n = b.dim();
    detail::Real bound = 0;
    for (int i = 0; i < 2; ++i) {
        detail::Real s = 0;
        for (double v : b.row(i)) s += static_cast<detail::Real>(v) * v;
        bound = std::max(bound, s);
    }
    struct Candidate {
        detail::Real norm2;
        std::array<i64, kMaxDim> x;
    };
    std::vector<Candidate> found;
    enumerate_short_vectors(b, bound * (1 + 1e-12L), [&](std::span<const i64> x, detail::Real) {
        Candidate c{detail::combination_norm2(b, x), {}};
        std::copy(x.begin(), x.end(), c.x.begin());
        found.push_back(c);
        return bound * (1 + 1e-12L);
    });
    std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& c) { return a.norm2 < c.norm2; });
    if (found.empty()) throw NumericError("second_minimum: enumeration found no vectors");
    const auto& first = found.front().x;
    for (const auto& c : found) {
        bool parallel = true;
        for (int i = 0; i < n && parallel; ++i)
            for (int j = i + 1; j < n; ++j)
                if (static_cast<i128>(first[i]) * c.x[j] != static_cast<i128>(first[j]) * c.x[i]) {
                    parallel = false;
                    break;
                }
        if (!parallel) return static_cast<double>(std::sqrt(c.norm2));
    }
    throw NumericError("second_minimum: no independent vector within the LLL bound");
}

/// Number of nonzero lattice vectors of length strictly below `radius`.
inline i64 ball_count(const Lattice& lattice, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("ball_count: radius must be positive");
    const int d = lattice.dim();
    const double ball_volume = std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0 + 1.0) * std::pow(radius, d);
    if (ball_volume > 1e6) throw ResourceCapError("ball_count: radius too large for enumeration");
    std::optional<Lattice> holder;
    const SquareMatrix& b = reduced_basis_of(lattice, holder);
    const detail::Real r2 = static_cast<detail::Real>(radius) * radius;
    i64 count = 0;
    enumerate_short_vectors(b, r2 * (1 + 1e-12L), [&](std::span<const i64> x, detail::Real) {
        if (detail::combination_norm2(b, x) < r2) count += 2;
        return r2 * (1 + 1e-12L);
    });
    return count;
}

/// Point z = x + iy of the modular fundamental domain
/// { |x| <= 1/2, x^2 + y^2 >= 1 } representing a planar unimodular lattice.
struct ModularPoint {
    double x;
    double y;
};

/// Gauss reduction with orientation-preserving moves, then
/// z = (b1.b2 + i det) / |b1|^2 folded into the fundamental domain.
inline ModularPoint fundamental_point_d2(const Lattice& lattice) {
    if (lattice.dim() != 2) throw DomainError("fundamental_point_d2: lattice must be planar");
    using detail::Real;
    const SquareMatrix& m = lattice.basis();
    Real b1[2] = {m(0, 0), m(0, 1)};
    Real b2[2] = {m(1, 0), m(1, 1)};
    auto dot = [](const Real* a, const Real* c) { return a[0] * c[0] + a[1] * c[1]; };
    for (int it = 0; it < 10'000; ++it) {
        const Real r = std::nearbyint(dot(b1, b2) / dot(b1, b1));
        b2[0] -= r * b1[0];
        b2[1] -= r * b1[1];
        if (dot(b2, b2) < dot(b1, b1)) {
            // (b1, b2) -> (b2, -b1) keeps det = +1.
            const Real t0 = b1[0], t1 = b1[1];
            b1[0] = b2[0];
            b1[1] = b2[1];
            b2[0] = -t0;
            b2[1] = -t1;
        } else {
            const Real g11 = dot(b1, b1), g12 = dot(b1, b2), g22 = dot(b2, b2);
            const Real det = b1[0] * b2[1] - b1[1] * b2[0];
            const Real trace = g11 + g22;
            // cond_2 of the Gram matrix from its eigenvalues.
            const Real disc = std::sqrt(std::max<Real>(0, trace * trace / 4 - det * det));
            const Real lmin = trace / 2 - disc, lmax = trace / 2 + disc;
            if (!(lmin > 0) || lmax / lmin > 1e12L) throw NumericError("fundamental_point_d2: degenerate Gram matrix");
            double x = static_cast<double>(g12 / g11);
            double y = static_cast<double>(det / g11);
            if (std::fabs(x + 0.5) < 1e-12) x = 0.5;
            if (x < 0 && std::fabs(x * x + y * y - 1.0) < 1e-12) x = -x;
            return {x, y};
        }
    }
    throw NumericError("fundamental_point_d2: reduction did not terminate");
}

/// Lattice Z^d B^{-T}.
inline Lattice dual_lattice(const Lattice& lattice) {
    return Lattice(transpose(inverse(lattice.basis())));
}

/// Z^d (n_-(r) Phi^t) for a Farey point r.
inline Lattice embed_farey(const FareyPoint& point, double t) {
    return Lattice((n_minus(point.r) * flow(point.dim(), t)).matrix());
}

/// Z^d (n_-(r A) Phi^t).
inline Lattice embed_farey_sheared(const FareyPoint& point, const SquareMatrix& A, double t) {
    const int k = point.dim() - 1;
    if (A.dim() != k) throw DomainError("embed_farey_sheared: A must be (d-1)x(d-1)");
    if (condition_estimate(A) > 1e12) throw DomainError("embed_farey_sheared: singular A");
    const Vec shifted = row_times(point.r, A);
    return Lattice((n_minus(shifted) * flow(point.dim(), t)).matrix());
}

// ---------------------------------------------------------------------------
// Observables

struct ObservableSpec {
    enum class Kind { shortest_vector, second_minimum, ball_count, fundamental_y };

    Kind kind = Kind::shortest_vector;
    double radius = 0.0;                                    // ball_count
    double y_cap = std::numeric_limits<double>::infinity();  // fundamental_y

    static ObservableSpec shortest() { return {}; }
    static ObservableSpec second() { return {Kind::second_minimum}; }
    static ObservableSpec ball(double r) {
        if (!(r > 0.0)) throw DomainError("ObservableSpec: ball_count radius must be positive");
        return {Kind::ball_count, r};
    }
    static ObservableSpec fundamental(double cap = std::numeric_limits<double>::infinity()) {
        if (!(cap > 0.0)) throw DomainError("ObservableSpec: y cap must be positive");
        return {Kind::fundamental_y, 0.0, cap};
    }

    friend bool operator==(const ObservableSpec&, const ObservableSpec&) = default;
};

/// Accepts "shortest_vector" (alias "sv"), "second_minimum" ("lambda2"),
/// "ball_count:<r>" and "fundamental_y[:<cap>]".
inline ObservableSpec parse_observable(const std::string& text) {
    auto number_after = [&](std::size_t colon) {
        const std::string tail = text.substr(colon + 1);
        double v = 0;
        auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), v);
        if (ec != std::errc() || ptr != tail.data() + tail.size()) throw DomainError("bad observable parameter: " + text);
        return v;
    };
    if (text == "shortest_vector" || text == "sv") return ObservableSpec::shortest();
    if (text == "second_minimum" || text == "lambda2") return ObservableSpec::second();
    if (text.rfind("ball_count:", 0) == 0) return ObservableSpec::ball(number_after(text.find(':')));
    if (text == "fundamental_y") return ObservableSpec::fundamental();
    if (text.rfind("fundamental_y:", 0) == 0) return ObservableSpec::fundamental(number_after(text.find(':')));
    throw DomainError("unknown observable: " + text);
}

inline std::string to_string(const ObservableSpec& o) {
    auto fmt = [](double v) {
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, ptr);
    };
    switch (o.kind) {
        case ObservableSpec::Kind::shortest_vector: return "shortest_vector";
        case ObservableSpec::Kind::second_minimum: return "second_minimum";
        case ObservableSpec::Kind::ball_count: return "ball_count:" + fmt(o.radius);
        case ObservableSpec::Kind::fundamental_y:
            return std::isinf(o.y_cap) ? "fundamental_y" : "fundamental_y:" + fmt(o.y_cap);
    }
    return "?";
}

inline double evaluate(const ObservableSpec& o, const Lattice& lattice) {
    switch (o.kind) {
        case ObservableSpec::Kind::shortest_vector: return shortest_vector(lattice);
        case ObservableSpec::Kind::second_minimum: return second_minimum(lattice);
        case ObservableSpec::Kind::ball_count: return static_cast<double>(ball_count(lattice, o.radius));
        case ObservableSpec::Kind::fundamental_y: return std::min(fundamental_point_d2(lattice).y, o.y_cap);
    }
    throw DomainError("evaluate: unknown observable");
}

} // namespace horofarey
