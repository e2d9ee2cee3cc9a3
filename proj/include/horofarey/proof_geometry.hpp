#pragma once

// The geometric objects behind the Farey equidistribution argument:
// the truncated cone C_eps, the thickened Farey set F_Q^eps in its ball
// and cone characterizations, the cone volume, the Step-2 implication
// ||pA|| < 2 eps, and the Mahler bound eps_0 that makes the thickening a
// disjoint union.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "horofarey/errors.hpp"
#include "horofarey/farey.hpp"
#include "horofarey/group.hpp"
#include "horofarey/lattice.hpp"
#include "horofarey/matrix.hpp"
#include "horofarey/random.hpp"

namespace horofarey {

/// C_eps = { y : ||(y_1..y_{d-1})|| < eps y_d, theta < y_d <= 1 }.
struct ConeRegion {
    int d;
    double epsilon;
    double theta;

    ConeRegion(int dim, double eps, double th) : d(dim), epsilon(eps), theta(th) {
        check_group_dim(d);
        if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("ConeRegion: epsilon must be positive");
        if (!(theta > 0.0 && theta < 1.0)) throw DomainError("ConeRegion: theta must lie in (0, 1)");
    }
};

inline bool in_cone(std::span<const double> y, const ConeRegion& region) {
    if (static_cast<int>(y.size()) != region.d) throw DomainError("in_cone: length mismatch");
    const double yd = y.back();
    if (!(region.theta < yd && yd <= 1.0)) return false;
    return norm(y.first(y.size() - 1)) < region.epsilon * yd;
}

/// vol(B_1^{d-1}) eps^{d-1} (1 - theta^d) / d.
inline double cone_volume(const ConeRegion& region) {
    const int k = region.d - 1;
    const double ball = std::pow(M_PI, k / 2.0) / std::tgamma(k / 2.0 + 1.0);
    return ball * std::pow(region.epsilon, k) * (1.0 - std::pow(region.theta, region.d)) / region.d;
}

struct VolumeEstimate {
    double value;
    double standard_error;
};

/// Hit-or-miss integration of in_cone over the box
/// [-eps, eps]^{d-1} x [theta, 1].
inline VolumeEstimate cone_volume_monte_carlo(const ConeRegion& region, std::uint64_t points, Substream& rng) {
    if (points == 0) throw DomainError("cone_volume_monte_carlo: need at least one point");
    const int d = region.d;
    const double box = std::pow(2.0 * region.epsilon, d - 1) * (1.0 - region.theta);
    std::vector<double> y(static_cast<std::size_t>(d));
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < points; ++i) {
        for (int j = 0; j + 1 < d; ++j) y[static_cast<std::size_t>(j)] = rng.uniform(-region.epsilon, region.epsilon);
        y.back() = region.theta + (1.0 - region.theta) * rng.uniform_open_low();
        if (in_cone(y, region)) ++hits;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(points);
    return {box * p, box * std::sqrt(p * (1.0 - p) / static_cast<double>(points))};
}

/// Uniform point of C_eps: y_d with density ~ y_d^{d-1} on (theta, 1], y'
/// uniform in the ball of radius eps * y_d.
inline Vec sample_in_cone(const ConeRegion& region, Substream& rng) {
    const int d = region.d;
    const double td = std::pow(region.theta, d);
    double yd = 0.0;
    do {
        yd = std::pow(td + (1.0 - td) * rng.uniform_open_low(), 1.0 / d);
    } while (!(yd > region.theta));
    Vec y(static_cast<std::size_t>(d));
    double r2;
    do {
        r2 = 0.0;
        for (int j = 0; j + 1 < d; ++j) {
            y[static_cast<std::size_t>(j)] = rng.uniform(-1.0, 1.0);
            r2 += y[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(j)];
        }
    } while (r2 >= 1.0);
    for (int j = 0; j + 1 < d; ++j) y[static_cast<std::size_t>(j)] *= region.epsilon * yd;
    y.back() = yd;
    return y;
}

// ---------------------------------------------------------------------------
// Thickened Farey set

struct ThickeningParams {
    double Q;
    double theta;
    double epsilon;
    double t;
};

namespace detail {

inline constexpr double kMaxThickeningQ = 1e6;

inline void check_thickening(int d, const ThickeningParams& p) {
    check_group_dim(d);
    if (!(p.Q >= 1.0) || p.Q > kMaxThickeningQ) throw ResourceCapError("thickening: Q outside [1, 1e6]");
    if (!(p.theta > 0.0 && p.theta < 1.0)) throw DomainError("thickening: theta must lie in (0, 1)");
    if (!(p.epsilon > 0.0)) throw DomainError("thickening: epsilon must be positive");
    const double implied = std::exp((d - 1) * p.t);
    if (!(std::fabs(implied - p.Q) <= 1e-9 * p.Q)) throw DomainError("thickening: Q must equal exp((d-1) t)");
}

// Ball radius eps e^{-dt} = eps Q^{-d/(d-1)}.
inline double thickening_radius(int d, const ThickeningParams& p) {
    return p.epsilon * std::pow(p.Q, -static_cast<double>(d) / (d - 1));
}

// The |p - round(q x)| <= 1 window finds every p/q within `radius` of x
// as long as radius * q <= 1.
inline void check_window(double radius, double Q) {
    if (!(radius * Q <= 1.0)) throw DomainError("thickening: eps e^{-dt} Q must stay at most 1 for the Farey window");
}

} // namespace detail

/// Number of points r in F_{Q,theta} + Z^{d-1} with ||x - r|| < radius.
inline int farey_points_within(std::span<const double> x, double Q, double theta, double radius) {
    const int k = static_cast<int>(x.size());
    detail::check_window(radius, Q);
    const i64 q_lo = detail::min_denominator(Q, theta);
    const auto q_hi = static_cast<i64>(std::floor(Q));
    std::vector<std::array<i64, 3>> cand(static_cast<std::size_t>(k));
    std::vector<int> ncand(static_cast<std::size_t>(k));
    int count = 0;
    for (i64 q = q_lo; q <= q_hi; ++q) {
        const double qd = static_cast<double>(q);
        bool any = true;
        for (int i = 0; i < k && any; ++i) {
            const double xi = x[static_cast<std::size_t>(i)];
            const auto c = static_cast<i64>(std::llround(qd * xi));
            int m = 0;
            for (i64 p = c - 1; p <= c + 1; ++p)
                if (std::fabs(xi - static_cast<double>(p) / qd) < radius) cand[static_cast<std::size_t>(i)][m++] = p;
            ncand[static_cast<std::size_t>(i)] = m;
            any = m > 0;
        }
        if (!any) continue;
        // Walk the (at most 3^k) product of per-coordinate candidates.
        std::vector<int> idx(static_cast<std::size_t>(k), 0);
        while (true) {
            double dist2 = 0.0;
            i64 g = q;
            for (int i = 0; i < k; ++i) {
                const i64 p = cand[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
                const double diff = x[static_cast<std::size_t>(i)] - static_cast<double>(p) / qd;
                dist2 += diff * diff;
                g = std::gcd(g, p);
            }
            if (g == 1 && std::sqrt(dist2) < radius) ++count;
            int pos = k - 1;
            while (pos >= 0 && ++idx[static_cast<std::size_t>(pos)] == ncand[static_cast<std::size_t>(pos)]) {
                idx[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) break;
        }
    }
    return count;
}

/// x in F_Q^eps via the union of balls of radius eps e^{-dt} around
/// F_{Q,theta} + Z^{d-1}.
inline bool thickening_member_balls(std::span<const double> x, const ThickeningParams& p) {
    const int d = static_cast<int>(x.size()) + 1;
    detail::check_thickening(d, p);
    return farey_points_within(x, p.Q, p.theta, detail::thickening_radius(d, p)) > 0;
}

/// x in F_Q^eps via the cone condition: some primitive a has
/// a n_+(x) Phi^{-t} in C_eps. Candidates a = (p, q) are found by the same
/// denominator window; membership is decided by the matrix product and
/// in_cone alone.
inline bool thickening_member_cone(std::span<const double> x, const ThickeningParams& p) {
    const int k = static_cast<int>(x.size());
    const int d = k + 1;
    detail::check_thickening(d, p);
    detail::check_window(detail::thickening_radius(d, p), p.Q);
    const ConeRegion region(d, p.epsilon, p.theta);
    const SquareMatrix g = (n_plus(x) * flow_at_cutoff(d, p.Q, /*inverse=*/true)).matrix();
    // The cone forces theta Q < q <= Q; scan one beyond each end and let
    // in_cone decide.
    const i64 q_lo = std::max<i64>(1, static_cast<i64>(std::floor(p.theta * p.Q)) - 1);
    const auto q_hi = static_cast<i64>(std::floor(p.Q)) + 1;
    Vec a(static_cast<std::size_t>(d));
    std::vector<i64> ai(static_cast<std::size_t>(d));
    std::vector<int> off(static_cast<std::size_t>(k), -1);
    for (i64 q = q_lo; q <= q_hi; ++q) {
        std::fill(off.begin(), off.end(), -1);
        while (true) {
            for (int i = 0; i < k; ++i) {
                const double c = std::nearbyint(-static_cast<double>(q) * x[static_cast<std::size_t>(i)]);
                ai[static_cast<std::size_t>(i)] = static_cast<i64>(c) + off[static_cast<std::size_t>(i)];
            }
            ai.back() = q;
            for (int i = 0; i < d; ++i) a[static_cast<std::size_t>(i)] = static_cast<double>(ai[static_cast<std::size_t>(i)]);
            if (in_cone(row_times(a, g), region) && is_primitive(ai)) return true;
            int pos = k - 1;
            while (pos >= 0 && ++off[static_cast<std::size_t>(pos)] == 2) {
                off[static_cast<std::size_t>(pos)] = -1;
                --pos;
            }
            if (pos < 0) break;
        }
    }
    return false;
}

struct DisjointnessReport {
    std::size_t balls_checked = 0;
    std::size_t overlaps = 0;
};

/// Exhaustive check that the balls of radius eps e^{-dt} around distinct
/// points of F_{Q,theta} + Z^{d-1} are pairwise disjoint, i.e. every point
/// of the thickening sees a unique Farey point.
inline DisjointnessReport thickening_disjointness_scan(int d, const ThickeningParams& p) {
    detail::check_thickening(d, p);
    const double radius = detail::thickening_radius(d, p);
    DisjointnessReport report;
    for_each_farey(d, p.Q, p.theta, [&](std::span<const i64> num, i64 q) {
        Vec r(num.size());
        for (std::size_t i = 0; i < num.size(); ++i) r[i] = static_cast<double>(num[i]) / static_cast<double>(q);
        // Two open balls of radius rho meet iff their centres are closer than 2 rho.
        if (farey_points_within(r, p.Q, p.theta, 2.0 * radius) != 1) ++report.overlaps;
        ++report.balls_checked;
    });
    return report;
}

// ---------------------------------------------------------------------------
// Step 2: the implication ||pA|| < 2 eps

struct Step2Input {
    SquareMatrix A;  // (d-1) x (d-1)
    Vec b;           // d-1
    Vec y;           // d, y_d > 0
    double epsilon;
    double theta;
    std::vector<i64> p;  // d-1
    i64 q;
};

struct Step2Outcome {
    bool premises = false;    // (p,q) M and (0,1) M both in C_eps, where M = [[A, b^T],[0,1]] M_y
    bool conclusion = false;  // ||pA|| < factor * eps
    bool holds() const { return !premises || conclusion; }
};

inline SquareMatrix step2_matrix(const Step2Input& in) {
    const int d = static_cast<int>(in.y.size());
    SquareMatrix h(d);
    for (int i = 0; i + 1 < d; ++i) {
        for (int j = 0; j + 1 < d; ++j) h(i, j) = in.A(i, j);
        h(i, d - 1) = in.b[static_cast<std::size_t>(i)];
    }
    h(d - 1, d - 1) = 1.0;
    return h * m_y(in.y).matrix();
}

/// Evaluates both premises through the matrix M and the conclusion
/// ||pA|| < conclusion_factor * eps (default 2).
inline Step2Outcome step2_evaluate(const Step2Input& in, double conclusion_factor = 2.0) {
    const int d = static_cast<int>(in.y.size());
    check_group_dim(d);
    if (in.A.dim() != d - 1 || static_cast<int>(in.b.size()) != d - 1 || static_cast<int>(in.p.size()) != d - 1) {
        throw DomainError("step2: inconsistent dimensions");
    }
    if (!(in.y.back() > 0.0)) throw DomainError("step2: y_d must be positive");
    std::vector<i64> pq(in.p);
    pq.push_back(in.q);
    if (!is_primitive(pq)) throw DomainError("step2: (p, q) must be primitive");
    const ConeRegion region(d, in.epsilon, in.theta);
    const SquareMatrix m = step2_matrix(in);
    Vec a(pq.begin(), pq.end());
    Step2Outcome out;
    out.premises = in_cone(row_times(a, m), region) && in_cone(in.y, region);
    Vec pv(in.p.begin(), in.p.end());
    out.conclusion = norm(row_times(pv, in.A)) < conclusion_factor * in.epsilon;
    return out;
}

inline bool step2_implication_check(const Step2Input& in) { return step2_evaluate(in).holds(); }

/// Random input built so that both premises hold up to rounding. For
/// d - 1 >= 2 the shear A is solved for so that pA hits a prescribed small
/// target; for d = 2 (A = (1)) the search is over eps large enough for a
/// nonzero p to be admissible.
inline Step2Input make_step2_trial(int d, Substream& rng) {
    check_group_dim(d);
    const int k = d - 1;
    const double theta = rng.uniform(0.05, 0.95);
    const double epsilon = (k == 1) ? rng.uniform(0.3, 2.0) : rng.uniform(0.01, 1.0);
    const ConeRegion region(d, epsilon, theta);
    const Vec y = sample_in_cone(region, rng);
    const double yd = y.back();
    Vec yp(y.begin(), y.end() - 1);
    // c = p.b + q, admissible range (theta/y_d, 1/y_d].
    const double c = theta / yd + (1.0 / yd - theta / yd) * rng.uniform_open_low();

    // Target w for p A y_d^{-1/k} + c y' inside the ball of radius eps c y_d.
    Vec u(static_cast<std::size_t>(k));
    double r2;
    do {
        r2 = 0.0;
        for (double& v : u) {
            v = rng.uniform(-1.0, 1.0);
            r2 += v * v;
        }
    } while (r2 >= 1.0);
    Vec v(static_cast<std::size_t>(k));  // required p A
    for (int i = 0; i < k; ++i)
        v[static_cast<std::size_t>(i)] = (epsilon * c * yd * u[static_cast<std::size_t>(i)] - c * yp[static_cast<std::size_t>(i)]) *
                                         std::pow(yd, 1.0 / k);

    std::vector<i64> p(static_cast<std::size_t>(k));
    SquareMatrix A(k);
    if (k == 1) {
        A(0, 0) = 1.0;
        // p must be the integer nearest the target; the premise may fail.
        p[0] = std::llround(v[0]);
    } else {
        do {
            for (auto& x : p) x = rng.integer(-3, 3);
        } while (std::all_of(p.begin(), p.end(), [](i64 x) { return x == 0; }));
        // P has first row p, V has first row v; A = P^{-1} V has p A = v.
        SquareMatrix P(k), V(k);
        for (int j = 0; j < k; ++j) {
            P(0, j) = static_cast<double>(p[static_cast<std::size_t>(j)]);
            V(0, j) = v[static_cast<std::size_t>(j)];
        }
        for (int i = 1; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                P(i, j) = rng.normal();
                V(i, j) = rng.normal();
            }
        const double dp = determinant(P), dv = determinant(V);
        if (std::fabs(dv) < 1e-6 || std::fabs(dp) < 1e-6) return make_step2_trial(d, rng);
        // Rescale V's lower rows so det V = det P (sign included).
        const double s = std::pow(std::fabs(dp / dv), 1.0 / (k - 1));
        for (int i = 1; i < k; ++i)
            for (int j = 0; j < k; ++j) V(i, j) *= s;
        if (determinant(V) * dp < 0)
            for (int j = 0; j < k; ++j) V(1, j) = -V(1, j);
        A = inverse(P) * V;
    }

    // q coprime to gcd(p), and b with p.b = c - q.
    i64 g = 0;
    for (i64 x : p) g = std::gcd(g, x);
    i64 q;
    do {
        q = rng.integer(-5, 5);
    } while (std::gcd(g, q) != 1);
    Vec b(static_cast<std::size_t>(k), 0.0);
    double pp = 0.0;
    for (i64 x : p) pp += static_cast<double>(x * x);
    if (pp == 0.0) {
        q = 1;
        for (double& x : b) x = rng.uniform(-2.0, 2.0);
    } else {
        // Minimal-norm solution plus a component orthogonal to p.
        Vec w(static_cast<std::size_t>(k));
        double wp = 0.0;
        for (int i = 0; i < k; ++i) {
            w[static_cast<std::size_t>(i)] = rng.normal();
            wp += w[static_cast<std::size_t>(i)] * static_cast<double>(p[static_cast<std::size_t>(i)]);
        }
        for (int i = 0; i < k; ++i) {
            const double pi = static_cast<double>(p[static_cast<std::size_t>(i)]);
            b[static_cast<std::size_t>(i)] = pi * (c - static_cast<double>(q)) / pp + (w[static_cast<std::size_t>(i)] - wp * pi / pp);
        }
    }
    return {std::move(A), std::move(b), y, epsilon, theta, std::move(p), q};
}

// ---------------------------------------------------------------------------
// Mahler bound

struct MahlerBound {
    double infimum;       // min ||pA|| over the family, p != 0
    double epsilon0;      // infimum / 2
    bool box_certified;   // the box search already attained the exact minimum for every member
};

/// For d - 1 >= 2 the exact minimum is the shortest vector of Z^{d-1} A,
/// which certifies the box search (and replaces it where the box missed).
inline MahlerBound mahler_bound(std::span<const SquareMatrix> family, int search_bound) {
    if (family.empty()) throw DomainError("mahler_epsilon0: empty family");
    if (search_bound < 4) throw DomainError("mahler_epsilon0: search_bound must be >= 4");
    double inf = INFINITY;
    bool certified = true;
    for (const SquareMatrix& A : family) {
        const int k = A.dim();
        if (std::fabs(std::fabs(determinant(A)) - 1.0) > 1e-8 * (k + 1)) {
            throw DomainError("mahler_epsilon0: family members must be unimodular");
        }
        double box = INFINITY;
        std::vector<i64> p(static_cast<std::size_t>(k), -search_bound);
        Vec pv(static_cast<std::size_t>(k));
        while (true) {
            if (std::any_of(p.begin(), p.end(), [](i64 x) { return x != 0; })) {
                for (int i = 0; i < k; ++i) pv[static_cast<std::size_t>(i)] = static_cast<double>(p[static_cast<std::size_t>(i)]);
                box = std::min(box, norm(row_times(pv, A)));
            }
            int pos = k - 1;
            while (pos >= 0 && ++p[static_cast<std::size_t>(pos)] > search_bound) {
                p[static_cast<std::size_t>(pos)] = -search_bound;
                --pos;
            }
            if (pos < 0) break;
        }
        double exact = box;
        if (k == 1) {
            exact = std::fabs(A(0, 0));
        } else {
            SquareMatrix unit = A;
            if (determinant(A) < 0)
                for (int j = 0; j < k; ++j) unit(0, j) = -unit(0, j);
            exact = shortest_vector(Lattice(unit));
        }
        if (box > exact * (1 + 1e-9)) certified = false;
        inf = std::min(inf, std::min(box, exact));
    }
    return {inf, inf / 2.0, certified};
}

inline double mahler_epsilon0(std::span<const SquareMatrix> family, int search_bound) {
    return mahler_bound(family, search_bound).epsilon0;
}

/// Looks for (p, q) != (0, 1) primitive with ||p||_inf <= p_box and
/// |q| <= q_max such that (p, q) M lands in C_eps, M = [[A, b^T],[0,1]] M_y.
inline std::optional<std::vector<i64>> step2_disjointness_violation(const SquareMatrix& A, std::span<const double> b,
                                                                    std::span<const double> y, const ConeRegion& region,
                                                                    int p_box, int q_max) {
    const int d = region.d;
    const Step2Input shape{A, Vec(b.begin(), b.end()), Vec(y.begin(), y.end()), region.epsilon, region.theta,
                           std::vector<i64>(static_cast<std::size_t>(d - 1), 0), 1};
    const SquareMatrix m = step2_matrix(shape);
    std::vector<i64> a(static_cast<std::size_t>(d), -p_box);
    a.back() = -q_max;
    Vec av(static_cast<std::size_t>(d));
    while (true) {
        const bool is_base = std::all_of(a.begin(), a.end() - 1, [](i64 x) { return x == 0; }) && a.back() == 1;
        const bool nonzero = std::any_of(a.begin(), a.end(), [](i64 x) { return x != 0; });
        if (!is_base && nonzero && is_primitive(a)) {
            for (int i = 0; i < d; ++i) av[static_cast<std::size_t>(i)] = static_cast<double>(a[static_cast<std::size_t>(i)]);
            if (in_cone(row_times(av, m), region)) return a;
        }
        int pos = d - 1;
        while (pos >= 0) {
            const i64 lim = (pos == d - 1) ? q_max : p_box;
            if (++a[static_cast<std::size_t>(pos)] <= lim) break;
            a[static_cast<std::size_t>(pos)] = -lim;
            --pos;
        }
        if (pos < 0) break;
    }
    return std::nullopt;
}

} // namespace horofarey
