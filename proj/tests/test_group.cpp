#include <gtest/gtest.h>

#include <cmath>

#include "horofarey/group.hpp"
#include "horofarey/random.hpp"

using namespace horofarey;

namespace {

// Plain triple loop, kept apart from the library product.
SquareMatrix naive_product(const SquareMatrix& a, const SquareMatrix& b) {
    SquareMatrix r(a.dim());
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) {
            long double s = 0;
            for (int k = 0; k < a.dim(); ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
            r(i, j) = static_cast<double>(s);
        }
    return r;
}

Vec random_vec(Substream& rng, int n, double lo = -1.0, double hi = 1.0) {
    Vec v(static_cast<std::size_t>(n));
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

// Random element of SL(k, R) with moderate condition number.
SquareMatrix random_sl(Substream& rng, int k) {
    while (true) {
        SquareMatrix a(k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) a(i, j) = rng.normal();
        const double det = determinant(a);
        if (std::fabs(det) < 0.1) continue;
        if (det < 0)
            for (int j = 0; j < k; ++j) a(0, j) = -a(0, j);
        return std::pow(std::fabs(det), -1.0 / k) * a;
    }
}

} // namespace

TEST(Flow, Examples) {
    EXPECT_EQ(flow(2, 0.0).matrix(), SquareMatrix::identity(2));
    const SquareMatrix f = flow(3, 1.0);
    EXPECT_DOUBLE_EQ(f(0, 0), std::exp(-1.0));
    EXPECT_DOUBLE_EQ(f(1, 1), std::exp(-1.0));
    EXPECT_DOUBLE_EQ(f(2, 2), std::exp(2.0));
    EXPECT_NEAR(determinant(flow(4, 0.37)), 1.0, 1e-12);
}

TEST(Flow, DeterminantOverRange) {
    for (int d = 2; d <= 6; ++d)
        for (double u = -30.0; u <= 30.0; u += 0.5) EXPECT_NEAR(determinant(flow(d, u / (d - 1))), 1.0, 1e-12);
}

TEST(Flow, Guards) {
    EXPECT_THROW(flow(2, NAN), DomainError);
    EXPECT_THROW(flow(2, 301.0), RangeError);
    EXPECT_THROW(flow(4, 101.0), RangeError);
    EXPECT_NO_THROW(flow(4, 99.0));
    EXPECT_THROW(flow(1, 0.0), DomainError);
    EXPECT_THROW(flow(9, 0.0), DomainError);
}

TEST(FlowTime, CutoffRoundTrip) {
    const FlowTime ft = FlowTime::from_cutoff(3, 200.0, 0.5);
    EXPECT_NEAR(ft.t, 0.5 + std::log(200.0) / 2, 1e-15);
    EXPECT_NEAR(ft.cutoff(3), 200.0, 1e-9);
    EXPECT_THROW(FlowTime::from_cutoff(2, 0.5, 0.0), DomainError);
}

TEST(FlowAtCutoff, MatchesFlowAndIsExactAtQ) {
    for (int d = 2; d <= 4; ++d) {
        const double Q = 137.0;
        const double t = std::log(Q) / (d - 1);
        EXPECT_LT(max_rel_diff(flow_at_cutoff(d, Q).matrix(), flow(d, t).matrix()), 1e-12);
        EXPECT_LT(max_rel_diff(flow_at_cutoff(d, Q, true).matrix(), flow(d, -t).matrix()), 1e-12);
    }
    for (int q = 1; q <= 2000; ++q) EXPECT_LE(q * flow_at_cutoff(2, q, true)(1, 1), 1.0);
}

TEST(Horospherical, Examples) {
    EXPECT_EQ(n_minus({0.0}).matrix(), SquareMatrix::identity(2));
    EXPECT_EQ((n_minus({0.5}) * flow(2, 0.0))(1, 1), 1.0);
    const UnimodularMatrix m = n_minus({1.0, 2.0});
    EXPECT_EQ(m(0, 2), 1.0);
    EXPECT_EQ(m(1, 2), 2.0);
    EXPECT_EQ(n_plus({0.0, 0.0}).matrix(), SquareMatrix::identity(3));
    EXPECT_EQ(n_plus({0.3})(1, 0), 0.3);
    EXPECT_THROW(n_minus({}), DomainError);
    EXPECT_THROW(n_minus({NAN}), DomainError);
}

TEST(Horospherical, GroupLawAndTranspose) {
    Substream rng(11, 0);
    for (int trial = 0; trial < 500; ++trial) {
        const int d = 2 + trial % 5;
        const Vec x = random_vec(rng, d - 1), y = random_vec(rng, d - 1);
        Vec s(x);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] += y[i];
        EXPECT_LT(max_abs_diff(naive_product(n_minus(x), n_minus(y)), n_minus(s)), 1e-12);
        EXPECT_LT(max_abs_diff(naive_product(n_plus(x), n_plus(y)), n_plus(s)), 1e-12);
        EXPECT_EQ(transpose(n_plus(x).matrix()), n_minus(x).matrix());
    }
}

TEST(Horospherical, Intertwining) {
    Substream rng(12, 0);
    for (int trial = 0; trial < 500; ++trial) {
        const int d = 2 + trial % 4;
        const double t = rng.uniform(-3.0, 3.0);
        const Vec x = random_vec(rng, d - 1);
        Vec ex(x);
        for (double& v : ex) v *= std::exp(d * t);
        const SquareMatrix lhs = naive_product(naive_product(flow(d, -t), n_minus(x)), flow(d, t));
        EXPECT_LT(max_rel_diff(lhs, n_minus(ex)), 1e-9);
        const SquareMatrix lhs2 = naive_product(naive_product(flow(d, t), n_plus(x)), flow(d, -t));
        EXPECT_LT(max_rel_diff(lhs2, n_plus(ex)), 1e-9);
    }
}

TEST(CommuteFlow, Examples) {
    const Vec zero{0.0};
    for (double t : {-2.0, 0.0, 3.0}) {
        const auto [a, b] = commute_flow(zero, t);
        EXPECT_LT(max_rel_diff(a, flow(2, t)), 1e-15);
        EXPECT_LT(max_rel_diff(b, flow(2, t)), 1e-15);
    }
    const Vec x1{0.25};
    const auto [a1, b1] = commute_flow(x1, 1.0);
    EXPECT_LT(max_rel_diff(a1, b1), 1e-9);
    const Vec x2{0.1, -0.2};
    const auto [a2, b2] = commute_flow(x2, 0.5);
    EXPECT_LT(max_rel_diff(a2, b2), 1e-9);
    // Matches an independent product.
    EXPECT_LT(max_rel_diff(a2, naive_product(n_minus(x2), flow(3, 0.5))), 1e-15);
    const Vec big{1e10};
    EXPECT_THROW(commute_flow(big, 140.0), RangeError);
}

TEST(AuxMatrices, MyAndD) {
    const Vec e{0.0, 0.0, 1.0};
    EXPECT_LT(max_abs_diff(m_y(e), SquareMatrix::identity(3)), 1e-15);
    const Vec y{0.1, 0.5};
    EXPECT_LT(max_abs_diff(m_y(y), SquareMatrix{{2.0, 0.0}, {0.1, 0.5}}), 1e-15);
    Substream rng(3, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 2 + trial % 4;
        Vec v = random_vec(rng, d);
        v.back() = rng.uniform(0.01, 3.0);
        const SquareMatrix m = m_y(v);
        for (int j = 0; j < d; ++j) EXPECT_EQ(m(d - 1, j), v[static_cast<std::size_t>(j)]);
        EXPECT_NEAR(determinant(m), 1.0, 1e-12);
    }
    EXPECT_THROW(m_y(Vec{0.3, 0.0}), DomainError);

    EXPECT_LT(max_abs_diff(d_matrix(3, 1.0), SquareMatrix::identity(3)), 1e-15);
    EXPECT_LT(max_abs_diff(d_matrix(2, 0.25), SquareMatrix{{4.0, 0.0}, {0.0, 0.25}}), 1e-15);
    EXPECT_LT(max_abs_diff(d_matrix(3, std::exp(-2.0)), flow(3, -1.0)), 1e-12);
    for (double yd : {0.01, 0.3, 1.7, 40.0})
        for (int d = 2; d <= 5; ++d) EXPECT_LT(max_rel_diff(d_matrix(d, yd), flow(d, std::log(yd) / (d - 1))), 1e-12);
    EXPECT_THROW(d_matrix(2, -1.0), DomainError);
}

TEST(Conjugator, Examples) {
    for (int d = 2; d <= 4; ++d) EXPECT_LT(max_abs_diff(conjugator(SquareMatrix::identity(d - 1)), SquareMatrix::identity(d)), 1e-15);
    const SquareMatrix a{{std::sqrt(2.0)}};
    const SquareMatrix c = conjugator(a);
    EXPECT_NEAR(determinant(c), 1.0, 1e-12);
    const SquareMatrix lhs = naive_product(naive_product(c, n_minus({0.5})), inverse(c));
    EXPECT_LT(max_abs_diff(lhs, n_minus({std::sqrt(2.0) / 2})), 1e-12);
}

TEST(Conjugator, IdentityRandomSl2) {
    Substream rng(5, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        const SquareMatrix a = random_sl(rng, 2);
        const Vec x = random_vec(rng, 2);
        const double t = rng.uniform(-2.0, 2.0);
        const SquareMatrix c = conjugator(a);
        const SquareMatrix lhs = naive_product(naive_product(c, naive_product(n_minus(x), flow(3, t))), inverse(c));
        const SquareMatrix rhs = naive_product(n_minus(row_times(x, a)), flow(3, t));
        EXPECT_LT(max_rel_diff(lhs, rhs), 1e-9);
    }
}

TEST(Conjugator, Rejections) {
    EXPECT_THROW(conjugator(SquareMatrix{{0.0}}), DomainError);
    EXPECT_THROW(conjugator(SquareMatrix{{-1.0}}), DomainError);
    EXPECT_THROW(conjugator(SquareMatrix{{1.0, 2.0}, {2.0, 4.0}}), DomainError);
}

TEST(Distance, Examples) {
    const UnimodularMatrix m = n_minus({0.2}) * flow(2, 0.7);
    EXPECT_NEAR(left_invariant_distance(m, m), 0.0, 1e-15);
    EXPECT_NEAR(left_invariant_distance(n_minus({0.3}), n_minus({0.7})), 0.4, 1e-15);
    EXPECT_NEAR(left_invariant_distance(n_plus({0.1, 0.2}), n_plus({0.4, -0.2})), 0.5, 1e-15);
}

TEST(Distance, LeftInvarianceAndFlowBound) {
    Substream rng(8, 0);
    for (int trial = 0; trial < 300; ++trial) {
        const int d = 2 + trial % 3;
        const UnimodularMatrix g(random_sl(rng, d));
        const Vec x = random_vec(rng, d - 1, -0.01, 0.01);
        const double t = rng.uniform(0.0, 1.0);
        const UnimodularMatrix a = n_minus(x) * flow(d, t), b = flow(d, t);
        EXPECT_NEAR(left_invariant_distance(g * a, g * b), left_invariant_distance(a, b), 1e-9);
        EXPECT_LE(left_invariant_distance(g * a, g * b), std::exp(d * t) * norm(x) * (1 + 1e-12));
    }
    const UnimodularMatrix bad(SquareMatrix{{1e7, 0.0}, {0.0, 1e-7}}, UnimodularMatrix::Trusted{});
    EXPECT_THROW(left_invariant_distance(bad, bad), NumericError);
}

TEST(Matrix, Basics) {
    EXPECT_THROW(SquareMatrix(0), DomainError);
    EXPECT_THROW((SquareMatrix{{1.0, 2.0}, {3.0}}), DomainError);
    EXPECT_THROW(UnimodularMatrix(SquareMatrix{{2.0, 0.0}, {0.0, 1.0}}), DomainError);
    EXPECT_THROW(inverse(SquareMatrix{{1.0, 2.0}, {2.0, 4.0}}), DomainError);
    const SquareMatrix m{{2.0, 1.0}, {1.0, 1.0}};
    EXPECT_LT(max_abs_diff(m * inverse(m), SquareMatrix::identity(2)), 1e-15);
    EXPECT_NEAR(determinant(SquareMatrix{{0.0, 1.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 0.0, 3.0}}), -3.0, 1e-15);
}
