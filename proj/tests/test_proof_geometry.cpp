#include <gtest/gtest.h>

#include <cmath>

#include "horofarey/proof_geometry.hpp"

using namespace horofarey;

namespace {

ThickeningParams params(int d, double Q, double theta, double eps) {
    return {Q, theta, eps, std::log(Q) / (d - 1)};
}

} // namespace

TEST(Cone, Membership) {
    const ConeRegion r(3, 0.2, 0.4);
    EXPECT_TRUE(in_cone(Vec{0.0, 0.0, 1.0}, r));
    EXPECT_FALSE(in_cone(Vec{0.0, 0.0, 0.4}, r));
    EXPECT_TRUE(in_cone(Vec{0.0, 0.0, 0.4000001}, r));
    EXPECT_FALSE(in_cone(Vec{0.0, 0.0, 1.0000001}, r));
    EXPECT_FALSE(in_cone(Vec{0.2 * 0.5, 0.0, 0.5}, r));
    EXPECT_TRUE(in_cone(Vec{0.2 * 0.5 * 0.999, 0.0, 0.5}, r));
    EXPECT_THROW(in_cone(Vec{0.0, 1.0}, r), DomainError);
    EXPECT_THROW(ConeRegion(2, 0.0, 0.5), DomainError);
    EXPECT_THROW(ConeRegion(2, 0.1, 0.0), DomainError);
    EXPECT_THROW(ConeRegion(2, 0.1, 1.0), DomainError);
}

TEST(Cone, VolumeClosedForm) {
    EXPECT_NEAR(cone_volume(ConeRegion(2, 0.1, 0.5)), 0.075, 1e-15);
    EXPECT_NEAR(cone_volume(ConeRegion(3, 0.2, 0.3)), M_PI * 0.04 * (1 - 0.027) / 3, 1e-15);
    EXPECT_LT(cone_volume(ConeRegion(2, 0.1, 1 - 1e-12)), 1e-12);
}

TEST(Cone, VolumeMonteCarlo) {
    Substream rng(1, 0);
    for (const auto& r : {ConeRegion(2, 0.1, 0.5), ConeRegion(3, 0.2, 0.3), ConeRegion(4, 0.5, 0.7)}) {
        const VolumeEstimate e = cone_volume_monte_carlo(r, 1'000'000, rng);
        EXPECT_NEAR(e.value, cone_volume(r), 4 * e.standard_error);
        EXPECT_NEAR(e.value / cone_volume(r), 1.0, 0.01);
    }
}

TEST(Cone, UniformSamplerStaysInside) {
    Substream rng(2, 0);
    const ConeRegion r(3, 0.3, 0.2);
    double mean_yd = 0;
    const int n = 100'000;
    for (int i = 0; i < n; ++i) {
        const Vec y = sample_in_cone(r, rng);
        ASSERT_TRUE(in_cone(y, r));
        mean_yd += y.back();
    }
    // E[y_d] = d (1 - theta^{d+1}) / ((d+1) (1 - theta^d)).
    EXPECT_NEAR(mean_yd / n, 3 * (1 - std::pow(0.2, 4)) / (4 * (1 - std::pow(0.2, 3))), 0.002);
}

TEST(Thickening, Examples) {
    const auto p = params(2, 50, 0.3, 0.4);
    const double rho = 0.4 / (50.0 * 50.0);
    EXPECT_TRUE(thickening_member_balls(Vec{1.0 / 17}, p));
    EXPECT_TRUE(thickening_member_cone(Vec{1.0 / 17}, p));
    EXPECT_TRUE(thickening_member_balls(Vec{3.0 + 1.0 / 17}, p));
    // 1/17 is isolated in F_50: its neighbours are at distance >= 1/(17*50).
    EXPECT_FALSE(thickening_member_balls(Vec{1.0 / 17 + 2 * rho}, p));
    EXPECT_FALSE(thickening_member_cone(Vec{1.0 / 17 + 2 * rho}, p));
    // q = 7 <= theta Q is excluded.
    EXPECT_FALSE(thickening_member_balls(Vec{1.0 / 7}, p));
    EXPECT_FALSE(thickening_member_cone(Vec{1.0 / 7}, p));
    // q = Q is included.
    EXPECT_TRUE(thickening_member_balls(Vec{1.0 / 50 + 0.5 * rho}, p));
    EXPECT_TRUE(thickening_member_cone(Vec{1.0 / 50 + 0.5 * rho}, p));
}

TEST(Thickening, Symmetry) {
    Substream rng(3, 0);
    for (int trial = 0; trial < 2000; ++trial) {
        const int d = 2 + trial % 2;
        const double Q = d == 2 ? 60 : 15;
        const auto p = params(d, Q, 0.25, 0.6);
        Vec x(static_cast<std::size_t>(d - 1));
        const FareySet s = generate_farey(d, Q, 0.25);
        const FareyPoint f = s.point(static_cast<std::size_t>(rng.integer(0, static_cast<i64>(s.size()) - 1)));
        const double rho = detail::thickening_radius(d, p);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = f.r[i] + rng.uniform(-1.5 * rho, 1.5 * rho);
        Vec neg(x);
        for (double& v : neg) v = -v;
        EXPECT_EQ(thickening_member_balls(x, p), thickening_member_balls(neg, p));
        EXPECT_EQ(thickening_member_cone(x, p), thickening_member_cone(neg, p));
    }
}

TEST(Thickening, EquivalenceSmoke) {
    Substream rng(4, 0);
    int inside = 0;
    for (int trial = 0; trial < 20'000; ++trial) {
        const int d = 2 + trial % 2;
        const double Q = d == 2 ? 50 : 12;
        const auto p = params(d, Q, rng.uniform(0.05, 0.95), rng.uniform(0.01, 1.0));
        Vec x(static_cast<std::size_t>(d - 1));
        const FareySet s = generate_farey(d, Q, 0.0);
        const FareyPoint f = s.point(static_cast<std::size_t>(rng.integer(0, static_cast<i64>(s.size()) - 1)));
        const double rho = detail::thickening_radius(d, p);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = f.r[i] + rng.integer(-2, 2) + rng.uniform(-1.2 * rho, 1.2 * rho);
        const bool a = thickening_member_balls(x, p), b = thickening_member_cone(x, p);
        ASSERT_EQ(a, b) << "d=" << d << " x0=" << x[0] << " theta=" << p.theta << " eps=" << p.epsilon;
        inside += a;
    }
    EXPECT_GT(inside, 2000);
    EXPECT_LT(inside, 18'000);
}

TEST(Thickening, TinyEpsilonOnlyExactPoints) {
    const auto p = params(2, 16, 0.1, 1e-9);
    for (int k = 0; k < 64; ++k) {
        const double x = k / 64.0;
        // k/64 lies in F_{16, 0.1} iff its reduced denominator is in (1.6, 16].
        int num = k, den = 64;
        const int g = std::gcd(num, den);
        num /= g;
        den /= g;
        const bool expected = den <= 16 && den > 1.6;
        EXPECT_EQ(thickening_member_balls(Vec{x}, p), expected) << k;
        EXPECT_EQ(thickening_member_cone(Vec{x}, p), expected) << k;
    }
}

TEST(Thickening, Guards) {
    EXPECT_THROW(thickening_member_balls(Vec{0.1}, ThickeningParams{50, 0.3, 0.1, 1.0}), DomainError);
    EXPECT_THROW(thickening_member_balls(Vec{0.1}, params(2, 50, 0.0, 0.1)), DomainError);
    EXPECT_THROW(thickening_member_balls(Vec{0.1}, params(2, 2e6, 0.5, 0.1)), ResourceCapError);
    EXPECT_THROW(thickening_member_cone(Vec{0.1}, params(2, 4, 0.5, 100.0)), DomainError);
}

TEST(Thickening, DisjointAtMahlerEpsilon) {
    const std::vector<SquareMatrix> unit{SquareMatrix::identity(1)};
    const double eps0 = mahler_epsilon0(unit, 4);
    EXPECT_EQ(eps0, 0.5);
    for (double Q : {2.0, 17.0, 60.0}) {
        const DisjointnessReport r = thickening_disjointness_scan(2, params(2, Q, 0.2, eps0));
        EXPECT_EQ(r.overlaps, 0u);
        EXPECT_EQ(static_cast<i64>(r.balls_checked), farey_count_exact(2, Q, 0.2));
    }
    // Far above eps0 the balls around 1/20 and 1/19 meet.
    const DisjointnessReport bad = thickening_disjointness_scan(2, params(2, 20, 0.01, 8.0));
    EXPECT_GT(bad.overlaps, 0u);
}

TEST(Step2, RandomTrialsHold) {
    Substream rng(5, 0);
    int premises = 0;
    for (int trial = 0; trial < 20'000; ++trial) {
        const int d = 2 + trial % 3;
        const Step2Input in = make_step2_trial(d, rng);
        const Step2Outcome out = step2_evaluate(in);
        premises += out.premises;
        ASSERT_TRUE(out.holds());
        ASSERT_TRUE(step2_implication_check(in));
    }
    EXPECT_GT(premises, 10'000);
}

TEST(Step2, FaultInjectionIsCaught) {
    Substream rng(6, 0);
    int violations = 0;
    for (int trial = 0; trial < 5000; ++trial) violations += !step2_evaluate(make_step2_trial(3, rng), 0.5).holds();
    EXPECT_GT(violations, 0);
}

TEST(Step2, VacuousAndBoundary) {
    // Premise fails: y outside the cone.
    const Step2Input far{SquareMatrix{{1.0}}, Vec{0.0}, Vec{5.0, 0.5}, 0.1, 0.2, {3}, 1};
    EXPECT_FALSE(step2_evaluate(far).premises);
    EXPECT_TRUE(step2_implication_check(far));
    // d = 2, A = (1), (p b + q) y_d = 1 exactly: p = 1, b = 0, q = 1, y = (y1, 1).
    const Step2Input edge{SquareMatrix{{1.0}}, Vec{0.0}, Vec{-0.9, 1.0}, 1.0, 0.5, {1}, 1};
    const Step2Outcome out = step2_evaluate(edge);
    EXPECT_TRUE(out.premises);
    EXPECT_TRUE(out.holds());
    EXPECT_THROW(step2_evaluate(Step2Input{SquareMatrix{{1.0}}, Vec{0.0}, Vec{0.0, 1.0}, 1.0, 0.5, {2}, 4}), DomainError);
}

TEST(Mahler, Examples) {
    const std::vector<SquareMatrix> id{SquareMatrix::identity(2)};
    const MahlerBound b = mahler_bound(id, 4);
    EXPECT_NEAR(b.infimum, 1.0, 1e-12);
    EXPECT_NEAR(b.epsilon0, 0.5, 1e-12);
    EXPECT_TRUE(b.box_certified);
    const double c = std::cos(M_PI / 6), s = std::sin(M_PI / 6);
    const std::vector<SquareMatrix> rot{SquareMatrix{{c, s}, {-s, c}}};
    EXPECT_NEAR(mahler_bound(rot, 4).infimum, 1.0, 1e-12);
    EXPECT_THROW(mahler_bound(std::vector<SquareMatrix>{}, 4), DomainError);
    EXPECT_THROW(mahler_bound(id, 3), DomainError);
    EXPECT_THROW(mahler_bound(std::vector<SquareMatrix>{SquareMatrix{{2.0, 0.0}, {0.0, 1.0}}}, 4), DomainError);
    // The minimiser p = (1, -10) lies outside the box; exact enumeration finds it.
    const std::vector<SquareMatrix> skew{SquareMatrix{{0.1, 100.0}, {0.0, 10.0}}};
    const MahlerBound sk = mahler_bound(skew, 4);
    EXPECT_NEAR(sk.infimum, 0.1, 1e-12);
    EXPECT_FALSE(sk.box_certified);
}

TEST(Mahler, CompactFamilyHasNoViolation) {
    Substream rng(7, 0);
    std::vector<SquareMatrix> family;
    while (family.size() < 100) {
        SquareMatrix a{{1.0 + rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)}, {rng.uniform(-0.3, 0.3), 1.0 + rng.uniform(-0.3, 0.3)}};
        const double det = determinant(a);
        if (det <= 0.2) continue;
        family.push_back(std::pow(det, -0.5) * a);
    }
    const double eps0 = mahler_epsilon0(family, 6);
    EXPECT_GT(eps0, 0.0);
    for (std::size_t i = 0; i < family.size(); ++i) {
        const ConeRegion region(3, eps0, 0.3);
        const Vec y = sample_in_cone(region, rng);
        const Vec b{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const auto v = step2_disjointness_violation(family[i], b, y, region, 6, 50);
        EXPECT_FALSE(v.has_value()) << "member " << i;
    }
}
