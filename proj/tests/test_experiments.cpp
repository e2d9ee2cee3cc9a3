#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "horofarey/experiments.hpp"

using namespace horofarey;

namespace {

ExperimentConfig small_case_b(double Q, double sigma) {
    ExperimentConfig c;
    c.kind = CaseKind::b_plain;
    c.d = 2;
    c.Q = Q;
    c.sigma = sigma;
    c.n_reference = 20'000;
    c.seed = 5;
    c.workers = 1;
    return c;
}

std::string csv_of(const ExperimentReport& r) {
    std::ostringstream os;
    write_samples_csv(r, os);
    return os.str();
}

} // namespace

TEST(Config, ParsesFullExample) {
    const json j = json::parse(R"({"case": "A_sheared", "d": 3, "Q": 40, "sigma": 0.5, "theta": 0.1,
        "observables": ["sv", "ball_count:1.2"], "shear": [[1.5, 0], [0, 0.6666666666666666]], "irrational": true,
        "n_reference": 5000, "seed": 9, "output": "out/x", "workers": 2, "reference_t": 7})");
    const ExperimentConfig c = parse_config(j);
    EXPECT_EQ(c.kind, CaseKind::a_sheared);
    EXPECT_EQ(c.d, 3);
    EXPECT_EQ(c.Q, 40.0);
    EXPECT_EQ(c.observables.size(), 2u);
    EXPECT_EQ(c.observables[1], ObservableSpec::ball(1.2));
    ASSERT_TRUE(c.shear.has_value());
    EXPECT_EQ(c.shear->dim(), 2);
    EXPECT_TRUE(c.shear_irrational);
    EXPECT_EQ(c.horosphere_time(), 7.0);
    EXPECT_NEAR(c.t(), 0.5 + std::log(40.0) / 2, 1e-15);
    EXPECT_NO_THROW(validate_config(c));
}

TEST(Config, Rejections) {
    EXPECT_THROW(parse_config(json::parse(R"({"case": "B_plain", "d": 2})")), DomainError);
    EXPECT_THROW(parse_config(json::parse(R"({"case": "B_plain", "d": 2, "Q": 10, "colour": 1})")), DomainError);
    EXPECT_THROW(parse_config(json::parse(R"({"case": "C", "d": 2, "Q": 10})")), DomainError);
    EXPECT_THROW(parse_config(json::parse(R"({"case": "B_plain", "d": 2.5, "Q": 10})")), DomainError);
    EXPECT_THROW(parse_config(json::parse(R"({"case": "B_plain", "d": 2, "Q": 0.5})")), DomainError);
    EXPECT_THROW(parse_config(json::parse(R"({"case": "B_plain", "d": 2, "Q": 10, "theta": 1})")), DomainError);
    EXPECT_THROW(parse_config(json::parse(R"({"case": "B_plain", "d": 2, "Q": 10, "n_reference": 10})")), DomainError);
    EXPECT_THROW(parse_config(json::parse(R"({"case": "B_plain", "d": 2, "Q": 10, "observables": ["volume"]})")), DomainError);
    EXPECT_THROW(parse_config(json::parse(R"({"case": "A_sheared", "d": 3, "Q": 10, "shear": [[1, 0]]})")), DomainError);
    EXPECT_THROW(parse_config(json::parse(R"([1, 2])")), DomainError);
}

TEST(Config, Hypotheses) {
    ExperimentConfig a = parse_config(json::parse(R"({"case": "A_sheared", "d": 2, "Q": 10, "shear": [[1]], "irrational": false})"));
    try {
        validate_config(a);
        FAIL() << "rational shear accepted";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("irrational"), std::string::npos);
    }
    a.shear_irrational = true;
    a.shear = SquareMatrix::identity(2);
    EXPECT_THROW(validate_config(a), DomainError);
    a.d = 5;
    a.shear = SquareMatrix::identity(4);
    EXPECT_NO_THROW(validate_config(a));
    a.d = 9;
    a.shear = SquareMatrix::identity(8);
    EXPECT_THROW(validate_config(a), DomainError);

    const ExperimentConfig j = parse_config(json::parse(R"({"case": "joint", "d": 3, "Q": 10, "shear": [[1.4, 0], [0, 0.7]], "irrational": true})"));
    EXPECT_THROW(validate_config(j), UnsupportedError);
    EXPECT_THROW(run_experiment(j), UnsupportedError);
    const ExperimentConfig b4 = parse_config(json::parse(R"({"case": "B_plain", "d": 4, "Q": 10})"));
    EXPECT_THROW(validate_config(b4), UnsupportedError);
    const ExperimentConfig bs = parse_config(json::parse(R"({"case": "B_plain", "d": 2, "Q": 10, "shear": [[2]]})"));
    EXPECT_THROW(validate_config(bs), DomainError);
}

TEST(Config, SchemaIsWellFormed) {
    const json s = config_schema();
    EXPECT_EQ(s["type"], "object");
    EXPECT_EQ(s["required"], json::array({"case", "d", "Q"}));
    for (const char* key : {"case", "d", "Q", "sigma", "theta", "observables", "shear", "irrational", "n_reference", "seed", "output"})
        EXPECT_TRUE(s["properties"].contains(key)) << key;
}

TEST(Thresholds, LoadAndDefaults) {
    const Thresholds t = Thresholds::load(HOROFAREY_CONFIGS "/thresholds.json");
    const Thresholds d;
    EXPECT_EQ(t.case_b_ks, d.case_b_ks);
    EXPECT_EQ(t.case_a_ks(3), 0.03);
    EXPECT_EQ(t.case_a_ks(4), 0.05);
    EXPECT_EQ(t.joint_cdf_gap, 0.03);
    EXPECT_THROW(Thresholds::load("/nonexistent/thresholds.json"), std::runtime_error);
}

TEST(CaseB, TinyRunWarnsLowSample) {
    const ExperimentReport r = run_case_b(small_case_b(3, 0.0));
    EXPECT_EQ(r.farey_points, 4u);
    ASSERT_EQ(r.comparisons.size(), 1u);
    EXPECT_EQ(r.comparisons[0].empirical.count, 4u);
    ASSERT_FALSE(r.warnings.empty());
    EXPECT_NE(r.warnings[0].find("low-sample"), std::string::npos);
}

TEST(CaseB, MatchesOracleAndSeesSigma) {
    const ExperimentReport r0 = run_case_b(small_case_b(500, 0.0));
    const ExperimentReport r1 = run_case_b(small_case_b(500, 1.0));
    EXPECT_LT(r0.comparisons[0].ks, 0.03);
    EXPECT_LT(r1.comparisons[0].ks, 0.03);
    // sigma = 1 ensemble against the sigma = 0 oracle.
    const ReferenceLaw ref0 = case_b_reference(ObservableSpec::shortest(), 2, 0.0, 20'000, 5, 1);
    const auto farey1 = farey_ensemble(small_case_b(500, 1.0));
    EXPECT_GT(ks_two_sample(farey1[0], ref0.samples), 0.05);
}

TEST(Report, FieldsAndOrdering) {
    ExperimentConfig c = small_case_b(120, 0.0);
    c.observables = {ObservableSpec::shortest(), ObservableSpec::ball(1.0)};
    const ExperimentReport r = run_case_b(c);
    ASSERT_EQ(r.comparisons.size(), 2u);
    for (const Comparison& cmp : r.comparisons) {
        EXPECT_GE(cmp.ks, 0.0);
        EXPECT_GE(cmp.w1, 0.0);
        EXPECT_GE(cmp.p_value_proxy, 0.0);
        EXPECT_LE(cmp.p_value_proxy, 1.0);
        for (const LawSummary& s : {cmp.empirical, cmp.reference}) {
            EXPECT_LE(s.min, s.q05);
            EXPECT_LE(s.q05, s.q25);
            EXPECT_LE(s.q25, s.q50);
            EXPECT_LE(s.q50, s.q75);
            EXPECT_LE(s.q75, s.q95);
            EXPECT_LE(s.q95, s.max);
        }
    }
    const json j = to_json(r);
    EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
    EXPECT_EQ(j["case"], "B_plain");
    EXPECT_EQ(j["comparisons"].size(), 2u);
    EXPECT_TRUE(j.contains("runtime_seconds"));
    EXPECT_EQ(j["provenance"]["seed"], 5);
    const std::string csv = csv_of(r);
    EXPECT_EQ(csv.rfind("ensemble,value\n", 0), 0u);
    EXPECT_NE(csv.find("farey:shortest_vector,"), std::string::npos);
    EXPECT_NE(csv.find("reference:case_b_mc:ball_count:1,"), std::string::npos);
}

TEST(Report, PValueProxy) {
    EXPECT_EQ(ks_p_value_proxy(0.0, 1000, 1000), 1.0);
    EXPECT_LT(ks_p_value_proxy(0.2, 1000, 1000), 1e-10);
    EXPECT_NEAR(ks_p_value_proxy(0.0608, 1000, 1000), 0.05, 0.01);
}

TEST(Determinism, WorkerCounts) {
    ExperimentConfig c = small_case_b(150, 0.3);
    c.n_reference = 12'000;
    c.workers = 1;
    const std::string one = csv_of(run_case_b(c));
    c.workers = 4;
    EXPECT_EQ(one, csv_of(run_case_b(c)));

    ExperimentConfig a = c;
    a.kind = CaseKind::a_sheared;
    a.shear = SquareMatrix{{std::sqrt(2.0)}};
    a.shear_irrational = true;
    a.n_reference = 5000;
    a.farey_subsample = 3000;
    a.workers = 1;
    const std::string a1 = csv_of(run_case_a(a));
    a.workers = 3;
    EXPECT_EQ(a1, csv_of(run_case_a(a)));
}

TEST(Subsample, SizeAndDeterminism) {
    ExperimentConfig c = small_case_b(200, 0.0);
    c.farey_subsample = 1000;
    std::size_t used = 0;
    const auto a = farey_ensemble(c, &used);
    EXPECT_EQ(used, 1000u);
    EXPECT_EQ(a[0].size(), 1000u);
    EXPECT_EQ(a, farey_ensemble(c));
}

TEST(CaseA, RationalControlRunsThroughLibrary) {
    ExperimentConfig c;
    c.kind = CaseKind::a_sheared;
    c.d = 2;
    c.Q = 300;
    c.shear = SquareMatrix::identity(1);
    c.n_reference = 10'000;
    c.workers = 1;
    const ExperimentReport r = run_case_a(c);
    ASSERT_EQ(r.comparisons.size(), 2u);
    EXPECT_EQ(r.comparisons[0].reference_id.rfind("haar_empirical_horosphere_d2_t10", 0), 0u);
    EXPECT_EQ(r.comparisons[1].reference_id.rfind("haar_exact_d2", 0), 0u);
    EXPECT_GT(r.comparisons[1].ks, 0.03);
    EXPECT_EQ(r.samples[0].ensemble, "farey:shortest_vector");
}

TEST(CaseA, KsShrinksWithQ) {
    const std::vector<double> qs{200, 500, 1000, 2000};
    std::vector<std::vector<double>> emp;
    for (double Q : qs) {
        ExperimentConfig c;
        c.kind = CaseKind::a_sheared;
        c.Q = Q;
        c.shear = SquareMatrix{{std::sqrt(2.0)}};
        c.shear_irrational = true;
        emp.push_back(farey_ensemble(c).front());
    }
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const ReferenceLaw ref = haar_exact_d2(ObservableSpec::shortest(), 100'000, 900 + seed);
        // Least-squares slope of log KS against log Q.
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < qs.size(); ++i) {
            const double x = std::log(qs[i]), y = std::log(ks_two_sample(emp[i], ref.samples));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double n = static_cast<double>(qs.size());
        EXPECT_LT((n * sxy - sx * sy) / (n * sxx - sx * sx), 0.0) << "seed " << seed;
    }
}

TEST(Joint, RationalControlIsDegenerate) {
    const JointSamples s = joint_uniform_samples(ObservableSpec::shortest(), SquareMatrix::identity(1), 4.0, 5000, 3, 1);
    EXPECT_EQ(s.g1, s.g2);
    EXPECT_NEAR(pearson_correlation(s.g1, s.g2), 1.0, 1e-12);
    ExperimentConfig c;
    c.kind = CaseKind::joint;
    c.Q = 30;
    c.shear = SquareMatrix{{std::sqrt(2.0)}};
    c.shear_irrational = true;
    c.joint_t = 6.0;
    c.joint_n = 20'000;
    c.workers = 1;
    const ExperimentReport r = run_joint(c);
    ASSERT_EQ(r.joints.size(), 2u);
    EXPECT_TRUE(r.joints[0].asserted);
    EXPECT_FALSE(r.joints[1].asserted);
    EXPECT_LT(r.joints[0].cdf_gap, 0.05);
    EXPECT_LT(std::fabs(r.joints[0].correlation), 0.1);
}

TEST(Cache, RoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "horofarey_test_cache";
    std::filesystem::remove_all(dir);
    ExperimentConfig c = small_case_b(50, 0.0);
    c.n_reference = 3000;
    c.cache_dir = dir.string();
    const ExperimentReport first = run_case_b(c);
    const ReferenceMeta meta{LawKind::case_b_mc, 2, 0.0, 0.0, ObservableSpec::shortest(), 3000, 5};
    const auto hit = load_reference_law(meta, dir);
    ASSERT_TRUE(hit.has_value());
    EXPECT_EQ(hit->samples.size(), 3000u);
    EXPECT_EQ(csv_of(first), csv_of(run_case_b(c)));
    ReferenceMeta other = meta;
    other.seed = 6;
    EXPECT_FALSE(load_reference_law(other, dir).has_value());
    std::filesystem::remove_all(dir);
}
