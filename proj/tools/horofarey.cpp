// horofarey command-line tool: farey | reference | experiment | proofscan

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "horofarey/horofarey.hpp"

using namespace horofarey;

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kUnsupported = 3, kResourceCap = 4 };

struct FareyArgs {
    int d = 0;
    double Q = 0;
    double theta = 0;
    std::string out;
    long long cap = kDefaultFareyCap;
};

struct ReferenceArgs {
    std::string kind;
    int d = 2;
    double sigma = 0;
    double t = 10;
    std::string observable = "shortest_vector";
    std::size_t n = 100'000;
    std::uint64_t seed = 1;
    std::string out;
};

struct ExperimentArgs {
    std::string config;
    std::string output;
    std::string thresholds;
    std::string cache_dir;
    std::uint64_t seed = 0;
    std::size_t n_reference = 0;
    std::size_t subsample = 0;
    bool has_seed = false;
    bool check = false;
};

struct ScanArgs {
    int d = 2;
    long long trials = 10'000;
    std::uint64_t seed = 1;
    bool inject_fault = false;
};

int cmd_farey(const FareyArgs& a) {
    if (a.Q < 1 || a.d < 2) throw DomainError("farey: need --d >= 2 and --Q >= 1");
    const auto Qi = static_cast<i64>(std::floor(a.Q));
    const i64 exact = farey_count_exact(a.d, a.Q, a.theta);
    const double asym = farey_count_asymptotic(a.d, static_cast<double>(Qi)) * (1.0 - std::pow(a.theta, a.d));
    std::cout << "d " << a.d << "\nQ " << Qi << "\ntheta " << fmt12(a.theta) << "\ncount_exact " << exact
              << "\ncount_asymptotic " << fmt12(asym) << "\nratio " << fmt12(static_cast<double>(exact) / asym) << "\n";
    if (!a.out.empty()) {
        if (exact > a.cap) throw ResourceCapError("farey: " + std::to_string(exact) + " points exceed --cap");
        std::ofstream os(a.out);
        if (!os) throw std::runtime_error("cannot write " + a.out);
        write_farey_csv(os, a.d, a.Q, a.theta);
        std::cout << "wrote " << a.out << "\n";
    }
    return kPass;
}

void print_summary(const std::vector<double>& s) {
    const LawSummary q = summarize(s);
    std::cout << "count " << q.count << "\nmean " << fmt12(q.mean) << "\nmin " << fmt12(q.min) << "\nq05 " << fmt12(q.q05)
              << "\nq25 " << fmt12(q.q25) << "\nq50 " << fmt12(q.q50) << "\nq75 " << fmt12(q.q75) << "\nq95 "
              << fmt12(q.q95) << "\nmax " << fmt12(q.max) << "\n";
}

int cmd_reference(const ReferenceArgs& a, int workers) {
    const LawKind kind = parse_law_kind(a.kind);
    const ObservableSpec obs = parse_observable(a.observable);
    ReferenceMeta meta{kind, a.d, 0.0, 0.0, obs, a.n, a.seed};
    if (kind == LawKind::case_b_mc) meta.sigma = a.sigma;
    if (kind == LawKind::haar_empirical_horosphere) meta.t = a.t;
    if (kind == LawKind::haar_exact_d2 && a.d != 2) throw UnsupportedError("haar_exact_d2 exists only for d = 2");
    const std::filesystem::path dir = a.out.empty() ? default_cache_dir() : std::filesystem::path(a.out);
    ReferenceLaw law;
    if (auto hit = load_reference_law(meta, dir)) {
        law = std::move(*hit);
        std::cout << "cache hit " << (dir / (cache_key(meta) + ".csv")).string() << "\n";
    } else {
        switch (kind) {
            case LawKind::case_b_mc: law = case_b_reference(obs, a.d, a.sigma, a.n, a.seed, workers); break;
            case LawKind::haar_empirical_horosphere:
                law = haar_reference_horosphere(obs, a.d, a.t, a.n, a.seed, workers);
                break;
            case LawKind::haar_exact_d2: law = haar_exact_d2(obs, a.n, a.seed, workers); break;
        }
        save_reference_law(law, dir);
        std::cout << "wrote " << (dir / (cache_key(meta) + ".csv")).string() << "\n";
    }
    print_summary(law.samples);
    return kPass;
}

int cmd_experiment(const ExperimentArgs& a, int workers, bool workers_set) {
    std::ifstream in(a.config);
    if (!in) throw DomainError("cannot read config " + a.config);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DomainError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig c = parse_config(j);
    if (!a.output.empty()) c.output = a.output;
    if (!a.cache_dir.empty()) c.cache_dir = a.cache_dir;
    if (a.has_seed) c.seed = a.seed;
    if (a.n_reference > 0) c.n_reference = a.n_reference;
    if (a.subsample > 0) c.farey_subsample = a.subsample;
    if (workers_set) c.workers = workers;
    validate_config(c);
    if (a.check) {
        std::cout << "config ok: " << to_json(c).dump() << "\n";
        return kPass;
    }
    const Thresholds th = a.thresholds.empty() ? Thresholds{} : Thresholds::load(a.thresholds);
    const ExperimentReport r = run_experiment(c, th);

    for (const Comparison& cmp : r.comparisons) {
        std::cout << cmp.ensemble << " " << cmp.observable << " vs " << cmp.reference_id << ": ks " << fmt12(cmp.ks)
                  << " w1 " << fmt12(cmp.w1) << " threshold " << fmt12(cmp.threshold) << (cmp.passed ? " PASS" : " FAIL")
                  << "\n";
    }
    for (const JointResult& jr : r.joints) {
        std::cout << "joint " << jr.ensemble << " n " << jr.n << ": cdf_gap " << fmt12(jr.cdf_gap) << " correlation "
                  << fmt12(jr.correlation) << (jr.asserted ? (jr.passed ? " PASS" : " FAIL") : " (reported)") << "\n";
    }
    for (const std::string& w : r.warnings) std::cout << "warning: " << w << "\n";
    if (!c.output.empty()) {
        write_report_files(r, c.output);
        std::cout << "wrote " << c.output << ".report.json and " << c.output << ".samples.csv\n";
    }
    std::cout << (r.passed ? "PASS" : "FAIL") << "\n";
    return r.passed ? kPass : kFail;
}

std::string join(std::span<const double> v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt12(v[i]);
    return s + ")";
}

std::string join(std::span<const i64> v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    return s + ")";
}

int cmd_proofscan(const ScanArgs& a) {
    if (a.d != 2 && a.d != 3) throw UnsupportedError("proofscan supports d in {2, 3}");
    if (a.trials < 1) throw DomainError("proofscan: --trials must be positive");
    const int d = a.d;
    Substream rng(a.seed, 0);
    bool ok = true;

    // Thickening: balls vs cone.
    {
        const double Q = d == 2 ? 50 : 12;
        const FareySet set = generate_farey(d, Q);
        long long agree = 0;
        for (long long i = 0; i < a.trials && ok; ++i) {
            const ThickeningParams p{Q, rng.uniform(0.05, 0.95), rng.uniform(0.01, 1.0), std::log(Q) / (d - 1)};
            const FareyPoint f = set.point(static_cast<std::size_t>(rng.integer(0, static_cast<i64>(set.size()) - 1)));
            const double rho = p.epsilon * std::pow(Q, -static_cast<double>(d) / (d - 1));
            Vec x(f.r);
            for (double& v : x) v += rng.uniform(-1.2 * rho, 1.2 * rho);
            const bool balls = thickening_member_balls(x, p);
            const bool cone = thickening_member_cone(x, p);
            if (balls != cone) {
                std::cout << "COUNTEREXAMPLE thickening: x " << join(x) << " Q " << fmt12(Q) << " theta "
                          << fmt12(p.theta) << " epsilon " << fmt12(p.epsilon) << " t " << fmt12(p.t) << " balls "
                          << balls << " cone " << cone << "\n";
                ok = false;
            }
            ++agree;
        }
        std::cout << "thickening equivalence: " << agree << " inputs\n";
    }

    // Step 2.
    {
        const double factor = a.inject_fault ? 0.5 : 2.0;
        long long premises = 0;
        for (long long i = 0; i < a.trials && ok; ++i) {
            const Step2Input in = make_step2_trial(d, rng);
            const Step2Outcome out = step2_evaluate(in, factor);
            premises += out.premises;
            if (!out.holds()) {
                std::cout << "COUNTEREXAMPLE step2: A " << join(in.A.entries()) << " b " << join(in.b) << " y "
                          << join(in.y) << " epsilon " << fmt12(in.epsilon) << " theta " << fmt12(in.theta) << " p "
                          << join(in.p) << " q " << in.q << "\n";
                ok = false;
            }
        }
        std::cout << "step2 implication: " << premises << " premise-satisfying trials\n";
    }

    // Mahler bound and disjointness.
    if (ok) {
        if (d == 2) {
            const std::vector<SquareMatrix> unit{SquareMatrix::identity(1)};
            const double eps0 = mahler_epsilon0(unit, 4);
            const int q_max = a.trials >= 100'000 ? 200 : a.trials >= 1000 ? 60 : 12;
            std::size_t balls = 0;
            for (int Q = 2; Q <= q_max && ok; ++Q) {
                const DisjointnessReport r =
                    thickening_disjointness_scan(2, ThickeningParams{static_cast<double>(Q), 0.1, eps0, std::log(static_cast<double>(Q))});
                balls += r.balls_checked;
                if (r.overlaps != 0) {
                    std::cout << "COUNTEREXAMPLE disjointness: Q " << Q << " epsilon " << fmt12(eps0) << " overlaps "
                              << r.overlaps << "\n";
                    ok = false;
                }
            }
            std::cout << "mahler epsilon0 " << fmt12(eps0) << ", disjointness Q <= " << q_max << ": " << balls
                      << " balls\n";
        } else {
            std::vector<SquareMatrix> family;
            while (family.size() < 100) {
                SquareMatrix m{{1.0 + rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)},
                               {rng.uniform(-0.3, 0.3), 1.0 + rng.uniform(-0.3, 0.3)}};
                const double det = determinant(m);
                if (det > 0.2) family.push_back(std::pow(det, -0.5) * m);
            }
            const double eps0 = mahler_epsilon0(family, 6);
            const int q_max = a.trials >= 1000 ? 50 : 5;
            for (std::size_t i = 0; i < family.size() && ok; ++i) {
                const ConeRegion region(3, eps0, 0.3);
                const Vec y = sample_in_cone(region, rng);
                const Vec b{rng.uniform(-1, 1), rng.uniform(-1, 1)};
                if (auto v = step2_disjointness_violation(family[i], b, y, region, 6, q_max)) {
                    std::cout << "COUNTEREXAMPLE disjointness: A " << join(family[i].entries()) << " b " << join(b)
                              << " y " << join(y) << " a " << join(*v) << "\n";
                    ok = false;
                }
            }
            std::cout << "mahler epsilon0 " << fmt12(eps0) << ", disjointness over 100 members, |q| <= " << q_max << "\n";
        }
    }

    // Cone volume.
    if (ok) {
        const auto points = static_cast<std::uint64_t>(std::max<long long>(10'000, a.trials * 10));
        for (const auto& [eps, theta] : {std::pair{0.1, 0.5}, std::pair{0.5, 0.2}, std::pair{1.0, 0.8}}) {
            const ConeRegion region(d, eps, theta);
            const VolumeEstimate e = cone_volume_monte_carlo(region, points, rng);
            const double exact = cone_volume(region);
            const bool pass = std::fabs(e.value - exact) <= 3 * e.standard_error;
            std::cout << "cone volume eps " << fmt12(eps) << " theta " << fmt12(theta) << ": exact " << fmt12(exact)
                      << " mc " << fmt12(e.value) << " se " << fmt12(e.standard_error) << (pass ? "" : " OUTSIDE 3 SE")
                      << "\n";
            if (!pass) {
                std::cout << "COUNTEREXAMPLE cone volume: d " << d << " epsilon " << fmt12(eps) << " theta "
                          << fmt12(theta) << " points " << points << "\n";
                ok = false;
            }
        }
    }

    std::cout << (ok ? "ALL-PASS" : "FAIL") << "\n";
    return ok ? kPass : kFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Farey points on expanding horospheres: generation, reference laws, experiments, proof scans"};
    app.set_help_all_flag("--help-all", "Expand all help");
    app.fallthrough();
    bool schema = false;
    int workers = 0;
    app.add_flag("--schema", schema, "Print the JSON schema of experiment configs and exit");
    auto* workers_opt = app.add_option("--workers", workers, "Worker threads (default: machine parallelism)")->check(CLI::NonNegativeNumber);

    FareyArgs fa;
    auto* farey = app.add_subcommand("farey", "Count (and optionally dump) the Farey set F_{Q,theta}");
    farey->add_option("--d", fa.d, "Dimension d")->required()->check(CLI::Range(2, 8));
    farey->add_option("--Q", fa.Q, "Cutoff Q")->required();
    farey->add_option("--theta", fa.theta, "Lower cutoff fraction theta in [0, 1)");
    farey->add_option("--out", fa.out, "CSV output path");
    farey->add_option("--cap", fa.cap, "Refuse to dump more points than this");

    ReferenceArgs ra;
    auto* reference = app.add_subcommand("reference", "Build and cache a reference law");
    reference->add_option("--kind", ra.kind, "case_b | horosphere | haar_d2")->required();
    reference->add_option("--d", ra.d, "Dimension d")->check(CLI::Range(2, 8));
    reference->add_option("--sigma", ra.sigma, "Offset sigma (case_b)");
    reference->add_option("--t", ra.t, "Horosphere time (horosphere)");
    reference->add_option("--observable", ra.observable, "Observable, e.g. sv, lambda2, ball_count:1.5");
    reference->add_option("--n", ra.n, "Number of draws");
    reference->add_option("--seed", ra.seed, "RNG seed");
    reference->add_option("--out", ra.out, "Cache directory (default: $HOROFAREY_CACHE_DIR or .horofarey_cache)");

    ExperimentArgs ea;
    auto* experiment = app.add_subcommand("experiment", "Run an equidistribution experiment from a JSON config");
    experiment->add_option("config", ea.config, "Config JSON")->required();
    experiment->add_option("--output", ea.output, "Output prefix (overrides config)");
    experiment->add_option("--thresholds", ea.thresholds, "Thresholds JSON");
    experiment->add_option("--cache-dir", ea.cache_dir, "Reference cache directory");
    auto* seed_opt = experiment->add_option("--seed", ea.seed, "RNG seed (overrides config)");
    experiment->add_option("--n-reference", ea.n_reference, "Reference draws (overrides config)");
    experiment->add_option("--subsample", ea.subsample, "Farey subsample size (overrides config)");
    experiment->add_flag("--check", ea.check, "Validate the config and exit");

    ScanArgs sa;
    auto* proofscan = app.add_subcommand("proofscan", "Property scans of the proof geometry");
    proofscan->add_option("--d", sa.d, "Dimension (2 or 3)");
    proofscan->add_option("--trials", sa.trials, "Randomized trials per scan");
    proofscan->add_option("--seed", sa.seed, "RNG seed");
    proofscan->add_flag("--inject-fault", sa.inject_fault, "Weaken the Step-2 conclusion to exercise counterexample reporting");

    app.require_subcommand(0, 1);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (schema) {
            std::cout << config_schema().dump(2) << "\n";
            return kPass;
        }
        if (*farey) return cmd_farey(fa);
        if (*reference) return cmd_reference(ra, workers);
        if (*experiment) {
            ea.has_seed = seed_opt->count() > 0;
            return cmd_experiment(ea, workers, workers_opt->count() > 0);
        }
        if (*proofscan) return cmd_proofscan(sa);
        std::cerr << app.help();
        return kUsage;
    } catch (const UnsupportedError& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return kUnsupported;
    } catch (const ResourceCapError& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return kResourceCap;
    } catch (const std::logic_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::range_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFail;
    }
}
