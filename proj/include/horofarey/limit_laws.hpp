#pragma once

// Sampleable reference laws for observables of random lattices:
//
//  * haar_exact_d2              exact Haar measure on SL(2,Z)\SL(2,R)
//  * haar_reference_horosphere  a long random horosphere, any d <= 8
//  * case_b_reference           the mu_H-weighted limit law of the Farey
//                               ensemble for Gamma = SL(d,Z), d in {2, 3}

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "horofarey/errors.hpp"
#include "horofarey/group.hpp"
#include "horofarey/lattice.hpp"
#include "horofarey/matrix.hpp"
#include "horofarey/parallel.hpp"
#include "horofarey/random.hpp"

namespace horofarey {

inline constexpr int kModularRejectionCap = 10'000;

/// Draws z = x + iy from (3/pi) dx dy / y^2 on the modular fundamental
/// domain by rejection: x uniform on [-1/2, 1/2], y Pareto(1) on
/// [sqrt(3)/2, inf) (density proportional to y^-2). The acceptance rate
/// is (pi/3) / (2/sqrt 3) ~ 0.907, bounded below by 1/3.
inline ModularPoint sample_modular_point(Substream& rng) {
    const double y0 = std::sqrt(3.0) / 2.0;
    for (int i = 0; i < kModularRejectionCap; ++i) {
        const double x = rng.uniform() - 0.5;
        const double y = y0 / rng.uniform_open_low();
        if (x * x + y * y >= 1.0) return {x, y};
    }
    throw NumericError("sample_modular_point: rejection cap reached");
}

/// Iwasawa product y^{-1/2} [[1, 0], [x, y]] k(angle): a unimodular basis
/// whose lattice has shape z = x + iy.
inline SquareMatrix sl2_from_modular(ModularPoint z, double angle) {
    const double s = 1.0 / std::sqrt(z.y);
    const double c = std::cos(angle), n = std::sin(angle);
    // [[s, 0], [x s, y s]] * [[c, n], [-n, c]]
    return SquareMatrix{{s * c, s * n}, {z.x * s * c - z.y * s * n, z.x * s * n + z.y * s * c}};
}

/// Haar-random element of SL(2,Z)\SL(2,R).
inline SquareMatrix sample_sl2_haar(Substream& rng) {
    const ModularPoint z = sample_modular_point(rng);
    return sl2_from_modular(z, rng.uniform(0.0, 2.0 * M_PI));
}

/// Coordinates (A, b) of a point of Gamma_H \ H, H ~ ASL(d-1, R).
struct MuHSample {
    SquareMatrix A;  // (d-1) x (d-1), det 1
    Vec b;           // in [0,1)^{d-1}

    int dim() const { return A.dim() + 1; }

    /// [[A, b^T], [0, 1]].
    UnimodularMatrix matrix() const {
        const int d = dim();
        SquareMatrix m(d);
        for (int i = 0; i + 1 < d; ++i) {
            for (int j = 0; j + 1 < d; ++j) m(i, j) = A(i, j);
            m(i, d - 1) = b[static_cast<std::size_t>(i)];
        }
        m(d - 1, d - 1) = 1.0;
        return UnimodularMatrix(std::move(m));
    }
};

/// mu_H = Haar(SL(d-1,Z)\SL(d-1,R)) x Lebesgue([0,1)^{d-1}), d in {2, 3}.
inline MuHSample sample_mu_h(int d, Substream& rng) {
    if (d == 2) return {SquareMatrix{{1.0}}, Vec{rng.uniform()}};
    if (d == 3) {
        SquareMatrix a = sample_sl2_haar(rng);
        const double b0 = rng.uniform();
        const double b1 = rng.uniform();
        return {std::move(a), Vec{b0, b1}};
    }
    throw UnsupportedError("sample_mu_h: d = " + std::to_string(d) +
                           " needs a Haar sampler on SL(d-1,Z)\\SL(d-1,R), available only for d-1 <= 2");
}

/// Lattice Z^d (M Phi^{-s})^{-T}, the argument of the averaged test function
/// in the Case (B) limit.
inline Lattice case_b_lattice(const MuHSample& h, double s) {
    const int d = h.dim();
    const UnimodularMatrix m = h.matrix() * flow(d, -s);
    return Lattice(transpose(inverse(m.matrix())));
}

struct CaseBDraw {
    double s;
    MuHSample h;
    double value;
};

/// One draw: s = sigma + Exp(d(d-1)), (A, b) ~ mu_H, observable at the
/// lattice of case_b_lattice.
inline CaseBDraw case_b_draw(const ObservableSpec& obs, int d, double sigma, Substream& rng) {
    const double s = sigma + rng.exponential(d * (d - 1.0));
    MuHSample h = sample_mu_h(d, rng);
    const double v = evaluate(obs, case_b_lattice(h, s));
    return {s, std::move(h), v};
}

enum class LawKind { haar_empirical_horosphere, haar_exact_d2, case_b_mc };

inline std::string to_string(LawKind k) {
    switch (k) {
        case LawKind::haar_empirical_horosphere: return "haar_empirical_horosphere";
        case LawKind::haar_exact_d2: return "haar_exact_d2";
        case LawKind::case_b_mc: return "case_b_mc";
    }
    return "?";
}

inline LawKind parse_law_kind(const std::string& s) {
    if (s == "haar_empirical_horosphere" || s == "horosphere") return LawKind::haar_empirical_horosphere;
    if (s == "haar_exact_d2" || s == "haar_d2") return LawKind::haar_exact_d2;
    if (s == "case_b_mc" || s == "case_b") return LawKind::case_b_mc;
    throw DomainError("unknown reference kind: " + s);
}

struct ReferenceMeta {
    LawKind kind = LawKind::case_b_mc;
    int d = 2;
    double sigma = 0.0;  // case_b_mc
    double t = 0.0;      // haar_empirical_horosphere
    ObservableSpec observable;
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

/// Empirical reference law: ascending samples plus provenance.
struct ReferenceLaw {
    ReferenceMeta meta;
    std::vector<double> samples;
};

inline constexpr std::size_t kMinReferenceDraws = 1000;

inline ReferenceLaw case_b_reference(const ObservableSpec& obs, int d, double sigma, std::size_t n, std::uint64_t seed,
                                     int workers = 0) {
    if (d != 2 && d != 3) {
        throw UnsupportedError("case_b_reference: d = " + std::to_string(d) +
                               " unsupported (mu_H sampler exists only for d in {2, 3})");
    }
    if (n < kMinReferenceDraws) throw DomainError("case_b_reference: n must be >= 1000");
    if (!std::isfinite(sigma)) throw DomainError("case_b_reference: sigma must be finite");
    ReferenceLaw law{{LawKind::case_b_mc, d, sigma, 0.0, obs, n, seed}, {}};
    law.samples = parallel_sample<double>(n, seed, workers,
                                          [&](Substream& rng, std::size_t) { return case_b_draw(obs, d, sigma, rng).value; });
    std::sort(law.samples.begin(), law.samples.end());
    return law;
}

/// Horospherical mixing proxy: e^{-dt} < 1e-6.
inline double min_horosphere_time(int d) { return 6.0 * std::log(10.0) / d; }

inline ReferenceLaw haar_reference_horosphere(const ObservableSpec& obs, int d, double t, std::size_t n,
                                              std::uint64_t seed, int workers = 0) {
    check_group_dim(d);
    if (!(t > min_horosphere_time(d))) {
        throw RangeError("haar_reference_horosphere: t = " + std::to_string(t) + " too small (need e^{-dt} < 1e-6)");
    }
    if (n == 0) throw DomainError("haar_reference_horosphere: n must be positive");
    const UnimodularMatrix phi = flow(d, t);
    ReferenceLaw law{{LawKind::haar_empirical_horosphere, d, 0.0, t, obs, n, seed}, {}};
    law.samples = parallel_sample<double>(n, seed, workers, [&](Substream& rng, std::size_t) {
        Vec x(static_cast<std::size_t>(d - 1));
        for (double& v : x) v = rng.uniform();
        return evaluate(obs, Lattice((n_minus(x) * phi).matrix()));
    });
    std::sort(law.samples.begin(), law.samples.end());
    return law;
}

inline ReferenceLaw haar_exact_d2(const ObservableSpec& obs, std::size_t n, std::uint64_t seed, int workers = 0) {
    if (n == 0) throw DomainError("haar_exact_d2: n must be positive");
    ReferenceLaw law{{LawKind::haar_exact_d2, 2, 0.0, 0.0, obs, n, seed}, {}};
    law.samples = parallel_sample<double>(
        n, seed, workers, [&](Substream& rng, std::size_t) { return evaluate(obs, Lattice(sample_sl2_haar(rng))); });
    std::sort(law.samples.begin(), law.samples.end());
    return law;
}

} // namespace horofarey
