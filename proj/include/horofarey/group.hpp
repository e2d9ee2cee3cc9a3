#pragma once

// Matrices of the diagonal flow, the stable/unstable horospherical
// subgroups and the auxiliary matrices M_y, D(y_d) and the shear
// conjugator, all as elements of SL(d, R) acting on row vectors.

#include <cmath>
#include <span>
#include <string>
#include <utility>

#include "horofarey/errors.hpp"
#include "horofarey/matrix.hpp"

namespace horofarey {

// Largest |exponent| passed to exp() anywhere in the library.
inline constexpr double kMaxExponent = 300.0;

inline void check_exponent(double e, const char* what) {
    if (!std::isfinite(e)) throw DomainError(std::string(what) + ": non-finite argument");
    if (std::fabs(e) > kMaxExponent) {
        throw RangeError(std::string(what) + ": exponent " + std::to_string(e) + " exceeds guard");
    }
}

inline void check_group_dim(int d) {
    if (d < 2 || d > kMaxDim) throw DomainError("dimension d must lie in [2, 8], got " + std::to_string(d));
}

/// Log-scale time t together with the offset sigma, tied to the Farey
/// cutoff by Q = exp((d-1)(t - sigma)).
struct FlowTime {
    double t = 0.0;
    double sigma = 0.0;

    static FlowTime from_cutoff(int d, double Q, double sigma) {
        check_group_dim(d);
        if (!(Q >= 1.0) || !std::isfinite(Q)) throw DomainError("FlowTime: Q must be finite and >= 1");
        return {sigma + std::log(Q) / (d - 1), sigma};
    }

    double cutoff(int d) const { return std::exp((d - 1) * (t - sigma)); }
};

/// diag(e^{-t} 1_{d-1}, e^{(d-1)t}).
inline UnimodularMatrix flow(int d, double t) {
    check_group_dim(d);
    check_exponent(t, "flow");
    check_exponent((d - 1) * t, "flow");
    SquareMatrix m(d);
    const double a = std::exp(-t);
    for (int i = 0; i + 1 < d; ++i) m(i, i) = a;
    m(d - 1, d - 1) = std::exp((d - 1) * t);
    return UnimodularMatrix(std::move(m), UnimodularMatrix::Trusted{});
}

/// Phi^t at the time where e^{(d-1)t} = Q, built from Q directly:
/// diag(Q^{-1/(d-1)} 1_{d-1}, Q). With `inverse` set, returns Phi^{-t}
/// = diag(Q^{1/(d-1)} 1_{d-1}, 1/Q). Building from Q keeps q * (1/Q) <= 1
/// exact at q = Q, which exp(-log Q) does not guarantee.
inline UnimodularMatrix flow_at_cutoff(int d, double Q, bool inverse = false) {
    check_group_dim(d);
    if (!(Q >= 1.0) || !std::isfinite(Q)) throw DomainError("flow_at_cutoff: Q must be finite and >= 1");
    check_exponent(std::log(Q), "flow_at_cutoff");
    SquareMatrix m(d);
    const double a = std::pow(Q, (inverse ? 1.0 : -1.0) / (d - 1));
    for (int i = 0; i + 1 < d; ++i) m(i, i) = a;
    m(d - 1, d - 1) = inverse ? 1.0 / Q : Q;
    return UnimodularMatrix(std::move(m), UnimodularMatrix::Trusted{});
}

namespace detail {
inline void check_horo_vector(std::span<const double> x) {
    check_group_dim(static_cast<int>(x.size()) + 1);
    for (double v : x)
        if (!std::isfinite(v)) throw DomainError("horospherical vector: non-finite entry");
}
} // namespace detail

/// Unstable horospherical element: identity with x placed in the last column.
inline UnimodularMatrix n_minus(std::span<const double> x) {
    detail::check_horo_vector(x);
    const int d = static_cast<int>(x.size()) + 1;
    SquareMatrix m = SquareMatrix::identity(d);
    for (int i = 0; i + 1 < d; ++i) m(i, d - 1) = x[static_cast<std::size_t>(i)];
    return UnimodularMatrix(std::move(m), UnimodularMatrix::Trusted{});
}

/// Stable horospherical element: identity with x placed in the last row.
inline UnimodularMatrix n_plus(std::span<const double> x) {
    detail::check_horo_vector(x);
    const int d = static_cast<int>(x.size()) + 1;
    SquareMatrix m = SquareMatrix::identity(d);
    for (int j = 0; j + 1 < d; ++j) m(d - 1, j) = x[static_cast<std::size_t>(j)];
    return UnimodularMatrix(std::move(m), UnimodularMatrix::Trusted{});
}

inline UnimodularMatrix n_minus(std::initializer_list<double> x) { return n_minus(std::span(x.begin(), x.size())); }
inline UnimodularMatrix n_plus(std::initializer_list<double> x) { return n_plus(std::span(x.begin(), x.size())); }

/// Both sides of n_-(x) Phi^t = Phi^t n_-(e^{dt} x).
inline std::pair<UnimodularMatrix, UnimodularMatrix> commute_flow(std::span<const double> x, double t) {
    detail::check_horo_vector(x);
    const int d = static_cast<int>(x.size()) + 1;
    const double nx = norm(x);
    if (nx > 0.0) check_exponent(d * t + std::log(nx), "commute_flow");
    check_exponent(d * t, "commute_flow");
    const double s = std::exp(d * t);
    Vec scaled(x.begin(), x.end());
    for (double& v : scaled) v *= s;
    const UnimodularMatrix phi = flow(d, t);
    return {n_minus(x) * phi, phi * n_minus(scaled)};
}

/// M_y: the matrix with (0,...,0,1) M_y = y, blocks y_d^{-1/(d-1)} 1_{d-1}
/// on the diagonal and y' in the last row.
inline UnimodularMatrix m_y(std::span<const double> y) {
    const int d = static_cast<int>(y.size());
    check_group_dim(d);
    for (double v : y)
        if (!std::isfinite(v)) throw DomainError("m_y: non-finite entry");
    const double yd = y[static_cast<std::size_t>(d - 1)];
    if (!(yd > 0.0)) throw DomainError("m_y: y_d must be positive");
    SquareMatrix m(d);
    const double a = std::pow(yd, -1.0 / (d - 1));
    for (int i = 0; i + 1 < d; ++i) m(i, i) = a;
    for (int j = 0; j < d; ++j) m(d - 1, j) = y[static_cast<std::size_t>(j)];
    return UnimodularMatrix(std::move(m), UnimodularMatrix::Trusted{});
}

/// D(y_d) = diag(y_d^{-1/(d-1)} 1_{d-1}, y_d) = flow(d, log(y_d)/(d-1)).
inline UnimodularMatrix d_matrix(int d, double yd) {
    check_group_dim(d);
    if (!(yd > 0.0) || !std::isfinite(yd)) throw DomainError("d_matrix: y_d must be positive and finite");
    SquareMatrix m(d);
    const double a = std::pow(yd, -1.0 / (d - 1));
    for (int i = 0; i + 1 < d; ++i) m(i, i) = a;
    m(d - 1, d - 1) = yd;
    return UnimodularMatrix(std::move(m), UnimodularMatrix::Trusted{});
}

/// |det A|^{-1/d} diag(A^T, 1).
///
/// Conjugation by this matrix carries n_-(x) Phi^t to n_-(x A) Phi^t for
/// every x and t. The scalar factor makes it unimodular without touching
/// A; it cancels in the conjugation. A must have positive determinant.
inline UnimodularMatrix conjugator(const SquareMatrix& A) {
    const int d = A.dim() + 1;
    check_group_dim(d);
    const double det = determinant(A);
    if (det == 0.0 || !std::isfinite(det)) throw DomainError("conjugator: singular A");
    if (condition_estimate(A) > 1e12) throw DomainError("conjugator: A is numerically singular");
    if (det < 0.0) throw DomainError("conjugator: det A must be positive to conjugate inside SL(d, R)");
    const double scale = std::pow(det, -1.0 / d);
    SquareMatrix c(d);
    for (int i = 0; i + 1 < d; ++i)
        for (int j = 0; j + 1 < d; ++j) c(i, j) = scale * A(j, i);
    c(d - 1, d - 1) = scale;
    return UnimodularMatrix(std::move(c));
}

/// ||M1^{-1} M2 - 1||_F. A left-invariant diagnostic surrogate for the
/// Riemannian distance, exact on horospherical pairs:
/// delta(n(x), n(x')) = ||x - x'||.
inline double left_invariant_distance(const UnimodularMatrix& m1, const UnimodularMatrix& m2) {
    if (m1.dim() != m2.dim()) throw DomainError("left_invariant_distance: dimension mismatch");
    const double cond = condition_estimate(m1.matrix());
    if (!(cond <= 1e12)) {
        throw NumericError("left_invariant_distance: first argument ill-conditioned (cond ~ " + std::to_string(cond) + ")");
    }
    return frobenius_norm(inverse(m1.matrix()) * m2.matrix() - SquareMatrix::identity(m1.dim()));
}

} // namespace horofarey
