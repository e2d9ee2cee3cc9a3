#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "horofarey/errors.hpp"

namespace horofarey {

using Vec = std::vector<double>;

inline constexpr int kMinDim = 1;
inline constexpr int kMaxDim = 8;

/// Dense square matrix of doubles, row-major.
///
/// Dimension 1 is admitted so that the (d-1)x(d-1) shear blocks of d = 2
/// fit the same type; the group-level constructors require d >= 2.
class SquareMatrix {
public:
    SquareMatrix() = default;

    explicit SquareMatrix(int dim) : dim_(dim), a_(static_cast<std::size_t>(check_dim(dim) * dim), 0.0) {}

    SquareMatrix(int dim, std::vector<double> entries) : dim_(check_dim(dim)), a_(std::move(entries)) {
        if (a_.size() != static_cast<std::size_t>(dim * dim)) {
            throw DomainError("SquareMatrix: expected " + std::to_string(dim * dim) + " entries");
        }
        for (double v : a_) {
            if (!std::isfinite(v)) throw DomainError("SquareMatrix: non-finite entry");
        }
    }

    SquareMatrix(std::initializer_list<std::initializer_list<double>> rows) {
        const int n = static_cast<int>(rows.size());
        dim_ = check_dim(n);
        a_.reserve(static_cast<std::size_t>(n * n));
        for (const auto& r : rows) {
            if (static_cast<int>(r.size()) != n) throw DomainError("SquareMatrix: ragged initializer");
            for (double v : r) {
                if (!std::isfinite(v)) throw DomainError("SquareMatrix: non-finite entry");
                a_.push_back(v);
            }
        }
    }

    static SquareMatrix identity(int dim) {
        SquareMatrix m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    static SquareMatrix diagonal(std::span<const double> diag) {
        SquareMatrix m(static_cast<int>(diag.size()));
        for (int i = 0; i < m.dim(); ++i) m(i, i) = diag[static_cast<std::size_t>(i)];
        return m;
    }

    int dim() const { return dim_; }

    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * dim_ + j)]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * dim_ + j)]; }

    std::span<const double> row(int i) const {
        return {a_.data() + static_cast<std::ptrdiff_t>(i) * dim_, static_cast<std::size_t>(dim_)};
    }

    const std::vector<double>& entries() const { return a_; }

    bool all_finite() const {
        return std::all_of(a_.begin(), a_.end(), [](double v) { return std::isfinite(v); });
    }

    friend SquareMatrix operator*(const SquareMatrix& x, const SquareMatrix& y) {
        require_same_dim(x, y);
        const int n = x.dim_;
        SquareMatrix r(n);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < n; ++k) {
                const double xik = x(i, k);
                if (xik == 0.0) continue;
                for (int j = 0; j < n; ++j) r(i, j) += xik * y(k, j);
            }
        }
        return r;
    }

    friend SquareMatrix operator-(const SquareMatrix& x, const SquareMatrix& y) {
        require_same_dim(x, y);
        SquareMatrix r(x.dim_);
        for (std::size_t i = 0; i < x.a_.size(); ++i) r.a_[i] = x.a_[i] - y.a_[i];
        return r;
    }

    friend SquareMatrix operator*(double s, const SquareMatrix& x) {
        SquareMatrix r = x;
        for (double& v : r.a_) v *= s;
        return r;
    }

    friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

private:
    static int check_dim(int dim) {
        if (dim < kMinDim || dim > kMaxDim) {
            throw DomainError("SquareMatrix: dimension " + std::to_string(dim) + " outside [1, 8]");
        }
        return dim;
    }

    static void require_same_dim(const SquareMatrix& x, const SquareMatrix& y) {
        if (x.dim_ != y.dim_) throw DomainError("SquareMatrix: dimension mismatch");
    }

    int dim_ = 0;
    std::vector<double> a_;
};

inline SquareMatrix transpose(const SquareMatrix& m) {
    SquareMatrix t(m.dim());
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) t(j, i) = m(i, j);
    return t;
}

// LU with partial pivoting, computed in long double.
inline double determinant(const SquareMatrix& m) {
    const int n = m.dim();
    std::vector<long double> a(m.entries().begin(), m.entries().end());
    long double det = 1.0L;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(a[r * n + c]) > std::fabs(a[piv * n + c])) piv = r;
        if (a[piv * n + c] == 0.0L) return 0.0;
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(a[c * n + j], a[piv * n + j]);
            det = -det;
        }
        det *= a[c * n + c];
        for (int r = c + 1; r < n; ++r) {
            const long double f = a[r * n + c] / a[c * n + c];
            for (int j = c; j < n; ++j) a[r * n + j] -= f * a[c * n + j];
        }
    }
    return static_cast<double>(det);
}

// Gauss-Jordan with partial pivoting. Throws DomainError on an exactly
// singular pivot.
inline SquareMatrix inverse(const SquareMatrix& m) {
    const int n = m.dim();
    std::vector<long double> a(m.entries().begin(), m.entries().end());
    std::vector<long double> inv(static_cast<std::size_t>(n * n), 0.0L);
    for (int i = 0; i < n; ++i) inv[i * n + i] = 1.0L;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(a[r * n + c]) > std::fabs(a[piv * n + c])) piv = r;
        if (a[piv * n + c] == 0.0L) throw DomainError("inverse: singular matrix");
        if (piv != c) {
            for (int j = 0; j < n; ++j) {
                std::swap(a[c * n + j], a[piv * n + j]);
                std::swap(inv[c * n + j], inv[piv * n + j]);
            }
        }
        const long double p = a[c * n + c];
        for (int j = 0; j < n; ++j) {
            a[c * n + j] /= p;
            inv[c * n + j] /= p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            const long double f = a[r * n + c];
            if (f == 0.0L) continue;
            for (int j = 0; j < n; ++j) {
                a[r * n + j] -= f * a[c * n + j];
                inv[r * n + j] -= f * inv[c * n + j];
            }
        }
    }
    SquareMatrix out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = static_cast<double>(inv[i * n + j]);
    if (!out.all_finite()) throw DomainError("inverse: result not finite");
    return out;
}

inline double frobenius_norm(const SquareMatrix& m) {
    double s = 0.0;
    for (double v : m.entries()) s += v * v;
    return std::sqrt(s);
}

// Frobenius condition number ||M||_F ||M^-1||_F.
inline double condition_estimate(const SquareMatrix& m) {
    try {
        return frobenius_norm(m) * frobenius_norm(inverse(m));
    } catch (const DomainError&) {
        return INFINITY;
    }
}

inline double max_abs_diff(const SquareMatrix& x, const SquareMatrix& y) {
    if (x.dim() != y.dim()) throw DomainError("max_abs_diff: dimension mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < x.entries().size(); ++i)
        m = std::max(m, std::fabs(x.entries()[i] - y.entries()[i]));
    return m;
}

// Entrywise |x - y| / max(1, |x|, |y|), maximized over entries.
inline double max_rel_diff(const SquareMatrix& x, const SquareMatrix& y) {
    if (x.dim() != y.dim()) throw DomainError("max_rel_diff: dimension mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < x.entries().size(); ++i) {
        const double a = x.entries()[i], b = y.entries()[i];
        const double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
        m = std::max(m, std::fabs(a - b) / scale);
    }
    return m;
}

/// Row vector times matrix: v M.
inline Vec row_times(std::span<const double> v, const SquareMatrix& m) {
    if (static_cast<int>(v.size()) != m.dim()) throw DomainError("row_times: length mismatch");
    Vec out(v.size(), 0.0);
    for (int i = 0; i < m.dim(); ++i) {
        const double vi = v[static_cast<std::size_t>(i)];
        if (vi == 0.0) continue;
        for (int j = 0; j < m.dim(); ++j) out[static_cast<std::size_t>(j)] += vi * m(i, j);
    }
    return out;
}

inline double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// An element of SL(d, R): a SquareMatrix of dimension >= 2 whose
/// determinant is 1 within 1e-9 * d, checked at construction.
class UnimodularMatrix {
public:
    explicit UnimodularMatrix(SquareMatrix m) : m_(std::move(m)) {
        if (m_.dim() < 2) throw DomainError("UnimodularMatrix: dimension must be >= 2");
        const double det = determinant(m_);
        if (!(std::fabs(det - 1.0) <= 1e-9 * m_.dim())) {
            throw DomainError("UnimodularMatrix: determinant " + std::to_string(det) + " is not 1");
        }
    }

    static UnimodularMatrix identity(int dim) { return UnimodularMatrix(SquareMatrix::identity(dim), Trusted{}); }

    int dim() const { return m_.dim(); }
    double operator()(int i, int j) const { return m_(i, j); }
    const SquareMatrix& matrix() const { return m_; }
    operator const SquareMatrix&() const { return m_; }

    // Products and inverses of determinant-one matrices stay in SL(d, R);
    // these skip the determinant re-check (whose LU would cost more than
    // the product itself).
    friend UnimodularMatrix operator*(const UnimodularMatrix& x, const UnimodularMatrix& y) {
        return UnimodularMatrix(x.m_ * y.m_, Trusted{});
    }

    friend UnimodularMatrix inverse(const UnimodularMatrix& x) { return UnimodularMatrix(inverse(x.m_), Trusted{}); }
    friend UnimodularMatrix transpose(const UnimodularMatrix& x) {
        return UnimodularMatrix(transpose(x.m_), Trusted{});
    }

    friend bool operator==(const UnimodularMatrix&, const UnimodularMatrix&) = default;

    struct Trusted {};
    // For callers that construct a determinant-one matrix in closed form.
    UnimodularMatrix(SquareMatrix m, Trusted) : m_(std::move(m)) {
        if (!m_.all_finite()) throw RangeError("UnimodularMatrix: non-finite entry");
    }

private:
    SquareMatrix m_;
};

} // namespace horofarey
