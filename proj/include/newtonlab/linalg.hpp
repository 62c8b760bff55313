#pragma once

/// Dense symmetric linear algebra for Newton systems: packed symmetric
/// storage, Cholesky solves for positive-definite systems, and extreme
/// eigenvalue computation for conditioning reports.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "newtonlab/errors.hpp"

namespace newtonlab {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch(a.size(), b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

inline bool all_finite(std::span<const double> a) {
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

/// x + t*d
inline Vector stepped(std::span<const double> x, double t, std::span<const double> d) {
    if (x.size() != d.size()) throw DimensionMismatch(x.size(), d.size());
    Vector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + t * d[i];
    return y;
}

inline Vector subtracted(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch(a.size(), b.size());
    Vector y(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] - b[i];
    return y;
}

/// Symmetric matrix in packed lower-triangular storage. Each off-diagonal
/// pair (i,j)/(j,i) is backed by a single entry, so symmetry holds exactly
/// by construction.
class SymmetricMatrix {
public:
    explicit SymmetricMatrix(std::size_t order)
        : order_(order), data_(order * (order + 1) / 2, 0.0) {}

    static SymmetricMatrix identity(std::size_t order) {
        SymmetricMatrix a(order);
        for (std::size_t i = 0; i < order; ++i) a.set(i, i, 1.0);
        return a;
    }

    static SymmetricMatrix diagonal(std::span<const double> d) {
        SymmetricMatrix a(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) a.set(i, i, d[i]);
        return a;
    }

    std::size_t order() const { return order_; }

    double operator()(std::size_t i, std::size_t j) const { return data_[index(i, j)]; }

    void set(std::size_t i, std::size_t j, double v) { data_[index(i, j)] = v; }

    Vector apply(std::span<const double> x) const {
        if (x.size() != order_) throw DimensionMismatch(order_, x.size());
        Vector y(order_, 0.0);
        for (std::size_t i = 0; i < order_; ++i)
            for (std::size_t j = 0; j < order_; ++j) y[i] += (*this)(i, j) * x[j];
        return y;
    }

    bool finite() const { return all_finite(data_); }

    double max_abs() const { return norm_inf(data_); }

private:
    static std::size_t index_lower(std::size_t i, std::size_t j) {
        return i * (i + 1) / 2 + j;  // j <= i
    }
    static std::size_t index(std::size_t i, std::size_t j) {
        return j <= i ? index_lower(i, j) : index_lower(j, i);
    }

    std::size_t order_;
    std::vector<double> data_;
};

/// Lower-triangular Cholesky factor of a positive-definite matrix.
class SpdFactorization {
public:
    SpdFactorization(std::size_t order, std::vector<double> lower_packed)
        : order_(order), lower_(std::move(lower_packed)) {}

    std::size_t order() const { return order_; }

    double lower(std::size_t i, std::size_t j) const { return lower_[i * (i + 1) / 2 + j]; }

    /// Solves A x = b via the two triangular systems.
    Vector solve(std::span<const double> b) const {
        if (b.size() != order_) throw DimensionMismatch(order_, b.size());
        Vector y(b.begin(), b.end());
        for (std::size_t i = 0; i < order_; ++i) {
            for (std::size_t j = 0; j < i; ++j) y[i] -= lower(i, j) * y[j];
            y[i] /= lower(i, i);
        }
        for (std::size_t ii = order_; ii-- > 0;) {
            for (std::size_t j = ii + 1; j < order_; ++j) y[ii] -= lower(j, ii) * y[j];
            y[ii] /= lower(ii, ii);
        }
        return y;
    }

private:
    std::size_t order_;
    std::vector<double> lower_;  // packed row-major lower triangle
};

/// Cholesky factorization without pivoting. A non-positive pivot is reported
/// via NotPositiveDefinite (1-based index of the failing leading minor), not
/// repaired: for the classical Newton step that failure is the diagnostic.
inline SpdFactorization factor_spd(const SymmetricMatrix& a) {
    const std::size_t n = a.order();
    std::vector<double> low(n * (n + 1) / 2, 0.0);
    auto at = [&low](std::size_t i, std::size_t j) -> double& { return low[i * (i + 1) / 2 + j]; };
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= at(j, k) * at(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) throw NotPositiveDefinite(j + 1);
        const double ljj = std::sqrt(d);
        at(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= at(i, k) * at(j, k);
            at(i, j) = s / ljj;
        }
    }
    return SpdFactorization(n, std::move(low));
}

inline Vector solve_spd(const SpdFactorization& f, std::span<const double> b) {
    return f.solve(b);
}

namespace detail {

/// Cyclic Jacobi eigenvalue iteration on a dense copy; returns the full
/// spectrum to machine accuracy. Orders here are tiny, so the O(n^3) sweeps
/// are irrelevant next to the robustness they buy for clustered spectra.
inline std::vector<double> jacobi_eigenvalues(const SymmetricMatrix& sym) {
    const std::size_t n = sym.order();
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] = sym(i, j);

    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return std::vector<double>(n, 0.0);

    const double tol = 1e-15 * scale;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a[p * n + q]));
        if (off <= tol) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) <= tol * 1e-2) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a[i * n + i];
    return eig;
}

}  // namespace detail

/// Smallest and largest eigenvalue of a symmetric matrix. Exact closed form
/// for orders 1-2; cyclic Jacobi above that (documented accuracy 1e-8
/// relative, achieved accuracy is machine level).
inline std::pair<double, double> extreme_eigenvalues(const SymmetricMatrix& a) {
    const std::size_t n = a.order();
    if (n == 0) return {0.0, 0.0};
    if (n == 1) return {a(0, 0), a(0, 0)};
    if (n == 2) {
        const double mean = 0.5 * (a(0, 0) + a(1, 1));
        const double r = std::hypot(0.5 * (a(0, 0) - a(1, 1)), a(0, 1));
        return {mean - r, mean + r};
    }
    const std::vector<double> eig = detail::jacobi_eigenvalues(a);
    auto [lo, hi] = std::minmax_element(eig.begin(), eig.end());
    return {*lo, *hi};
}

/// Small dense square matrix, row-major. Used for affine transforms, not for
/// Newton systems (those are symmetric and go through SpdFactorization).
class DenseMatrix {
public:
    explicit DenseMatrix(std::size_t order) : order_(order), a_(order * order, 0.0) {}

    static DenseMatrix identity(std::size_t order) {
        DenseMatrix m(order);
        for (std::size_t i = 0; i < order; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t order() const { return order_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * order_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * order_ + j]; }

    Vector apply(std::span<const double> x) const {
        if (x.size() != order_) throw DimensionMismatch(order_, x.size());
        Vector y(order_, 0.0);
        for (std::size_t i = 0; i < order_; ++i)
            for (std::size_t j = 0; j < order_; ++j) y[i] += (*this)(i, j) * x[j];
        return y;
    }

    Vector apply_transposed(std::span<const double> x) const {
        if (x.size() != order_) throw DimensionMismatch(order_, x.size());
        Vector y(order_, 0.0);
        for (std::size_t j = 0; j < order_; ++j)
            for (std::size_t i = 0; i < order_; ++i) y[j] += (*this)(i, j) * x[i];
        return y;
    }

    DenseMatrix multiplied(const DenseMatrix& b) const {
        if (b.order() != order_) throw DimensionMismatch(order_, b.order());
        DenseMatrix c(order_);
        for (std::size_t i = 0; i < order_; ++i)
            for (std::size_t k = 0; k < order_; ++k)
                for (std::size_t j = 0; j < order_; ++j) c(i, j) += (*this)(i, k) * b(k, j);
        return c;
    }

private:
    std::size_t order_;
    std::vector<double> a_;
};

/// LU factorization with partial pivoting for general square systems.
class LuFactorization {
public:
    explicit LuFactorization(const DenseMatrix& m)
        : order_(m.order()), a_(order_ * order_), perm_(order_) {
        for (std::size_t i = 0; i < order_; ++i) {
            perm_[i] = i;
            for (std::size_t j = 0; j < order_; ++j) a_[i * order_ + j] = m(i, j);
        }
        for (std::size_t k = 0; k < order_; ++k) {
            std::size_t piv = k;
            for (std::size_t i = k + 1; i < order_; ++i)
                if (std::abs(at(i, k)) > std::abs(at(piv, k))) piv = i;
            if (std::abs(at(piv, k)) < 1e-300) throw SingularTransform();
            if (piv != k) {
                std::swap(perm_[piv], perm_[k]);
                for (std::size_t j = 0; j < order_; ++j) std::swap(at(piv, j), at(k, j));
            }
            for (std::size_t i = k + 1; i < order_; ++i) {
                at(i, k) /= at(k, k);
                for (std::size_t j = k + 1; j < order_; ++j) at(i, j) -= at(i, k) * at(k, j);
            }
        }
    }

    Vector solve(std::span<const double> b) const {
        if (b.size() != order_) throw DimensionMismatch(order_, b.size());
        Vector y(order_);
        for (std::size_t i = 0; i < order_; ++i) y[i] = b[perm_[i]];
        for (std::size_t i = 0; i < order_; ++i)
            for (std::size_t j = 0; j < i; ++j) y[i] -= at(i, j) * y[j];
        for (std::size_t ii = order_; ii-- > 0;) {
            for (std::size_t j = ii + 1; j < order_; ++j) y[ii] -= at(ii, j) * y[j];
            y[ii] /= at(ii, ii);
        }
        return y;
    }

private:
    double& at(std::size_t i, std::size_t j) { return a_[i * order_ + j]; }
    double at(std::size_t i, std::size_t j) const { return a_[i * order_ + j]; }

    std::size_t order_;
    std::vector<double> a_;
    std::vector<std::size_t> perm_;
};

}  // namespace newtonlab
