#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>

#include "finset/errors.hpp"
#include "finset/matrix.hpp"

namespace finset {

/// Lower-triangular factor L with L * L^T equal to the factored matrix.
///
/// cholesky() produces factors with strictly positive diagonals. The
/// constructor additionally admits degenerate factors (zero diagonal
/// entries, including the all-zero matrix) so that zero-variance test
/// configurations can be expressed directly.
class CholeskyFactor {
public:
    explicit CholeskyFactor(Matrix lower) : lower_(std::move(lower)) {
        if (lower_.rows() != lower_.cols()) {
            throw DimensionMismatch("CholeskyFactor: matrix not square");
        }
        for (std::size_t i = 0; i < lower_.rows(); ++i) {
            if (lower_(i, i) < 0.0) {
                throw NotPositiveDefinite("CholeskyFactor: negative diagonal entry");
            }
            for (std::size_t j = i + 1; j < lower_.cols(); ++j) {
                if (lower_(i, j) != 0.0) {
                    throw DimensionMismatch("CholeskyFactor: matrix not lower-triangular");
                }
            }
        }
    }

    const Matrix& lower() const { return lower_; }
    std::size_t dim() const { return lower_.rows(); }

    /// L * L^T.
    Matrix reconstruct() const { return lower_ * lower_.transpose(); }

private:
    Matrix lower_;
};

/// Cholesky factorization of a symmetric positive-definite matrix.
/// Symmetry is checked to 1e-12 relative tolerance; a nonpositive pivot
/// raises NotPositiveDefinite.
inline CholeskyFactor cholesky(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("cholesky: matrix not square");
    }
    if (!m.is_symmetric(1e-12)) {
        throw NotSymmetric("cholesky: matrix not symmetric within tolerance");
    }
    const std::size_t n = m.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= 0.0) {
            throw NotPositiveDefinite("cholesky: pivot " + std::to_string(j) +
                                      " is not positive");
        }
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return CholeskyFactor(std::move(l));
}

/// Forward substitution: solve L y = b for lower-triangular L.
inline Vector solve_lower(const Matrix& l, const Vector& b) {
    if (l.rows() != l.cols() || l.rows() != b.size()) {
        throw DimensionMismatch("solve_lower: shape mismatch");
    }
    Vector y(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        double s = b[i];
        for (std::size_t j = 0; j < i; ++j) s -= l(i, j) * y[j];
        if (l(i, i) == 0.0) throw NotPositiveDefinite("solve_lower: zero diagonal");
        y[i] = s / l(i, i);
    }
    return y;
}

/// Inverse of a lower-triangular matrix (again lower-triangular).
inline Matrix lower_inverse(const Matrix& l) {
    const std::size_t n = l.rows();
    Matrix inv(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        Vector e(n, 0.0);
        e[j] = 1.0;
        Vector y = solve_lower(l, e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = y[i];
    }
    return inv;
}

namespace detail {

/// Cyclic Jacobi eigenvalue iteration for a symmetric matrix. Overwrites
/// `a` with a (numerically) diagonal matrix; if `vecs` is non-null it
/// accumulates the rotations so its columns end up as eigenvectors.
inline void jacobi_eigen_symmetric(Matrix& a, Matrix* vecs) {
    const std::size_t n = a.rows();
    if (vecs) *vecs = Matrix::identity(n);
    const double scale = std::max(a.max_abs(), 1e-300);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-15 * scale * n) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                if (vecs) {
                    for (std::size_t k = 0; k < n; ++k) {
                        const double vkp = (*vecs)(k, p), vkq = (*vecs)(k, q);
                        (*vecs)(k, p) = c * vkp - s * vkq;
                        (*vecs)(k, q) = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
}

}  // namespace detail

/// Largest singular value together with a unit right-singular direction v
/// attaining ||m v|| = sigma_max.
inline std::pair<double, Vector> spectral_norm_with_direction(const Matrix& m) {
    if (m.rows() == 0 || m.cols() == 0) return {0.0, Vector(m.cols(), 0.0)};
    if (m.is_zero()) {
        Vector v(m.cols(), 0.0);
        v[0] = 1.0;
        return {0.0, v};
    }
    Matrix gram = m.transpose() * m;  // cols x cols
    Matrix vecs;
    detail::jacobi_eigen_symmetric(gram, &vecs);
    std::size_t best = 0;
    for (std::size_t i = 1; i < gram.rows(); ++i)
        if (gram(i, i) > gram(best, best)) best = i;
    Vector v = vecs.col(best);
    const double nv = norm2(v);
    for (double& e : v) e /= nv;
    return {std::sqrt(std::max(gram(best, best), 0.0)), v};
}

/// Largest singular value. Uses the Jacobi eigenvalues of the smaller Gram
/// matrix; matrices here are tiny so accuracy is the only concern.
inline double spectral_norm(const Matrix& m) {
    if (m.rows() == 0 || m.cols() == 0 || m.is_zero()) return 0.0;
    Matrix gram = m.rows() <= m.cols() ? Matrix(m * m.transpose())
                                       : Matrix(m.transpose() * m);
    detail::jacobi_eigen_symmetric(gram, nullptr);
    double lam = 0.0;
    for (std::size_t i = 0; i < gram.rows(); ++i) lam = std::max(lam, gram(i, i));
    return std::sqrt(lam);
}

/// Minimizer of ||targets - regressors * Theta||_F over Theta, via
/// Householder QR. Raises RankDeficient when the trailing R diagonal falls
/// below 1e-10 of the largest (or when there are fewer rows than columns).
inline Matrix least_squares(const Matrix& regressors, const Matrix& targets) {
    const std::size_t t = regressors.rows();
    const std::size_t p = regressors.cols();
    const std::size_t q = targets.cols();
    if (targets.rows() != t) {
        throw DimensionMismatch("least_squares: row counts differ");
    }
    if (t < p) {
        throw RankDeficient("least_squares: fewer rows than columns");
    }

    Matrix a = regressors;
    Matrix b = targets;
    Vector v(t);
    for (std::size_t j = 0; j < p; ++j) {
        // Householder reflector for column j, rows j..t-1.
        double norm = 0.0;
        for (std::size_t i = j; i < t; ++i) norm += a(i, j) * a(i, j);
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            throw RankDeficient("least_squares: zero column " + std::to_string(j));
        }
        const double alpha = a(j, j) >= 0.0 ? -norm : norm;
        double vnorm2 = 0.0;
        for (std::size_t i = j; i < t; ++i) {
            v[i] = a(i, j);
            if (i == j) v[i] -= alpha;
            vnorm2 += v[i] * v[i];
        }
        if (vnorm2 > 0.0) {
            const double beta = 2.0 / vnorm2;
            for (std::size_t col = j; col < p; ++col) {
                double s = 0.0;
                for (std::size_t i = j; i < t; ++i) s += v[i] * a(i, col);
                s *= beta;
                for (std::size_t i = j; i < t; ++i) a(i, col) -= s * v[i];
            }
            for (std::size_t col = 0; col < q; ++col) {
                double s = 0.0;
                for (std::size_t i = j; i < t; ++i) s += v[i] * b(i, col);
                s *= beta;
                for (std::size_t i = j; i < t; ++i) b(i, col) -= s * v[i];
            }
        }
        a(j, j) = alpha;
    }

    double rmax = 0.0, rmin = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        const double d = std::abs(a(j, j));
        rmax = std::max(rmax, d);
        rmin = j == 0 ? d : std::min(rmin, d);
    }
    if (rmax == 0.0 || rmin < 1e-10 * rmax) {
        throw RankDeficient("least_squares: regressors numerically rank-deficient");
    }

    // Back substitution on the top p rows of R theta = Q^T targets.
    Matrix theta(p, q);
    for (std::size_t col = 0; col < q; ++col) {
        for (std::size_t i = p; i-- > 0;) {
            double s = b(i, col);
            for (std::size_t j = i + 1; j < p; ++j) s -= a(i, j) * theta(j, col);
            theta(i, col) = s / a(i, i);
        }
    }
    return theta;
}

}  // namespace finset
