#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "finset/errors.hpp"

namespace finset {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Sized for small state-space work
/// (a handful of rows/columns), so everything is plain loops over
/// contiguous storage. Entries are validated to be finite on construction.
class Matrix {
public:
    Matrix() = default;

    /// rows x cols, zero-initialized.
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {}

    Matrix(std::size_t rows, std::size_t cols, Vector entries)
        : rows_(rows), cols_(cols), entries_(std::move(entries)) {
        if (entries_.size() != rows_ * cols_) {
            throw DimensionMismatch("Matrix: entry count " + std::to_string(entries_.size()) +
                                    " does not match " + std::to_string(rows_) + "x" +
                                    std::to_string(cols_));
        }
        check_finite();
    }

    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        entries_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) {
                throw DimensionMismatch("Matrix: ragged initializer list");
            }
            entries_.insert(entries_.end(), r.begin(), r.end());
        }
        check_finite();
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix diagonal(const Vector& d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

    const Vector& entries() const { return entries_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    Matrix& operator+=(const Matrix& other) {
        require_same_shape(other, "+=");
        for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += other.entries_[i];
        return *this;
    }

    Matrix& operator-=(const Matrix& other) {
        require_same_shape(other, "-=");
        for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= other.entries_[i];
        return *this;
    }

    Matrix& operator*=(double s) {
        for (double& e : entries_) e *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) {
            throw DimensionMismatch("Matrix product: " + a.shape_string() + " * " +
                                    b.shape_string());
        }
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) {
                    c(i, j) += aik * b(k, j);
                }
            }
        }
        return c;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    double trace() const {
        if (rows_ != cols_) throw DimensionMismatch("trace: matrix not square");
        double s = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) s += (*this)(i, i);
        return s;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double e : entries_) s += e * e;
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0.0;
        for (double e : entries_) m = std::max(m, std::abs(e));
        return m;
    }

    bool is_zero() const {
        for (double e : entries_)
            if (e != 0.0) return false;
        return true;
    }

    /// Relative symmetry check: max |m_ij - m_ji| <= tol * max|entry|.
    bool is_symmetric(double rel_tol) const {
        if (rows_ != cols_) return false;
        const double scale = std::max(max_abs(), 1e-300);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i + 1; j < cols_; ++j)
                if (std::abs((*this)(i, j) - (*this)(j, i)) > rel_tol * scale) return false;
        return true;
    }

    Vector col(std::size_t j) const {
        Vector v(rows_);
        for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
        return v;
    }

    Vector row(std::size_t i) const {
        Vector v(cols_);
        for (std::size_t j = 0; j < cols_; ++j) v[j] = (*this)(i, j);
        return v;
    }

    std::string shape_string() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

private:
    void check_finite() const {
        for (double e : entries_) {
            if (!std::isfinite(e)) {
                throw NonFiniteValue("Matrix: non-finite entry on construction");
            }
        }
    }

    void require_same_shape(const Matrix& other, const char* op) const {
        if (!same_shape(other)) {
            throw DimensionMismatch(std::string("Matrix ") + op + ": " + shape_string() +
                                    " vs " + other.shape_string());
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector entries_;
};

/// [a, b] side by side.
inline Matrix hstack(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw DimensionMismatch("hstack: " + a.shape_string() + " vs " + b.shape_string());
    }
    Matrix c(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
        for (std::size_t j = 0; j < b.cols(); ++j) c(i, a.cols() + j) = b(i, j);
    }
    return c;
}

inline Vector matvec(const Matrix& m, const Vector& v) {
    if (m.cols() != v.size()) {
        throw DimensionMismatch("matvec: " + m.shape_string() + " * vector of length " +
                                std::to_string(v.size()));
    }
    Vector out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

inline void add_in_place(Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("vector add: length mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

inline double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

}  // namespace finset
