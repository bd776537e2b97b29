#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <vector>

#include "cowm/errors.hpp"

namespace cowm {

using Vector = std::vector<double>;

// Dense row-major real matrix in double precision. Values are immutable from
// the outside except through the few mutating helpers the training loop
// needs; every constructor and operation rejects non-finite entries.
class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols);  // zero-filled
    Matrix(std::size_t rows, std::size_t cols, Vector values);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix from_columns(const std::vector<Vector>& columns);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
    double& at(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }

    const Vector& values() const { return values_; }
    Vector& values() { return values_; }

    Vector column(std::size_t j) const;
    Vector row_sums() const;

    // Throws NumericError-style RunError if any entry is NaN/Inf.
    void check_finite(const char* where) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector values_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scaled(const Matrix& a, double s);
Matrix hadamard(const Matrix& a, const Matrix& b);

double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

// Inverse of (A^T A + ridge*I) via partially pivoted LU, symmetrized.
// Throws SingularError when the system is singular or the 1-norm condition
// estimate exceeds 1e12.
Matrix gram_inverse(const Matrix& a, double ridge);

// Normalized column sum of x, or nullopt when the sum's norm is below 1e-12.
std::optional<Vector> column_mean_direction(const Matrix& x);

// Vector helpers.
double dot(const Vector& a, const Vector& b);
double norm(const Vector& a);
Vector normalized(const Vector& a);  // PreconditionError on near-zero norm
Vector axpy(double alpha, const Vector& x, const Vector& y);  // alpha*x + y

}  // namespace cowm
