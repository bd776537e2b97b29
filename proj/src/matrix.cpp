#include "cowm/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "cowm/kernels.hpp"

namespace cowm {

namespace {

void require_positive(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) {
        throw ShapeError("matrix dimensions must be positive, got " + shape_str(rows, cols));
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {
    require_positive(rows, cols);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, Vector values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    require_positive(rows, cols);
    if (values_.size() != rows_ * cols_) {
        throw ShapeError("value count " + std::to_string(values_.size()) +
                         " does not fill " + shape_str(rows_, cols_));
    }
    check_finite("construct");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows.begin() == rows.end() ? 0 : rows.begin()->size();
    require_positive(rows_, cols_);
    values_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw ShapeError("ragged initializer: row of length " + std::to_string(r.size()) +
                             " in " + shape_str(rows_, cols_));
        }
        values_.insert(values_.end(), r.begin(), r.end());
    }
    check_finite("construct");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_columns(const std::vector<Vector>& columns) {
    if (columns.empty()) throw ShapeError("from_columns: no columns");
    const std::size_t rows = columns.front().size();
    Matrix m(rows, columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].size() != rows) {
            throw ShapeError("from_columns: column " + std::to_string(j) + " has length " +
                             std::to_string(columns[j].size()) + ", expected " +
                             std::to_string(rows));
        }
        for (std::size_t i = 0; i < rows; ++i) m.at(i, j) = columns[j][i];
    }
    m.check_finite("from_columns");
    return m;
}

Vector Matrix::column(std::size_t j) const {
    Vector out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

Vector Matrix::row_sums() const {
    Vector out(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) out[i] += (*this)(i, j);
    }
    return out;
}

void Matrix::check_finite(const char* where) const {
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw RunError(std::string("non-finite value in ") + where + " (" +
                           shape_str(rows_, cols_) + ")");
        }
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: " + shape_str(a.rows(), a.cols()) + " * " +
                         shape_str(b.rows(), b.cols()));
    }
    Matrix c(a.rows(), b.cols());
    kernels::matmul_parallel(a.values().data(), b.values().data(), c.values().data(),
                             a.rows(), a.cols(), b.cols());
    c.check_finite("matmul");
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) t.at(j, i) = a(i, j);
    }
    return t;
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(op) + ": " + shape_str(a.rows(), a.cols()) + " vs " +
                         shape_str(b.rows(), b.cols()));
    }
}

}  // namespace

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < c.values().size(); ++i) {
        c.values()[i] = a.values()[i] + b.values()[i];
    }
    c.check_finite("add");
    return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "sub");
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < c.values().size(); ++i) {
        c.values()[i] = a.values()[i] - b.values()[i];
    }
    c.check_finite("sub");
    return c;
}

Matrix scaled(const Matrix& a, double s) {
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < c.values().size(); ++i) c.values()[i] = a.values()[i] * s;
    c.check_finite("scaled");
    return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < c.values().size(); ++i) {
        c.values()[i] = a.values()[i] * b.values()[i];
    }
    c.check_finite("hadamard");
    return c;
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    }
    return m;
}

namespace {

double norm1(const Matrix& m) {
    double best = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) col += std::abs(m(i, j));
        best = std::max(best, col);
    }
    return best;
}

// Solve M * X = I in place via LU with partial pivoting. Throws on a zero
// pivot. Returns the inverse.
Matrix lu_inverse(Matrix m) {
    const std::size_t n = m.rows();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(m(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m(r, col)) > best) {
                best = std::abs(m(r, col));
                pivot = r;
            }
        }
        if (best < 1e-300) throw SingularError("gram matrix is singular (zero pivot)");
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m.at(col, j), m.at(pivot, j));
            std::swap(perm[col], perm[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = m(r, col) / m(col, col);
            m.at(r, col) = f;
            for (std::size_t j = col + 1; j < n; ++j) m.at(r, j) -= f * m(col, j);
        }
    }

    Matrix inv(n, n);
    Vector x(n);
    for (std::size_t e = 0; e < n; ++e) {
        // forward substitution on the permuted unit vector
        for (std::size_t i = 0; i < n; ++i) {
            double s = perm[i] == e ? 1.0 : 0.0;
            for (std::size_t j = 0; j < i; ++j) s -= m(i, j) * x[j];
            x[i] = s;
        }
        // back substitution
        for (std::size_t ii = n; ii-- > 0;) {
            double s = x[ii];
            for (std::size_t j = ii + 1; j < n; ++j) s -= m(ii, j) * x[j];
            x[ii] = s / m(ii, ii);
        }
        for (std::size_t i = 0; i < n; ++i) inv.at(i, e) = x[i];
    }
    return inv;
}

}  // namespace

Matrix gram_inverse(const Matrix& a, double ridge) {
    if (a.rows() < a.cols()) {
        throw ShapeError("gram_inverse: need rows >= cols, got " +
                         shape_str(a.rows(), a.cols()));
    }
    if (ridge < 0.0) throw ConfigError("gram_inverse: ridge must be non-negative");

    Matrix gram = matmul(transpose(a), a);
    for (std::size_t i = 0; i < gram.rows(); ++i) gram.at(i, i) += ridge;

    Matrix inv = lu_inverse(gram);
    const double cond = norm1(gram) * norm1(inv);
    if (!std::isfinite(cond) || cond > 1e12) {
        throw SingularError("gram matrix ill-conditioned (cond estimate " +
                            std::to_string(cond) + ")");
    }
    // Enforce the symmetry the exact inverse has.
    Matrix sym(inv.rows(), inv.cols());
    for (std::size_t i = 0; i < inv.rows(); ++i) {
        for (std::size_t j = 0; j < inv.cols(); ++j) {
            sym.at(i, j) = 0.5 * (inv(i, j) + inv(j, i));
        }
    }
    sym.check_finite("gram_inverse");
    return sym;
}

std::optional<Vector> column_mean_direction(const Matrix& x) {
    Vector sum = x.row_sums();
    const double n = norm(sum);
    if (n < 1e-12) return std::nullopt;
    for (double& v : sum) v /= n;
    return sum;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw ShapeError("dot: lengths " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const Vector& a) { return std::sqrt(dot(a, a)); }

Vector normalized(const Vector& a) {
    const double n = norm(a);
    if (n < 1e-12) throw PreconditionError("normalized: near-zero vector");
    Vector out(a);
    for (double& v : out) v /= n;
    return out;
}

Vector axpy(double alpha, const Vector& x, const Vector& y) {
    if (x.size() != y.size()) {
        throw ShapeError("axpy: lengths " + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()));
    }
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = alpha * x[i] + y[i];
    return out;
}

}  // namespace cowm
