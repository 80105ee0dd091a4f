#include "gpfs/linalg.hpp"

#include "gpfs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gpfs {

namespace {

void require_finite(std::span<const double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorKind::NonFiniteData, "matrix entry is not finite");
        }
    }
}

std::string shape(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Attempts L·Lᵀ = A + jitter·I. Returns false on a non-positive pivot.
bool try_factor(const Matrix& a, double jitter, Matrix& lower) {
    const std::size_t n = a.rows();
    const double eps = std::numeric_limits<double>::epsilon();
    std::fill(lower.data().begin(), lower.data().end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto li = lower.row(i);
        for (std::size_t j = 0; j < i; ++j) {
            auto lj = lower.row(j);
            const double s = a(i, j) - dot(li.first(j), lj.first(j));
            li[j] = s / lj[j];
        }
        const double diag = a(i, i) + jitter;
        const double pivot = diag - dot(li.first(i), li.first(i));
        // Pivots at rounding level of the diagonal mean the matrix is numerically singular.
        const double floor = static_cast<double>(n) * eps * std::abs(diag);
        if (!(pivot > floor) || !std::isfinite(pivot)) {
            return false;
        }
        li[i] = std::sqrt(pivot);
    }
    return true;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        throw Error(ErrorKind::DimensionMismatch, "data length " + std::to_string(data_.size()) +
                                                      " does not match " + std::to_string(rows) + "x" +
                                                      std::to_string(cols));
    }
    require_finite(data_);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw Error(ErrorKind::DimensionMismatch, "ragged initializer list");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
    require_finite(data_);
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            t(c, r) = (*this)(r, c);
        }
    }
    return t;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    const std::size_t n = a.size();
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
    }
    for (; k < n; ++k) {
        s0 += a[k] * b[k];
    }
    return (s0 + s1) + (s2 + s3);
}

CholeskyFactor cholesky(const Matrix& a, std::span<const double> jitter_schedule) {
    if (a.rows() != a.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "cholesky needs a square matrix, got " + shape(a));
    }
    require_finite(a.data());
    const std::size_t n = a.rows();
    double scale = 0.0;
    for (double v : a.data()) {
        scale = std::max(scale, std::abs(v));
    }
    const double tol = kSymmetryTolerance * scale;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (std::abs(a(i, j) - a(j, i)) > tol) {
                throw Error(ErrorKind::NotSymmetric, "entries (" + std::to_string(i) + "," + std::to_string(j) +
                                                         ") and its transpose differ");
            }
        }
    }

    CholeskyFactor factor{Matrix(n, n), 0.0};
    for (double jitter : jitter_schedule) {
        if (try_factor(a, jitter, factor.lower)) {
            factor.jitter_applied = jitter;
            return factor;
        }
    }
    throw Error(ErrorKind::NotPositiveDefinite,
                "factorization failed at every jitter level (n=" + std::to_string(n) + ")");
}

Matrix solve_lower(const CholeskyFactor& factor, const Matrix& b) {
    const std::size_t n = factor.dim();
    if (b.rows() != n) {
        throw Error(ErrorKind::DimensionMismatch, "factor is " + std::to_string(n) + "x" + std::to_string(n) +
                                                      ", right-hand side is " + shape(b));
    }
    const Matrix& l = factor.lower;
    Matrix x = b;
    const std::size_t m = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        double* xi = x.row(i).data();
        for (std::size_t k = 0; k < i; ++k) {
            const double lik = l(i, k);
            if (lik == 0.0) {
                continue;
            }
            const double* xk = x.row(k).data();
            for (std::size_t c = 0; c < m; ++c) {
                xi[c] -= lik * xk[c];
            }
        }
        const double inv = 1.0 / l(i, i);
        for (std::size_t c = 0; c < m; ++c) {
            xi[c] *= inv;
        }
    }
    return x;
}

Matrix solve_upper_transposed(const CholeskyFactor& factor, const Matrix& b) {
    const std::size_t n = factor.dim();
    if (b.rows() != n) {
        throw Error(ErrorKind::DimensionMismatch, "factor is " + std::to_string(n) + "x" + std::to_string(n) +
                                                      ", right-hand side is " + shape(b));
    }
    const Matrix& l = factor.lower;
    Matrix x = b;
    const std::size_t m = b.cols();
    for (std::size_t i = n; i-- > 0;) {
        double* xi = x.row(i).data();
        const double inv = 1.0 / l(i, i);
        for (std::size_t c = 0; c < m; ++c) {
            xi[c] *= inv;
        }
        // Row i of L holds column i of Lᵀ; eliminate x_i from the rows above.
        for (std::size_t k = 0; k < i; ++k) {
            const double lik = l(i, k);
            if (lik == 0.0) {
                continue;
            }
            double* xk = x.row(k).data();
            for (std::size_t c = 0; c < m; ++c) {
                xk[c] -= lik * xi[c];
            }
        }
    }
    return x;
}

Matrix solve_spd(const CholeskyFactor& factor, const Matrix& b) {
    return solve_upper_transposed(factor, solve_lower(factor, b));
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw Error(ErrorKind::DimensionMismatch, "matmul " + shape(a) + " by " + shape(b));
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* oi = out.row(i).data();
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            const double* bk = b.row(k).data();
            for (std::size_t j = 0; j < b.cols(); ++j) {
                oi[j] += aik * bk[j];
            }
        }
    }
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "matmul_nt " + shape(a) + " by transpose of " + shape(b));
    }
    Matrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            out(i, j) = dot(a.row(i), b.row(j));
        }
    }
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw Error(ErrorKind::DimensionMismatch, "matmul_tn transpose of " + shape(a) + " by " + shape(b));
    }
    Matrix out(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* bk = b.row(k).data();
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = a(k, i);
            double* oi = out.row(i).data();
            for (std::size_t j = 0; j < b.cols(); ++j) {
                oi[j] += aki * bk[j];
            }
        }
    }
    return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "compare " + shape(a) + " with " + shape(b));
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) {
        worst = std::max(worst, std::abs(a.data()[k] - b.data()[k]));
    }
    return worst;
}

}  // namespace gpfs
