#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace gpfs {

/// Dense row-major matrix of doubles. Entries are required to be finite when
/// constructed from external data; arithmetic helpers below preserve that.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    /// Takes ownership of `data`; throws DimensionMismatch on a size mismatch and
    /// NonFiniteData if any entry is NaN or infinite.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    [[nodiscard]] static Matrix identity(std::size_t n);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    [[nodiscard]] double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    [[nodiscard]] Matrix transposed() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Lower-triangular factor L with L·Lᵀ = A + jitter_applied·I.
struct CholeskyFactor {
    Matrix lower;
    double jitter_applied = 0.0;

    [[nodiscard]] std::size_t dim() const noexcept { return lower.rows(); }
};

/// Diagonal jitter levels tried in order until factorization succeeds.
inline constexpr std::array<double, 4> kJitterSchedule = {0.0, 1e-10, 1e-8, 1e-6};

/// Relative tolerance used by the symmetry precondition of cholesky().
inline constexpr double kSymmetryTolerance = 1e-10;

[[nodiscard]] CholeskyFactor cholesky(const Matrix& a, std::span<const double> jitter_schedule = kJitterSchedule);

/// Forward substitution: returns X with L·X = B.
[[nodiscard]] Matrix solve_lower(const CholeskyFactor& factor, const Matrix& b);

/// Back substitution: returns X with Lᵀ·X = B.
[[nodiscard]] Matrix solve_upper_transposed(const CholeskyFactor& factor, const Matrix& b);

/// Returns A⁻¹·B for A = L·Lᵀ using two triangular solves.
[[nodiscard]] Matrix solve_spd(const CholeskyFactor& factor, const Matrix& b);

[[nodiscard]] Matrix matmul(const Matrix& a, const Matrix& b);

/// A·Bᵀ without materializing the transpose.
[[nodiscard]] Matrix matmul_nt(const Matrix& a, const Matrix& b);

/// Aᵀ·B without materializing the transpose.
[[nodiscard]] Matrix matmul_tn(const Matrix& a, const Matrix& b);

[[nodiscard]] double max_abs_diff(const Matrix& a, const Matrix& b);

[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace gpfs
