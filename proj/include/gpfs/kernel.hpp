#pragma once

#include "gpfs/linalg.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace gpfs {

enum class KernelFamily { SquaredExponential, RationalQuadratic, Linear };

[[nodiscard]] std::string_view to_string(KernelFamily family) noexcept;
/// Accepts "se", "rq", "linear" (case-insensitive); nullopt otherwise.
[[nodiscard]] std::optional<KernelFamily> parse_kernel_family(std::string_view name);

/// Kernel family and hyperparameters. `alpha` only affects RQ and `length_sq`
/// is unused by the linear kernel.
struct KernelSpec {
    KernelFamily family = KernelFamily::SquaredExponential;
    double sigma_f_sq = 1.0;
    double length_sq = 1.0;
    double alpha = 1.0;

    /// Throws InvalidConfig unless every hyperparameter is positive and finite.
    void validate() const;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// n feature vectors of dimension d stored as the rows of a matrix.
class FeatureSet {
public:
    FeatureSet() = default;
    explicit FeatureSet(Matrix data);

    [[nodiscard]] std::size_t n() const noexcept { return data_.rows(); }
    [[nodiscard]] std::size_t d() const noexcept { return data_.cols(); }
    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept { return data_.row(i); }
    [[nodiscard]] const Matrix& matrix() const noexcept { return data_; }

private:
    Matrix data_;
};

/// The ℓ² = √D heuristic used for all kernels.
[[nodiscard]] double default_length_sq(std::size_t d);

[[nodiscard]] double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

/// Gram matrix with entry (m, n) = κ(aₘ, bₙ). Passing the same object twice
/// yields an exactly symmetric result.
[[nodiscard]] Matrix gram(const KernelSpec& spec, const FeatureSet& a, const FeatureSet& b);

/// κ(x, x) for every row of `a`.
[[nodiscard]] std::vector<double> gram_diagonal(const KernelSpec& spec, const FeatureSet& a);

}  // namespace gpfs
