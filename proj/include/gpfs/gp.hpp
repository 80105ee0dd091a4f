#pragma once

#include "gpfs/kernel.hpp"
#include "gpfs/linalg.hpp"

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace gpfs {

/// Fitted few-shot learner. Immutable after fit(); safe to share across threads.
///
/// All E output dimensions share one covariance (independent, isometric outputs),
/// so a single factorization of K_SS + σ_y²·I serves every column of support_y.
class GPModel {
public:
    [[nodiscard]] const KernelSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] double noise_sq() const noexcept { return noise_sq_; }
    [[nodiscard]] const FeatureSet& support_x() const noexcept { return support_x_; }
    [[nodiscard]] const Matrix& support_y() const noexcept { return support_y_; }
    [[nodiscard]] const CholeskyFactor& factor() const noexcept { return factor_; }
    /// (K_SS + σ_y²·I)⁻¹ · support_y, one column per encoding dimension.
    [[nodiscard]] const Matrix& alpha_weights() const noexcept { return alpha_weights_; }
    [[nodiscard]] std::size_t encoding_dim() const noexcept { return support_y_.cols(); }

private:
    friend GPModel fit(const KernelSpec&, double, FeatureSet, Matrix);

    KernelSpec spec_;
    double noise_sq_ = 0.0;
    FeatureSet support_x_;
    Matrix support_y_;
    CholeskyFactor factor_;
    Matrix alpha_weights_;
};

struct Posterior {
    Matrix mean;                     // n_q × E
    std::vector<double> variance;    // diagonal of the posterior covariance
    std::optional<Matrix> full_cov;  // n_q × n_q, only when requested
};

/// Pre-clamp bound for posterior variances, relative to max(1, prior variance).
inline constexpr double kVarianceSanityBound = 1e-10;

[[nodiscard]] GPModel fit(const KernelSpec& spec, double noise_sq, FeatureSet support_x, Matrix support_y);

[[nodiscard]] Posterior predict(const GPModel& model, const FeatureSet& query_x, bool want_full_cov = false);

/// Brute-force conditioning of the joint Gaussian over support and query outputs.
/// Inverts the noisy support block by Gauss-Jordan elimination with partial pivoting
/// and evaluates the kernel pointwise. It shares no code path with fit()/predict()
/// and exists to check them. Always fills full_cov. An empty support returns the prior.
[[nodiscard]] Posterior naive_condition(const KernelSpec& spec, double noise_sq, const FeatureSet& support_x,
                                        const Matrix& support_y, const FeatureSet& query_x);

enum class ZLayout { MeanOnly, MeanVar, MeanCovWindow };

[[nodiscard]] std::string_view to_string(ZLayout layout) noexcept;
[[nodiscard]] std::optional<ZLayout> parse_z_layout(std::string_view name);

inline constexpr std::size_t kCovWindowSide = 5;
inline constexpr std::size_t kCovWindowSize = kCovWindowSide * kCovWindowSide;
inline constexpr std::size_t kCovWindowCenter = kCovWindowSize / 2;

/// Per-query representation fed downstream; row j holds z^j.
struct ZRepresentation {
    ZLayout layout = ZLayout::MeanVar;
    std::size_t encoding_dim = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    Matrix values;  // n_q × width(layout)
};

[[nodiscard]] std::size_t z_width(ZLayout layout, std::size_t encoding_dim) noexcept;

/// MeanOnly: mean rows. MeanVar: [mean_j, var_j]. MeanCovWindow: mean_j followed by
/// Σ[j, k] for k over the 5×5 spatial neighbourhood of j (row-major), zero where the
/// neighbourhood leaves the h × w grid.
[[nodiscard]] ZRepresentation build_z(const Posterior& post, ZLayout layout, std::size_t height, std::size_t width);

}  // namespace gpfs
