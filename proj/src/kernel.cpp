#include "gpfs/kernel.hpp"

#include "gpfs/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace gpfs {

namespace {

// Rows of the right operand processed per tile; keeps the tile resident in cache.
constexpr std::size_t kColumnBlock = 128;

double stationary_value(const KernelSpec& spec, double dist_sq) {
    if (spec.family == KernelFamily::SquaredExponential) {
        return spec.sigma_f_sq * std::exp(-dist_sq / (2.0 * spec.length_sq));
    }
    return spec.sigma_f_sq * std::pow(1.0 + dist_sq / (2.0 * spec.alpha * spec.length_sq), -spec.alpha);
}

std::vector<double> row_norms_sq(const FeatureSet& a) {
    std::vector<double> norms(a.n());
    for (std::size_t i = 0; i < a.n(); ++i) {
        norms[i] = dot(a.row(i), a.row(i));
    }
    return norms;
}

}  // namespace

std::string_view to_string(KernelFamily family) noexcept {
    switch (family) {
        case KernelFamily::SquaredExponential: return "se";
        case KernelFamily::RationalQuadratic: return "rq";
        case KernelFamily::Linear: return "linear";
    }
    return "unknown";
}

std::optional<KernelFamily> parse_kernel_family(std::string_view name) {
    std::string lowered(name);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lowered == "se") return KernelFamily::SquaredExponential;
    if (lowered == "rq") return KernelFamily::RationalQuadratic;
    if (lowered == "linear") return KernelFamily::Linear;
    return std::nullopt;
}

void KernelSpec::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(sigma_f_sq)) throw Error(ErrorKind::InvalidConfig, "sigma_f_sq must be positive and finite");
    if (!positive(length_sq)) throw Error(ErrorKind::InvalidConfig, "length_sq must be positive and finite");
    if (!positive(alpha)) throw Error(ErrorKind::InvalidConfig, "alpha must be positive and finite");
}

FeatureSet::FeatureSet(Matrix data) : data_(std::move(data)) {
    if (data_.cols() == 0) {
        throw Error(ErrorKind::DimensionMismatch, "feature dimension must be positive");
    }
    for (double v : data_.data()) {
        if (!std::isfinite(v)) {
            throw Error(ErrorKind::NonFiniteData, "feature vector entry is not finite");
        }
    }
}

double default_length_sq(std::size_t d) {
    return std::sqrt(static_cast<double>(d));
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw Error(ErrorKind::DimensionMismatch, "kernel arguments have dimensions " + std::to_string(x.size()) +
                                                      " and " + std::to_string(y.size()));
    }
    if (spec.family == KernelFamily::Linear) {
        return dot(x, y);
    }
    double dist_sq = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double diff = x[k] - y[k];
        dist_sq += diff * diff;
    }
    return stationary_value(spec, dist_sq);
}

Matrix gram(const KernelSpec& spec, const FeatureSet& a, const FeatureSet& b) {
    if (a.d() != b.d()) {
        throw Error(ErrorKind::DimensionMismatch, "feature sets have dimensions " + std::to_string(a.d()) + " and " +
                                                      std::to_string(b.d()));
    }
    const bool same = &a == &b;
    const bool linear = spec.family == KernelFamily::Linear;
    std::vector<double> a_norms;
    std::vector<double> b_norms;
    if (!linear) {
        a_norms = row_norms_sq(a);
        b_norms = same ? a_norms : row_norms_sq(b);
    }

    Matrix out(a.n(), b.n());
    for (std::size_t j0 = 0; j0 < b.n(); j0 += kColumnBlock) {
        const std::size_t j1 = std::min(b.n(), j0 + kColumnBlock);
        for (std::size_t i = 0; i < a.n(); ++i) {
            const auto ai = a.row(i);
            // For a symmetric Gram only the upper triangle is computed here.
            const std::size_t jstart = same ? std::max(j0, i) : j0;
            for (std::size_t j = jstart; j < j1; ++j) {
                const double ip = dot(ai, b.row(j));
                if (linear) {
                    out(i, j) = ip;
                } else {
                    const double dist_sq = std::max(0.0, a_norms[i] + b_norms[j] - 2.0 * ip);
                    out(i, j) = stationary_value(spec, dist_sq);
                }
            }
        }
    }
    if (same) {
        for (std::size_t i = 0; i < a.n(); ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                out(i, j) = out(j, i);
            }
        }
    }
    return out;
}

std::vector<double> gram_diagonal(const KernelSpec& spec, const FeatureSet& a) {
    std::vector<double> diag(a.n());
    for (std::size_t i = 0; i < a.n(); ++i) {
        diag[i] = spec.family == KernelFamily::Linear ? dot(a.row(i), a.row(i)) : spec.sigma_f_sq;
    }
    return diag;
}

}  // namespace gpfs
