#include "gpfs/gp.hpp"

#include "gpfs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gpfs {

namespace {

// The fault-injection build flips the sign of the subtracted term of the posterior
// covariance so that the verification suite can prove it notices.
#ifdef GPFS_FAULT_FLIP_VARIANCE_SIGN
constexpr double kExplainedSign = 1.0;
#else
constexpr double kExplainedSign = -1.0;
#endif

void require_same_dim(const FeatureSet& a, const FeatureSet& b) {
    if (a.d() != b.d()) {
        throw Error(ErrorKind::DimensionMismatch, "feature dimension " + std::to_string(b.d()) +
                                                      " does not match model dimension " + std::to_string(a.d()));
    }
}

// In-place Gauss-Jordan inverse with partial pivoting.
Matrix gauss_jordan_inverse(Matrix a) {
    const std::size_t n = a.rows();
    Matrix inv = Matrix::identity(n);
    double scale = 0.0;
    for (double v : a.data()) scale = std::max(scale, std::abs(v));
    const double tiny = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot_row = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(pivot_row, col))) pivot_row = r;
        }
        if (!(std::abs(a(pivot_row, col)) > tiny)) {
            throw Error(ErrorKind::SingularJoint, "zero pivot in column " + std::to_string(col));
        }
        if (pivot_row != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a(col, c), a(pivot_row, c));
                std::swap(inv(col, c), inv(pivot_row, c));
            }
        }
        const double p = a(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            a(col, c) /= p;
            inv(col, c) /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

}  // namespace

GPModel fit(const KernelSpec& spec, double noise_sq, FeatureSet support_x, Matrix support_y) {
    spec.validate();
    if (!std::isfinite(noise_sq) || noise_sq < 0.0) {
        throw Error(ErrorKind::InvalidConfig, "noise_sq must be finite and non-negative");
    }
    if (support_x.n() == 0) {
        throw Error(ErrorKind::EmptySupport, "fit needs at least one support vector");
    }
    if (support_y.rows() != support_x.n()) {
        throw Error(ErrorKind::DimensionMismatch, std::to_string(support_y.rows()) + " encodings for " +
                                                      std::to_string(support_x.n()) + " support vectors");
    }
    if (support_y.cols() == 0) {
        throw Error(ErrorKind::DimensionMismatch, "encoding dimension must be positive");
    }

    Matrix k_ss = gram(spec, support_x, support_x);
    for (std::size_t i = 0; i < k_ss.rows(); ++i) {
        k_ss(i, i) += noise_sq;
    }

    GPModel model;
    model.spec_ = spec;
    model.noise_sq_ = noise_sq;
    model.factor_ = cholesky(k_ss);
    model.alpha_weights_ = solve_spd(model.factor_, support_y);
    model.support_x_ = std::move(support_x);
    model.support_y_ = std::move(support_y);
    return model;
}

Posterior predict(const GPModel& model, const FeatureSet& query_x, bool want_full_cov) {
    require_same_dim(model.support_x(), query_x);
    if (query_x.n() == 0) {
        throw Error(ErrorKind::DimensionMismatch, "query set is empty");
    }
    const std::size_t n_q = query_x.n();
    const Matrix k_sq = gram(model.spec(), model.support_x(), query_x);

    Posterior post;
    post.mean = matmul_tn(k_sq, model.alpha_weights());

    // v = L⁻¹·K_SQ, so K_SQᵀ(K_SS + σ_y²I)⁻¹K_SQ = vᵀv.
    const Matrix v = solve_lower(model.factor(), k_sq);
    std::vector<double> explained(n_q, 0.0);
    for (std::size_t i = 0; i < v.rows(); ++i) {
        const auto vi = v.row(i);
        for (std::size_t j = 0; j < n_q; ++j) {
            explained[j] += vi[j] * vi[j];
        }
    }
    const std::vector<double> prior = gram_diagonal(model.spec(), query_x);
    post.variance.resize(n_q);
    for (std::size_t j = 0; j < n_q; ++j) {
        const double raw = prior[j] + kExplainedSign * explained[j];
        if (raw < -kVarianceSanityBound * std::max(1.0, std::abs(prior[j]))) {
            throw Error(ErrorKind::NumericalInvariant,
                        "posterior variance " + std::to_string(raw) + " at query " + std::to_string(j));
        }
        post.variance[j] = std::max(0.0, raw);
    }

    if (want_full_cov) {
        Matrix cov = gram(model.spec(), query_x, query_x);
        const Matrix vtv = matmul_tn(v, v);
        for (std::size_t k = 0; k < cov.data().size(); ++k) {
            cov.data()[k] += kExplainedSign * vtv.data()[k];
        }
        for (std::size_t j = 0; j < n_q; ++j) {
            cov(j, j) = post.variance[j];
        }
        post.full_cov = std::move(cov);
    }
    return post;
}

Posterior naive_condition(const KernelSpec& spec, double noise_sq, const FeatureSet& support_x,
                          const Matrix& support_y, const FeatureSet& query_x) {
    spec.validate();
    const std::size_t n_s = support_x.n();
    const std::size_t n_q = query_x.n();
    const std::size_t e = support_y.cols();
    if (support_y.rows() != n_s) {
        throw Error(ErrorKind::DimensionMismatch, "support encodings do not match support vectors");
    }
    if (n_s > 0) require_same_dim(support_x, query_x);

    // Joint covariance over [support; query], noise on the support block only.
    const std::size_t total = n_s + n_q;
    auto point = [&](std::size_t i) { return i < n_s ? support_x.row(i) : query_x.row(i - n_s); };
    Matrix joint(total, total);
    for (std::size_t i = 0; i < total; ++i) {
        for (std::size_t j = 0; j < total; ++j) {
            joint(i, j) = kernel_eval(spec, point(i), point(j));
        }
        if (i < n_s) joint(i, i) += noise_sq;
    }

    Posterior post;
    post.mean = Matrix(n_q, e);
    Matrix cov(n_q, n_q);
    for (std::size_t a = 0; a < n_q; ++a) {
        for (std::size_t b = 0; b < n_q; ++b) {
            cov(a, b) = joint(n_s + a, n_s + b);
        }
    }

    if (n_s > 0) {
        Matrix support_block(n_s, n_s);
        for (std::size_t i = 0; i < n_s; ++i) {
            for (std::size_t j = 0; j < n_s; ++j) {
                support_block(i, j) = joint(i, j);
            }
        }
        const Matrix inv = gauss_jordan_inverse(std::move(support_block));

        // gain = K_QS · (K_SS + σ_y²I)⁻¹, n_q × n_s
        Matrix gain(n_q, n_s);
        for (std::size_t a = 0; a < n_q; ++a) {
            for (std::size_t j = 0; j < n_s; ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < n_s; ++i) {
                    s += joint(n_s + a, i) * inv(i, j);
                }
                gain(a, j) = s;
            }
        }
        for (std::size_t a = 0; a < n_q; ++a) {
            for (std::size_t c = 0; c < e; ++c) {
                double s = 0.0;
                for (std::size_t j = 0; j < n_s; ++j) {
                    s += gain(a, j) * support_y(j, c);
                }
                post.mean(a, c) = s;
            }
            for (std::size_t b = 0; b < n_q; ++b) {
                double s = 0.0;
                for (std::size_t j = 0; j < n_s; ++j) {
                    s += gain(a, j) * joint(j, n_s + b);
                }
                cov(a, b) -= s;
            }
        }
    }

    post.variance.resize(n_q);
    for (std::size_t a = 0; a < n_q; ++a) {
        post.variance[a] = cov(a, a);
    }
    post.full_cov = std::move(cov);
    return post;
}

std::string_view to_string(ZLayout layout) noexcept {
    switch (layout) {
        case ZLayout::MeanOnly: return "mean";
        case ZLayout::MeanVar: return "mean_var";
        case ZLayout::MeanCovWindow: return "mean_cov_window";
    }
    return "unknown";
}

std::optional<ZLayout> parse_z_layout(std::string_view name) {
    if (name == "mean") return ZLayout::MeanOnly;
    if (name == "mean_var") return ZLayout::MeanVar;
    if (name == "mean_cov_window") return ZLayout::MeanCovWindow;
    return std::nullopt;
}

std::size_t z_width(ZLayout layout, std::size_t encoding_dim) noexcept {
    switch (layout) {
        case ZLayout::MeanOnly: return encoding_dim;
        case ZLayout::MeanVar: return encoding_dim + 1;
        case ZLayout::MeanCovWindow: return encoding_dim + kCovWindowSize;
    }
    return encoding_dim;
}

ZRepresentation build_z(const Posterior& post, ZLayout layout, std::size_t height, std::size_t width) {
    const std::size_t n_q = post.mean.rows();
    const std::size_t e = post.mean.cols();
    if (height * width != n_q) {
        throw Error(ErrorKind::SpatialMismatch, std::to_string(height) + "x" + std::to_string(width) +
                                                    " grid for " + std::to_string(n_q) + " queries");
    }
    if (layout == ZLayout::MeanCovWindow && !post.full_cov) {
        throw Error(ErrorKind::MissingFullCov, "covariance window needs the full posterior covariance");
    }

    ZRepresentation z;
    z.layout = layout;
    z.encoding_dim = e;
    z.height = height;
    z.width = width;
    z.values = Matrix(n_q, z_width(layout, e));
    for (std::size_t j = 0; j < n_q; ++j) {
        auto out = z.values.row(j);
        std::copy(post.mean.row(j).begin(), post.mean.row(j).end(), out.begin());
        if (layout == ZLayout::MeanVar) {
            out[e] = post.variance[j];
        } else if (layout == ZLayout::MeanCovWindow) {
            const auto r = static_cast<std::ptrdiff_t>(j / width);
            const auto c = static_cast<std::ptrdiff_t>(j % width);
            constexpr auto half = static_cast<std::ptrdiff_t>(kCovWindowSide / 2);
            std::size_t slot = e;
            for (std::ptrdiff_t dr = -half; dr <= half; ++dr) {
                for (std::ptrdiff_t dc = -half; dc <= half; ++dc, ++slot) {
                    const std::ptrdiff_t rr = r + dr;
                    const std::ptrdiff_t cc = c + dc;
                    if (rr < 0 || cc < 0 || rr >= static_cast<std::ptrdiff_t>(height) ||
                        cc >= static_cast<std::ptrdiff_t>(width)) {
                        continue;
                    }
                    const auto k = static_cast<std::size_t>(rr) * width + static_cast<std::size_t>(cc);
                    out[slot] = (*post.full_cov)(j, k);
                }
            }
        }
    }
    return z;
}

}  // namespace gpfs
