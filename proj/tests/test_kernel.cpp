#include "gpfs/error.hpp"
#include "gpfs/kernel.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace gpfs {
namespace {

using test::random_matrix;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
std::vector<double> jacobi_eigenvalues(Matrix a) {
    const std::size_t n = a.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        }
        if (off < 1e-22) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    return eig;
}

KernelSpec spec_of(KernelFamily family, double sigma_f_sq = 1.0, double length_sq = 1.0, double alpha = 1.0) {
    return {family, sigma_f_sq, length_sq, alpha};
}

TEST(Kernel, SquaredExponentialExamples) {
    const std::vector<double> x{0, 0};
    const std::vector<double> y{1, 1};
    EXPECT_DOUBLE_EQ(kernel_eval(spec_of(KernelFamily::SquaredExponential), x, x), 1.0);
    EXPECT_NEAR(kernel_eval(spec_of(KernelFamily::SquaredExponential), x, y), std::exp(-1.0), 1e-16);
    // d² = 3, σ_f² = 2, ℓ² = 0.5.
    const std::vector<double> a{1, 1, 1};
    const std::vector<double> b{0, 0, 0};
    EXPECT_NEAR(kernel_eval(spec_of(KernelFamily::SquaredExponential, 2.0, 0.5), a, b), 0.09957413673572789, 1e-16);
}

TEST(Kernel, RationalQuadraticExamples) {
    const std::vector<double> x{0, 0};
    const std::vector<double> y{1, 1};
    EXPECT_DOUBLE_EQ(kernel_eval(spec_of(KernelFamily::RationalQuadratic), x, y), 0.5);
    // (1 + 2 / (2·2·1.5))^-2
    EXPECT_NEAR(kernel_eval(spec_of(KernelFamily::RationalQuadratic, 1.0, 1.5, 2.0), x, y), 0.5625, 1e-15);
}

TEST(Kernel, LinearIsPlainDotProduct) {
    const std::vector<double> x{1, 2, 3};
    const std::vector<double> y{4, -5, 6};
    EXPECT_DOUBLE_EQ(kernel_eval(spec_of(KernelFamily::Linear, 7.0, 3.0), x, y), 12.0);
}

TEST(Kernel, DimensionMismatchThrows) {
    const std::vector<double> x{1, 2};
    const std::vector<double> y{1, 2, 3};
    EXPECT_THROW_KIND(kernel_eval(spec_of(KernelFamily::SquaredExponential), x, y), ErrorKind::DimensionMismatch);
    const FeatureSet a(Matrix(2, 2, 1.0));
    const FeatureSet b(Matrix(2, 3, 1.0));
    EXPECT_THROW_KIND(gram(spec_of(KernelFamily::Linear), a, b), ErrorKind::DimensionMismatch);
}

TEST(Kernel, SpecValidation) {
    EXPECT_NO_THROW(spec_of(KernelFamily::RationalQuadratic, 1, 1, 1).validate());
    EXPECT_THROW_KIND(spec_of(KernelFamily::SquaredExponential, 0.0).validate(), ErrorKind::InvalidConfig);
    EXPECT_THROW_KIND(spec_of(KernelFamily::SquaredExponential, 1.0, -1.0).validate(), ErrorKind::InvalidConfig);
    EXPECT_THROW_KIND(spec_of(KernelFamily::RationalQuadratic, 1.0, 1.0, std::nan("")).validate(),
                      ErrorKind::InvalidConfig);
}

TEST(Kernel, FamilyNames) {
    EXPECT_EQ(parse_kernel_family("SE"), KernelFamily::SquaredExponential);
    EXPECT_EQ(parse_kernel_family("rq"), KernelFamily::RationalQuadratic);
    EXPECT_EQ(parse_kernel_family("Linear"), KernelFamily::Linear);
    EXPECT_FALSE(parse_kernel_family("matern").has_value());
    for (auto f : {KernelFamily::SquaredExponential, KernelFamily::RationalQuadratic, KernelFamily::Linear}) {
        EXPECT_EQ(parse_kernel_family(to_string(f)), f);
    }
}

TEST(Kernel, DefaultLengthScale) {
    EXPECT_DOUBLE_EQ(default_length_sq(1), 1.0);
    EXPECT_DOUBLE_EQ(default_length_sq(4), 2.0);
    EXPECT_NEAR(default_length_sq(512), 22.627417, 1e-6);
}

TEST(FeatureSet, RejectsZeroDimension) {
    EXPECT_THROW_KIND(FeatureSet(Matrix(3, 0)), ErrorKind::DimensionMismatch);
}

TEST(Gram, MatchesPointwiseEvaluation) {
    Rng rng(9);
    // Enough rows to cross the column blocking.
    const FeatureSet a(random_matrix(rng, 150, 6));
    const FeatureSet b(random_matrix(rng, 140, 6));
    for (auto family : {KernelFamily::SquaredExponential, KernelFamily::RationalQuadratic, KernelFamily::Linear}) {
        const KernelSpec spec = spec_of(family, 1.3, 2.0, 0.7);
        const Matrix k = gram(spec, a, b);
        ASSERT_EQ(k.rows(), 150u);
        ASSERT_EQ(k.cols(), 140u);
        double worst = 0.0;
        for (std::size_t i = 0; i < a.n(); ++i) {
            for (std::size_t j = 0; j < b.n(); ++j) {
                worst = std::max(worst, std::abs(k(i, j) - kernel_eval(spec, a.row(i), b.row(j))));
            }
        }
        EXPECT_LT(worst, 1e-12) << to_string(family);
    }
}

TEST(Gram, SameSetIsExactlySymmetricWithExactDiagonal) {
    Rng rng(10);
    const FeatureSet a(random_matrix(rng, 200, 5, 3.0));
    for (auto family : {KernelFamily::SquaredExponential, KernelFamily::RationalQuadratic, KernelFamily::Linear}) {
        const KernelSpec spec = spec_of(family, 2.0, 1.5, 1.5);
        const Matrix k = gram(spec, a, a);
        const auto diag = gram_diagonal(spec, a);
        for (std::size_t i = 0; i < a.n(); ++i) {
            if (family != KernelFamily::Linear) EXPECT_EQ(k(i, i), 2.0);
            EXPECT_NEAR(k(i, i), diag[i], 1e-12 * std::max(1.0, std::abs(diag[i])));
            for (std::size_t j = 0; j < i; ++j) ASSERT_EQ(k(i, j), k(j, i));
        }
    }
}

TEST(KernelProperty, GramIsPositiveSemidefinite) {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.below(25);
        const std::size_t d = 1 + rng.below(6);
        const FeatureSet x(random_matrix(rng, n, d));
        for (auto family : {KernelFamily::SquaredExponential, KernelFamily::RationalQuadratic, KernelFamily::Linear}) {
            const KernelSpec spec = spec_of(family, rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), rng.uniform(0.5, 3));
            for (double e : jacobi_eigenvalues(gram(spec, x, x))) {
                EXPECT_GT(e, -1e-10) << to_string(family) << " n=" << n;
            }
        }
    }
}

TEST(KernelProperty, RationalQuadraticApproachesSquaredExponential) {
    Rng rng(4);
    const FeatureSet x(random_matrix(rng, 30, 4));
    const Matrix se = gram(spec_of(KernelFamily::SquaredExponential, 1.0, 2.0), x, x);
    const Matrix rq = gram(spec_of(KernelFamily::RationalQuadratic, 1.0, 2.0, 1e4), x, x);
    EXPECT_LT(max_abs_diff(se, rq), 1e-3);
}

TEST(KernelProperty, StationaryKernelsAreTranslationInvariant) {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        // Small integers keep every difference exact.
        std::vector<double> x(3), y(3), xs(3), ys(3);
        for (std::size_t i = 0; i < 3; ++i) {
            x[i] = static_cast<double>(rng.below(7)) - 3.0;
            y[i] = static_cast<double>(rng.below(7)) - 3.0;
            const double shift = static_cast<double>(rng.below(21)) - 10.0;
            xs[i] = x[i] + shift;
            ys[i] = y[i] + shift;
        }
        for (auto family : {KernelFamily::SquaredExponential, KernelFamily::RationalQuadratic}) {
            const KernelSpec spec = spec_of(family, 1.5, 2.5, 0.8);
            EXPECT_EQ(kernel_eval(spec, x, y), kernel_eval(spec, xs, ys));
            EXPECT_EQ(kernel_eval(spec, x, y), kernel_eval(spec, y, x));
        }
    }
}

TEST(KernelProperty, LinearKernelIsNotTranslationInvariant) {
    const std::vector<double> x{1, 0};
    const std::vector<double> y{0, 1};
    const std::vector<double> xs{2, 1};
    const std::vector<double> ys{1, 2};
    const KernelSpec spec = spec_of(KernelFamily::Linear);
    EXPECT_EQ(kernel_eval(spec, x, y), 0.0);
    EXPECT_EQ(kernel_eval(spec, xs, ys), 4.0);
}

}  // namespace
}  // namespace gpfs
