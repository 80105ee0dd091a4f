#include "gpfs/error.hpp"
#include "gpfs/gp.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace gpfs {
namespace {

using test::random_matrix;

const KernelSpec kUnitSe{KernelFamily::SquaredExponential, 1.0, 1.0, 1.0};

TEST(Fit, SinglePointWeights) {
    const GPModel model = fit(kUnitSe, 0.01, FeatureSet(Matrix{{0.0}}), Matrix{{1.0}});
    EXPECT_NEAR(model.alpha_weights()(0, 0), 1.0 / 1.01, 1e-15);
    EXPECT_EQ(model.encoding_dim(), 1u);

    const Posterior post = predict(model, FeatureSet(Matrix{{0.0}}));
    EXPECT_NEAR(post.mean(0, 0), 0.990099009900990, 1e-14);
    EXPECT_NEAR(post.variance[0], 0.009900990099009901, 1e-14);
    EXPECT_FALSE(post.full_cov.has_value());
}

TEST(Predict, MatchesReferenceExample) {
    // Reference values computed independently with numpy.
    const GPModel model = fit(kUnitSe, 0.1, FeatureSet(Matrix{{0}, {1}, {2}}), Matrix{{0}, {1}, {0}});
    const Posterior post = predict(model, FeatureSet(Matrix{{0.5}, {3.0}}), true);
    EXPECT_NEAR(post.mean(0, 0), 0.574547829523817, 1e-14);
    EXPECT_NEAR(post.mean(1, 0), -0.33289942591999805, 1e-14);
    const Matrix expected_cov{{0.08239523628534273, 0.0107988542085496},
                              {0.01079885420854964, 0.605941271117019}};
    ASSERT_TRUE(post.full_cov.has_value());
    EXPECT_LT(max_abs_diff(*post.full_cov, expected_cov), 1e-14);
    EXPECT_NEAR(post.variance[0], expected_cov(0, 0), 1e-14);
    EXPECT_NEAR(post.variance[1], expected_cov(1, 1), 1e-14);
}

TEST(Fit, DuplicateSupportWithoutNoiseUsesJitter) {
    const GPModel model = fit(kUnitSe, 0.0, FeatureSet(Matrix{{1, 2}, {1, 2}}), Matrix{{1}, {1}});
    EXPECT_GT(model.factor().jitter_applied, 0.0);
    const Posterior post = predict(model, FeatureSet(Matrix{{1, 2}}));
    EXPECT_NEAR(post.mean(0, 0), 1.0, 1e-6);
    EXPECT_GE(post.variance[0], 0.0);
}

TEST(Fit, RejectsBadInputs) {
    EXPECT_THROW_KIND(fit(kUnitSe, 0.01, FeatureSet(), Matrix()), ErrorKind::EmptySupport);
    EXPECT_THROW_KIND(fit(kUnitSe, 0.01, FeatureSet(Matrix{{0.0}}), Matrix{{1.0}, {2.0}}),
                      ErrorKind::DimensionMismatch);
    EXPECT_THROW_KIND(fit(kUnitSe, -1.0, FeatureSet(Matrix{{0.0}}), Matrix{{1.0}}), ErrorKind::InvalidConfig);
    EXPECT_THROW_KIND(fit(kUnitSe, std::nan(""), FeatureSet(Matrix{{0.0}}), Matrix{{1.0}}), ErrorKind::InvalidConfig);
    KernelSpec bad = kUnitSe;
    bad.length_sq = 0.0;
    EXPECT_THROW_KIND(fit(bad, 0.01, FeatureSet(Matrix{{0.0}}), Matrix{{1.0}}), ErrorKind::InvalidConfig);
}

TEST(Predict, RejectsQueryOfOtherDimension) {
    const GPModel model = fit(kUnitSe, 0.01, FeatureSet(Matrix{{0.0, 1.0}}), Matrix{{1.0}});
    EXPECT_THROW_KIND(predict(model, FeatureSet(Matrix{{0.0}})), ErrorKind::DimensionMismatch);
}

TEST(Predict, MultipleOutputsShareOneFactorization) {
    Rng rng(12);
    const FeatureSet x(random_matrix(rng, 20, 3));
    const FeatureSet q(random_matrix(rng, 7, 3));
    const Matrix y = random_matrix(rng, 20, 3);
    const Posterior joint = predict(fit(kUnitSe, 0.05, x, y), q);
    for (std::size_t c = 0; c < 3; ++c) {
        Matrix yc(20, 1);
        for (std::size_t i = 0; i < 20; ++i) yc(i, 0) = y(i, c);
        const Posterior single = predict(fit(kUnitSe, 0.05, x, yc), q);
        for (std::size_t j = 0; j < 7; ++j) {
            EXPECT_NEAR(joint.mean(j, c), single.mean(j, 0), 1e-13);
            EXPECT_EQ(joint.variance[j], single.variance[j]);
        }
    }
}

TEST(NaiveCondition, EmptySupportReturnsPrior) {
    const FeatureSet q(Matrix{{0.0}, {1.0}});
    const Posterior post = naive_condition(kUnitSe, 0.1, FeatureSet(), Matrix(0, 2), q);
    EXPECT_EQ(post.mean, Matrix(2, 2));
    ASSERT_TRUE(post.full_cov.has_value());
    EXPECT_DOUBLE_EQ((*post.full_cov)(0, 1), std::exp(-0.5));
    EXPECT_DOUBLE_EQ(post.variance[1], 1.0);
}

TEST(NaiveCondition, SingularJointThrows) {
    const FeatureSet x(Matrix{{1.0}, {1.0}});
    EXPECT_THROW_KIND(naive_condition(kUnitSe, 0.0, x, Matrix{{1}, {1}}, FeatureSet(Matrix{{0.0}})),
                      ErrorKind::SingularJoint);
}

TEST(GpProperty, PosteriorMatchesNaiveConditioning) {
    Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n_s = 1 + rng.below(25);
        const std::size_t n_q = 1 + rng.below(10);
        const std::size_t d = 1 + rng.below(5);
        const FeatureSet x(random_matrix(rng, n_s, d));
        const FeatureSet q(random_matrix(rng, n_q, d));
        const Matrix y = random_matrix(rng, n_s, 2);
        const KernelSpec spec{KernelFamily::RationalQuadratic, rng.uniform(0.5, 2), rng.uniform(0.5, 2),
                              rng.uniform(0.5, 3)};
        const Posterior fast = predict(fit(spec, 0.05, x, y), q, true);
        const Posterior slow = naive_condition(spec, 0.05, x, y, q);
        EXPECT_LT(max_abs_diff(fast.mean, slow.mean), 1e-10);
        EXPECT_LT(max_abs_diff(*fast.full_cov, *slow.full_cov), 1e-10);
    }
}

TEST(GpProperty, FullCovarianceIsSymmetricAndBoundedByPrior) {
    Rng rng(32);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n_s = 1 + rng.below(30);
        const std::size_t n_q = 1 + rng.below(12);
        const FeatureSet x(random_matrix(rng, n_s, 4));
        const FeatureSet q(random_matrix(rng, n_q, 4));
        const Posterior post = predict(fit(kUnitSe, 0.01, x, random_matrix(rng, n_s, 1)), q, true);
        const Matrix& cov = *post.full_cov;
        for (std::size_t a = 0; a < n_q; ++a) {
            EXPECT_GE(post.variance[a], 0.0);
            EXPECT_LE(post.variance[a], 1.0 + 1e-12);
            EXPECT_EQ(cov(a, a), post.variance[a]);
            for (std::size_t b = 0; b < n_q; ++b) EXPECT_NEAR(cov(a, b), cov(b, a), 1e-14);
        }
    }
}

TEST(GpProperty, FarQueriesRevertToPrior) {
    const GPModel model = fit(kUnitSe, 0.01, FeatureSet(Matrix{{0, 0}, {1, 0}}), Matrix{{1}, {-1}});
    const Posterior post = predict(model, FeatureSet(Matrix{{100, 100}}));
    EXPECT_NEAR(post.mean(0, 0), 0.0, 1e-12);
    EXPECT_NEAR(post.variance[0], 1.0, 1e-12);
}

Posterior grid_posterior(std::size_t h, std::size_t w) {
    const std::size_t n = h * w;
    Posterior post;
    post.mean = Matrix(n, 2);
    post.variance.resize(n);
    Matrix cov(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        post.mean(j, 0) = static_cast<double>(j);
        post.mean(j, 1) = -static_cast<double>(j);
        post.variance[j] = 100.0 + static_cast<double>(j);
        for (std::size_t k = 0; k < n; ++k) cov(j, k) = j == k ? post.variance[j] : 1000.0 * j + k;
    }
    post.full_cov = cov;
    return post;
}

TEST(BuildZ, MeanOnlyAndMeanVar) {
    const Posterior post = grid_posterior(2, 3);
    const ZRepresentation m = build_z(post, ZLayout::MeanOnly, 2, 3);
    EXPECT_EQ(m.values.cols(), 2u);
    EXPECT_EQ(m.values, post.mean);
    const ZRepresentation mv = build_z(post, ZLayout::MeanVar, 2, 3);
    ASSERT_EQ(mv.values.cols(), 3u);
    for (std::size_t j = 0; j < 6; ++j) {
        EXPECT_EQ(mv.values(j, 0), post.mean(j, 0));
        EXPECT_EQ(mv.values(j, 1), post.mean(j, 1));
        EXPECT_EQ(mv.values(j, 2), post.variance[j]);
    }
}

TEST(BuildZ, CovarianceWindowAtCornerAndInterior) {
    const Posterior post = grid_posterior(6, 6);
    const ZRepresentation z = build_z(post, ZLayout::MeanCovWindow, 6, 6);
    ASSERT_EQ(z.values.cols(), 2 + kCovWindowSize);

    // Corner (0, 0): only the 3×3 lower-right part of the window is on the grid.
    std::size_t nonzero = 0;
    for (std::size_t s = 0; s < kCovWindowSize; ++s) nonzero += z.values(0, 2 + s) != 0.0;
    EXPECT_EQ(nonzero, 9u);
    EXPECT_EQ(z.values(0, 2 + kCovWindowCenter), post.variance[0]);
    EXPECT_EQ(z.values(0, 2 + 0), 0.0);
    // Slot (dr=+1, dc=+2) of the corner is cell (1, 2).
    EXPECT_EQ(z.values(0, 2 + 3 * 5 + 4), (*post.full_cov)(0, 1 * 6 + 2));

    // Interior cell (2, 3) sees its whole neighbourhood.
    const std::size_t j = 2 * 6 + 3;
    EXPECT_EQ(z.values(j, 2 + kCovWindowCenter), post.variance[j]);
    for (std::size_t s = 0; s < kCovWindowSize; ++s) {
        const std::size_t rr = 2 + s / 5 - 2;
        const std::size_t cc = 3 + s % 5 - 2;
        EXPECT_EQ(z.values(j, 2 + s), (*post.full_cov)(j, rr * 6 + cc));
    }
}

TEST(BuildZ, Errors) {
    Posterior post = grid_posterior(2, 2);
    EXPECT_THROW_KIND(build_z(post, ZLayout::MeanVar, 3, 2), ErrorKind::SpatialMismatch);
    EXPECT_THROW_KIND(build_z(post, ZLayout::MeanOnly, 1, 3), ErrorKind::SpatialMismatch);
    post.full_cov.reset();
    EXPECT_THROW_KIND(build_z(post, ZLayout::MeanCovWindow, 2, 2), ErrorKind::MissingFullCov);
}

TEST(ZLayout, NamesAndWidths) {
    for (auto l : {ZLayout::MeanOnly, ZLayout::MeanVar, ZLayout::MeanCovWindow}) {
        EXPECT_EQ(parse_z_layout(to_string(l)), l);
    }
    EXPECT_FALSE(parse_z_layout("cov").has_value());
    EXPECT_EQ(z_width(ZLayout::MeanOnly, 3), 3u);
    EXPECT_EQ(z_width(ZLayout::MeanVar, 3), 4u);
    EXPECT_EQ(z_width(ZLayout::MeanCovWindow, 3), 28u);
}

}  // namespace
}  // namespace gpfs
