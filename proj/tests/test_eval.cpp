#include "gpfs/error.hpp"
#include "gpfs/eval.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace gpfs {
namespace {

ZRepresentation mean_z(std::size_t h, std::size_t w, std::vector<double> means, ZLayout layout = ZLayout::MeanVar) {
    ZRepresentation z;
    z.layout = layout;
    z.encoding_dim = 1;
    z.height = h;
    z.width = w;
    z.values = Matrix(h * w, z_width(layout, 1));
    for (std::size_t j = 0; j < means.size(); ++j) z.values(j, 0) = means[j];
    return z;
}

SegPrediction pred_of(std::size_t h, std::size_t w, std::vector<std::uint8_t> data) {
    return {h, w, std::move(data)};
}

MaskMap mask_of(std::uint32_t h, std::uint32_t w, std::vector<std::uint8_t> data) {
    return {h, w, std::move(data)};
}

TEST(Readout, ThresholdWithTiesToBackground) {
    const SegPrediction p = threshold_readout(mean_z(1, 4, {0.2, 0.5, 0.5000001, 1.3}));
    EXPECT_EQ(p.data, (std::vector<std::uint8_t>{0, 0, 1, 1}));
    EXPECT_EQ(p.h, 1u);
    EXPECT_EQ(p.w, 4u);
    const SegPrediction low = threshold_readout(mean_z(1, 4, {0.2, 0.5, 0.5000001, 1.3}), 0.1);
    EXPECT_EQ(low.data, (std::vector<std::uint8_t>{1, 1, 1, 1}));
}

TEST(Readout, UsesFirstChannelOnly) {
    ZRepresentation z = mean_z(1, 2, {0.9, 0.1}, ZLayout::MeanOnly);
    EXPECT_EQ(threshold_readout(z).data, (std::vector<std::uint8_t>{1, 0}));
    z = mean_z(1, 2, {0.9, 0.1});
    z.values(1, 1) = 5.0;  // variance column must not matter
    EXPECT_EQ(threshold_readout(z).data, (std::vector<std::uint8_t>{1, 0}));
}

TEST(Readout, RejectsCovarianceWindow) {
    EXPECT_THROW_KIND(threshold_readout(mean_z(1, 1, {1.0}, ZLayout::MeanCovWindow)), ErrorKind::IncompatibleLayout);
}

TEST(Iou, CountsExample) {
    const IouCounts c = iou_counts(pred_of(2, 2, {1, 1, 1, 0}), mask_of(2, 2, {1, 1, 0, 1}));
    EXPECT_EQ(c.intersection, 2u);
    EXPECT_EQ(c.union_, 4u);
    EXPECT_EQ(c.ratio(), 0.5);
    EXPECT_EQ(iou_counts(pred_of(1, 2, {0, 0}), mask_of(1, 2, {0, 0})), (IouCounts{0, 0}));
    EXPECT_EQ((IouCounts{0, 0}).ratio(), 0.0);
}

TEST(Iou, ShapeMismatchThrows) {
    EXPECT_THROW_KIND(iou_counts(pred_of(2, 2, {1, 1, 1, 0}), mask_of(1, 4, {1, 1, 0, 1})), ErrorKind::ShapeMismatch);
}

TEST(Miou, AccumulatesCountsBeforeDividing) {
    ClassAccumulator acc;
    acc = accumulate_iou(acc, pred_of(1, 4, {1, 1, 0, 0}), mask_of(1, 4, {1, 1, 1, 1}), 3);  // 2 / 4
    acc = accumulate_iou(acc, pred_of(1, 2, {0, 0}), mask_of(1, 2, {1, 1}), 3);              // 0 / 2
    acc = accumulate_iou(acc, pred_of(1, 2, {1, 1}), mask_of(1, 2, {1, 1}), 5);              // 2 / 2
    // Class 3: 2/6, not the episode mean 0.25.
    EXPECT_EQ(acc.counts().at(3), (IouCounts{2, 6}));
    const std::vector<int> classes{3, 5};
    EXPECT_DOUBLE_EQ(miou(acc, classes), (2.0 / 6.0 + 1.0) / 2.0);
    EXPECT_EQ(acc.classes(), classes);
}

TEST(Miou, HalfExample) {
    ClassAccumulator acc;
    acc.add(0, {1, 2});
    acc.add(1, {3, 6});
    const std::vector<int> classes{0, 1};
    EXPECT_DOUBLE_EQ(miou(acc, classes), 0.5);
}

TEST(Miou, EmptyClassThrows) {
    ClassAccumulator acc;
    acc.add(0, {1, 2});
    acc.add(1, {0, 0});
    const std::vector<int> missing{0, 2};
    EXPECT_THROW_KIND(miou(acc, missing), ErrorKind::EmptyClass);
    const std::vector<int> empty_union{0, 1};
    EXPECT_THROW_KIND(miou(acc, empty_union), ErrorKind::EmptyClass);
    EXPECT_THROW_KIND(miou(acc, std::vector<int>{}), ErrorKind::EmptyClass);
}

TEST(Folds, MeanOfFourFolds) {
    const std::vector<double> folds{66.8, 70.7, 71.6, 63.2};
    EXPECT_NEAR(mean_over_folds(folds), 68.075, 1e-12);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.1f", mean_over_folds(folds));
    EXPECT_STREQ(buf, "68.1");
}

TEST(EvalProperty, AccumulationIsOrderIndependent) {
    Rng rng(14);
    std::vector<std::pair<int, IouCounts>> items;
    for (int i = 0; i < 200; ++i) {
        const auto u = rng.below(50);
        items.push_back({static_cast<int>(rng.below(5)), {rng.below(u + 1), u}});
    }
    ClassAccumulator forward;
    for (const auto& [c, counts] : items) forward.add(c, counts);
    for (int trial = 0; trial < 10; ++trial) {
        for (std::size_t k = items.size(); k > 1; --k) std::swap(items[k - 1], items[rng.below(k)]);
        ClassAccumulator shuffled;
        ClassAccumulator left;
        ClassAccumulator right;
        for (std::size_t k = 0; k < items.size(); ++k) {
            shuffled.add(items[k].first, items[k].second);
            (k % 2 == 0 ? left : right).add(items[k].first, items[k].second);
        }
        left.merge(right);
        EXPECT_EQ(shuffled, forward);
        EXPECT_EQ(left, forward);
    }
}

TEST(EvalProperty, IouIsSymmetricAndBounded) {
    Rng rng(15);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(30);
        std::vector<std::uint8_t> a(n), b(n);
        for (std::size_t k = 0; k < n; ++k) {
            a[k] = static_cast<std::uint8_t>(rng.below(2));
            b[k] = static_cast<std::uint8_t>(rng.below(2));
        }
        const auto n32 = static_cast<std::uint32_t>(n);
        const IouCounts ab = iou_counts(pred_of(1, n, a), mask_of(1, n32, b));
        const IouCounts ba = iou_counts(pred_of(1, n, b), mask_of(1, n32, a));
        EXPECT_EQ(ab, ba);
        EXPECT_LE(ab.intersection, ab.union_);
        EXPECT_LE(ab.union_, n);
        const IouCounts self = iou_counts(pred_of(1, n, a), mask_of(1, n32, a));
        EXPECT_EQ(self.intersection, self.union_);
    }
}

}  // namespace
}  // namespace gpfs
