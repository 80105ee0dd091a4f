#include "gpfs/error.hpp"
#include "gpfs/pipeline.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

namespace gpfs {
namespace {

using test::TempDir;

SynthConfig easy_synth() {
    SynthConfig c;
    c.n_classes = 4;
    c.n_folds = 2;
    c.images_per_class = 6;
    c.height = 8;
    c.width = 8;
    c.dim = 8;
    return c;
}

PipelineConfig pipeline_for(std::size_t dim) {
    PipelineConfig p;
    p.kernel.length_sq = default_length_sq(dim);
    return p;
}

class PipelineTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = std::make_unique<TempDir>("pipeline");
        index_ = synth_dataset(easy_synth(), 5, dir_->path());
        EpisodeSampler sampler(index_, 0, 3, SamplingMode::Eval, 2);
        episode_ = sample_episode(index_, sampler);
    }

    std::unique_ptr<TempDir> dir_;
    DatasetIndex index_;
    Episode episode_;
};

TEST_F(PipelineTest, SupportStacksEveryDownsampledCell) {
    const SupportSet s = build_support(episode_, pipeline_for(8));
    EXPECT_EQ(s.x.n(), 3u * 4u * 4u);
    EXPECT_EQ(s.x.d(), 8u);
    EXPECT_EQ(s.y.cols(), 1u);
    for (double v : s.y.data()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }

    PipelineConfig full = pipeline_for(8);
    full.downsample_support = false;
    EXPECT_EQ(build_support(episode_, full).x.n(), 3u * 64u);

    PipelineConfig random = pipeline_for(8);
    random.encoder = MaskEncoderKind::RandomFeatures;
    random.encoder_dim = 4;
    const SupportSet r = build_support(episode_, random);
    EXPECT_EQ(r.y.cols(), 5u);
    for (std::size_t i = 0; i < r.y.rows(); ++i) EXPECT_EQ(r.y(i, 0), s.y(i, 0));
}

TEST_F(PipelineTest, EmptySupportThrows) {
    EXPECT_THROW_KIND(build_support(episode_.with_shots(0), pipeline_for(8)), ErrorKind::EmptySupport);
}

TEST_F(PipelineTest, EpisodeReportIsConsistent) {
    const EpisodeReport r = run_episode(episode_, pipeline_for(8));
    EXPECT_EQ(r.shots, 3u);
    EXPECT_EQ(r.query_id, episode_.query_id);
    EXPECT_LE(r.counts.intersection, r.counts.union_);
    EXPECT_LE(r.counts.union_, 64u);
    EXPECT_GT(r.mean_variance, 0.0);
    EXPECT_LE(r.mean_variance, r.max_variance);
    EXPECT_LE(r.max_variance, 1.0);
    // Separation 4 against unit noise: the query is segmented well.
    EXPECT_GT(r.counts.ratio(), 0.8);
}

TEST_F(PipelineTest, ReadoutIgnoresTheRequestedLayout) {
    PipelineConfig window = pipeline_for(8);
    window.layout = ZLayout::MeanCovWindow;
    PipelineConfig mean_only = pipeline_for(8);
    mean_only.layout = ZLayout::MeanOnly;
    const EpisodeReport a = run_episode(episode_, pipeline_for(8));
    const EpisodeReport b = run_episode(episode_, window);
    const EpisodeReport c = run_episode(episode_, mean_only);
    EXPECT_EQ(a.counts, b.counts);
    EXPECT_EQ(a.counts, c.counts);
    EXPECT_EQ(a.mean_variance, b.mean_variance);
}

TEST_F(PipelineTest, DownsampledQueryIsScoredOnItsOwnGrid) {
    PipelineConfig p = pipeline_for(8);
    p.downsample_query = true;
    const EpisodeReport r = run_episode(episode_, p);
    EXPECT_LE(r.counts.union_, 16u);
}

TEST_F(PipelineTest, SweepDoesNotDependOnWorkers) {
    const std::vector<std::size_t> shots{1, 2, 4};
    const SweepResult one = shots_sweep(index_, 0, shots, 12, pipeline_for(8), 77, SamplingMode::Eval, 1);
    const SweepResult three = shots_sweep(index_, 0, shots, 12, pipeline_for(8), 77, SamplingMode::Eval, 3);
    ASSERT_EQ(one.rows.size(), 3u);
    for (std::size_t s = 0; s < 3; ++s) {
        EXPECT_EQ(one.rows[s].shots, shots[s]);
        EXPECT_EQ(one.rows[s].miou, three.rows[s].miou);
        EXPECT_EQ(one.rows[s].mean_variance, three.rows[s].mean_variance);
        EXPECT_EQ(one.rows[s].accumulator, three.rows[s].accumulator);
        ASSERT_EQ(one.rows[s].episodes.size(), 12u);
    }
}

TEST_F(PipelineTest, SweepSupportsAreNestedPrefixes) {
    const std::vector<std::size_t> shots{1, 3, 5};
    const SweepResult sweep = shots_sweep(index_, 0, shots, 8, pipeline_for(8), 3);
    for (std::size_t i = 0; i < 8; ++i) {
        const auto& largest = sweep.rows[2].episodes[i];
        for (std::size_t s = 0; s < 2; ++s) {
            const auto& ep = sweep.rows[s].episodes[i];
            EXPECT_EQ(ep.query_id, largest.query_id);
            EXPECT_EQ(ep.class_id, largest.class_id);
            ASSERT_EQ(ep.support_ids.size(), shots[s]);
            for (std::size_t k = 0; k < shots[s]; ++k) EXPECT_EQ(ep.support_ids[k], largest.support_ids[k]);
        }
    }
    // More support never raises the average posterior variance here.
    EXPECT_GE(sweep.rows[0].mean_variance, sweep.rows[1].mean_variance);
    EXPECT_GE(sweep.rows[1].mean_variance, sweep.rows[2].mean_variance);
}

TEST_F(PipelineTest, SweepRejectsBadShotLists) {
    const std::vector<std::size_t> unsorted{3, 1};
    EXPECT_THROW_KIND(shots_sweep(index_, 0, unsorted, 2, pipeline_for(8), 1), ErrorKind::InvalidConfig);
    const std::vector<std::size_t> too_many{40};
    EXPECT_THROW_KIND(shots_sweep(index_, 0, too_many, 2, pipeline_for(8), 1), ErrorKind::InsufficientImages);
}

}  // namespace
}  // namespace gpfs
