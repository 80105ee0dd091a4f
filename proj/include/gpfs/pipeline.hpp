#pragma once

#include "gpfs/dataset.hpp"
#include "gpfs/eval.hpp"
#include "gpfs/gp.hpp"

#include <cstdint>
#include <vector>

namespace gpfs {

enum class MaskEncoderKind { AvgPool, RandomFeatures };

/// How one episode is turned into a prediction.
struct PipelineConfig {
    KernelSpec kernel;  // length_sq already resolved
    double noise_sq = 0.01;
    ZLayout layout = ZLayout::MeanVar;
    MaskEncoderKind encoder = MaskEncoderKind::AvgPool;
    /// Extra random-feature channels; used only by MaskEncoderKind::RandomFeatures.
    std::size_t encoder_dim = 16;
    std::uint64_t encoder_seed = 0;
    bool downsample_support = true;
    bool downsample_query = false;
    double threshold = kDefaultThreshold;
};

/// Support cells of an episode stacked as GP training data.
struct SupportSet {
    FeatureSet x;
    Matrix y;
};

/// Gathers every support cell, background and foreground alike. Column 0 of y is
/// always the foreground fraction; the random-feature encoder appends its
/// channels after it.
[[nodiscard]] SupportSet build_support(const Episode& ep, const PipelineConfig& config);

[[nodiscard]] EpisodeReport run_episode(const Episode& ep, const PipelineConfig& config);

struct SweepRow {
    std::size_t shots = 0;
    double miou = 0.0;
    double mean_variance = 0.0;
    ClassAccumulator accumulator;
    std::vector<EpisodeReport> episodes;
};

struct SweepResult {
    std::size_t fold = 0;
    std::vector<SweepRow> rows;
};

/// Runs `episodes` episodes per shot count. Each episode's query and class are
/// shared by every shot count and its supports are nested prefixes of a single
/// draw, so rows differ only in how much support the learner saw. Results do not
/// depend on `workers`.
[[nodiscard]] SweepResult shots_sweep(const DatasetIndex& index, std::size_t fold, std::span<const std::size_t> shots,
                                      std::size_t episodes, const PipelineConfig& config, std::uint64_t seed,
                                      SamplingMode mode = SamplingMode::Eval, std::size_t workers = 1);

}  // namespace gpfs
