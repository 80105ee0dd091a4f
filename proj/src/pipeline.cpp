#include "gpfs/pipeline.hpp"

#include "gpfs/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

namespace gpfs {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

SupportSet build_support(const Episode& ep, const PipelineConfig& config) {
    if (ep.shots() == 0) {
        throw Error(ErrorKind::EmptySupport, "episode has no support examples");
    }
    const std::size_t extra = config.encoder == MaskEncoderKind::RandomFeatures ? config.encoder_dim : 0;
    std::vector<double> xs;
    std::vector<double> ys;
    std::size_t rows = 0;
    std::size_t dim = 0;
    for (std::size_t k = 0; k < ep.shots(); ++k) {
        const FeatureMap fm =
            config.downsample_support ? downsample_half(ep.support_features[k]) : ep.support_features[k];
        if (k == 0) {
            dim = fm.d;
        } else if (fm.d != dim) {
            throw Error(ErrorKind::DimensionMismatch, "support feature maps disagree on dimension");
        }
        const EncodedMask fraction = encode_mask_avgpool(ep.support_masks[k], fm.h, fm.w);
        EncodedMask random;
        if (extra > 0) {
            random = encode_mask_random_features(ep.support_masks[k], fm.h, fm.w, extra, config.encoder_seed);
        }
        for (std::size_t cell = 0; cell < fm.cells(); ++cell) {
            const auto f = fm.data.row(cell);
            xs.insert(xs.end(), f.begin(), f.end());
            ys.push_back(fraction.data(cell, 0));
            if (extra > 0) {
                const auto r = random.data.row(cell);
                ys.insert(ys.end(), r.begin(), r.end());
            }
        }
        rows += fm.cells();
    }
    return {FeatureSet(Matrix(rows, dim, std::move(xs))), Matrix(rows, 1 + extra, std::move(ys))};
}

EpisodeReport run_episode(const Episode& ep, const PipelineConfig& config) {
    const auto start = Clock::now();
    EpisodeReport report;
    report.class_id = ep.class_id;
    report.shots = ep.shots();
    report.query_id = ep.query_id;
    report.support_ids = ep.support_ids;

    SupportSet support = build_support(ep, config);
    const FeatureMap query = config.downsample_query ? downsample_half(ep.query_features) : ep.query_features;
    const FeatureSet query_x = query.features();

    const auto fit_start = Clock::now();
    const GPModel model = fit(config.kernel, config.noise_sq, std::move(support.x), std::move(support.y));
    report.fit_ms = ms_since(fit_start);
    report.jitter = model.factor().jitter_applied;

    const auto predict_start = Clock::now();
    const Posterior post = predict(model, query_x, config.layout == ZLayout::MeanCovWindow);
    const ZRepresentation z = build_z(post, config.layout, query.h, query.w);
    report.predict_ms = ms_since(predict_start);

    // The readout consumes the mean channel only, whatever layout was requested.
    const ZRepresentation readout_z =
        config.layout == ZLayout::MeanCovWindow ? build_z(post, ZLayout::MeanVar, query.h, query.w) : z;
    const SegPrediction pred = threshold_readout(readout_z, config.threshold);
    const MaskMap gt = mask_to_grid(ep.query_mask, query.h, query.w);
    report.counts = iou_counts(pred, gt);

    double sum = 0.0;
    double worst = 0.0;
    for (double v : post.variance) {
        sum += v;
        worst = std::max(worst, v);
    }
    report.mean_variance = sum / static_cast<double>(post.variance.size());
    report.max_variance = worst;
    report.total_ms = ms_since(start);
    return report;
}

SweepResult shots_sweep(const DatasetIndex& index, std::size_t fold, std::span<const std::size_t> shots,
                        std::size_t episodes, const PipelineConfig& config, std::uint64_t seed, SamplingMode mode,
                        std::size_t workers) {
    if (shots.empty()) {
        throw Error(ErrorKind::InvalidConfig, "shots list is empty");
    }
    if (!std::is_sorted(shots.begin(), shots.end()) ||
        std::adjacent_find(shots.begin(), shots.end()) != shots.end() || shots.front() == 0) {
        throw Error(ErrorKind::InvalidConfig, "shots must be positive and strictly ascending");
    }
    const std::size_t max_shots = shots.back();

    // Draws are taken sequentially so the episode list only depends on the seed.
    EpisodeSampler sampler(index, fold, max_shots, mode, seed);
    std::vector<EpisodeDraw> draws;
    draws.reserve(episodes);
    for (std::size_t i = 0; i < episodes; ++i) {
        draws.push_back(sampler.next());
    }

    std::vector<std::vector<EpisodeReport>> reports(shots.size(), std::vector<EpisodeReport>(episodes));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < episodes; i = next++) {
            try {
                const Episode full = load_episode(index, draws[i]);
                for (std::size_t s = 0; s < shots.size(); ++s) {
                    reports[s][i] = run_episode(full.with_shots(shots[s]), config);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(workers, episodes));
    if (n_threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    SweepResult result;
    result.fold = fold;
    for (std::size_t s = 0; s < shots.size(); ++s) {
        SweepRow row;
        row.shots = shots[s];
        double variance_sum = 0.0;
        for (const auto& rep : reports[s]) {
            row.accumulator.add(rep.class_id, rep.counts);
            variance_sum += rep.mean_variance;
        }
        const auto classes = row.accumulator.classes();
        row.miou = episodes == 0 ? 0.0 : miou(row.accumulator, classes);
        row.mean_variance = episodes == 0 ? 0.0 : variance_sum / static_cast<double>(episodes);
        row.episodes = std::move(reports[s]);
        result.rows.push_back(std::move(row));
    }
    return result;
}

}  // namespace gpfs
