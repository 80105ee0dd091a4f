#pragma once

#include "gpfs/episode.hpp"
#include "gpfs/gp.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace gpfs {

/// Binary prediction on the query feature grid.
struct SegPrediction {
    std::size_t h = 0;
    std::size_t w = 0;
    std::vector<std::uint8_t> data;
};

inline constexpr double kDefaultThreshold = 0.5;

/// Foreground iff the first mean channel exceeds `tau`; ties go to background.
/// Only the MeanOnly and MeanVar layouts are accepted.
[[nodiscard]] SegPrediction threshold_readout(const ZRepresentation& z, double tau = kDefaultThreshold);

struct IouCounts {
    std::uint64_t intersection = 0;
    std::uint64_t union_ = 0;

    [[nodiscard]] double ratio() const noexcept {
        return union_ == 0 ? 0.0 : static_cast<double>(intersection) / static_cast<double>(union_);
    }
    IouCounts& operator+=(const IouCounts& o) noexcept {
        intersection += o.intersection;
        union_ += o.union_;
        return *this;
    }
    friend bool operator==(const IouCounts&, const IouCounts&) = default;
};

[[nodiscard]] IouCounts iou_counts(const SegPrediction& pred, const MaskMap& gt);

/// Per-class intersection and union summed over every episode of a fold.
class ClassAccumulator {
public:
    void add(int class_id, const IouCounts& counts) { counts_[class_id] += counts; }
    void merge(const ClassAccumulator& other);

    [[nodiscard]] const std::map<int, IouCounts>& counts() const noexcept { return counts_; }
    [[nodiscard]] std::vector<int> classes() const;

    friend bool operator==(const ClassAccumulator&, const ClassAccumulator&) = default;

private:
    std::map<int, IouCounts> counts_;
};

[[nodiscard]] ClassAccumulator accumulate_iou(ClassAccumulator acc, const SegPrediction& pred, const MaskMap& gt,
                                              int class_id);

/// Mean over `classes` of intersection / union. Throws EmptyClass when a listed
/// class has no union.
[[nodiscard]] double miou(const ClassAccumulator& acc, std::span<const int> classes);

/// Arithmetic mean of per-fold scores.
[[nodiscard]] double mean_over_folds(std::span<const double> fold_scores);

struct EpisodeReport {
    int class_id = 0;
    std::size_t shots = 0;
    std::string query_id;
    std::vector<std::string> support_ids;
    IouCounts counts;
    double mean_variance = 0.0;
    double max_variance = 0.0;
    double jitter = 0.0;
    double fit_ms = 0.0;
    double predict_ms = 0.0;
    double total_ms = 0.0;
};

}  // namespace gpfs
