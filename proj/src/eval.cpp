#include "gpfs/eval.hpp"

#include "gpfs/error.hpp"

#include <numeric>
#include <string>

namespace gpfs {

SegPrediction threshold_readout(const ZRepresentation& z, double tau) {
    if (z.layout == ZLayout::MeanCovWindow) {
        throw Error(ErrorKind::IncompatibleLayout, "threshold readout expects a mean or mean_var representation");
    }
    if (z.encoding_dim == 0) {
        throw Error(ErrorKind::IncompatibleLayout, "representation has no mean channel");
    }
    SegPrediction pred{z.height, z.width, std::vector<std::uint8_t>(z.values.rows(), 0)};
    for (std::size_t j = 0; j < z.values.rows(); ++j) {
        pred.data[j] = z.values(j, 0) > tau ? 1 : 0;
    }
    return pred;
}

IouCounts iou_counts(const SegPrediction& pred, const MaskMap& gt) {
    if (pred.h != gt.h || pred.w != gt.w || pred.data.size() != gt.data.size()) {
        throw Error(ErrorKind::ShapeMismatch, "prediction " + std::to_string(pred.h) + "x" + std::to_string(pred.w) +
                                                  " vs ground truth " + std::to_string(gt.h) + "x" +
                                                  std::to_string(gt.w));
    }
    IouCounts counts;
    for (std::size_t k = 0; k < pred.data.size(); ++k) {
        const bool p = pred.data[k] != 0;
        const bool g = gt.data[k] != 0;
        counts.intersection += (p && g) ? 1 : 0;
        counts.union_ += (p || g) ? 1 : 0;
    }
    return counts;
}

void ClassAccumulator::merge(const ClassAccumulator& other) {
    for (const auto& [c, counts] : other.counts_) {
        counts_[c] += counts;
    }
}

std::vector<int> ClassAccumulator::classes() const {
    std::vector<int> out;
    out.reserve(counts_.size());
    for (const auto& [c, counts] : counts_) out.push_back(c);
    return out;
}

ClassAccumulator accumulate_iou(ClassAccumulator acc, const SegPrediction& pred, const MaskMap& gt, int class_id) {
    acc.add(class_id, iou_counts(pred, gt));
    return acc;
}

double miou(const ClassAccumulator& acc, std::span<const int> classes) {
    if (classes.empty()) {
        throw Error(ErrorKind::EmptyClass, "no classes to average");
    }
    double sum = 0.0;
    for (int c : classes) {
        const auto it = acc.counts().find(c);
        if (it == acc.counts().end() || it->second.union_ == 0) {
            throw Error(ErrorKind::EmptyClass, "class " + std::to_string(c) + " has an empty union");
        }
        sum += it->second.ratio();
    }
    return sum / static_cast<double>(classes.size());
}

double mean_over_folds(std::span<const double> fold_scores) {
    if (fold_scores.empty()) return 0.0;
    return std::accumulate(fold_scores.begin(), fold_scores.end(), 0.0) / static_cast<double>(fold_scores.size());
}

}  // namespace gpfs
