#pragma once

#include "gpfs/episode.hpp"
#include "gpfs/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gpfs {

/// One image: its feature map and one binary mask per class it contains.
struct DatasetEntry {
    std::string id;
    std::filesystem::path features;
    std::map<int, std::filesystem::path> masks;

    [[nodiscard]] bool contains(int class_id) const { return masks.contains(class_id); }
};

/// Image list plus a partition of the class ids into folds. Paths are
/// resolved against `root`.
struct DatasetIndex {
    std::filesystem::path root;
    std::vector<DatasetEntry> entries;
    std::vector<std::vector<int>> folds;

    /// Throws InvalidConfig when ids repeat, a class sits in several folds, or
    /// an entry references a class that belongs to no fold.
    void validate() const;

    [[nodiscard]] std::filesystem::path resolve(const std::filesystem::path& p) const {
        return p.is_absolute() ? p : root / p;
    }
};

// index.json: {"folds": [[class ids]...], "entries": [{"id", "features", "masks": {"<class>": path}}]}
[[nodiscard]] DatasetIndex read_index(const std::filesystem::path& path);
void write_index(const std::filesystem::path& path, const DatasetIndex& index);

enum class SamplingMode { Train, Eval };

/// Entry indices of one episode. `support` is ordered; the first k entries form
/// the k-shot support, so smaller shot counts are nested in larger ones.
struct EpisodeDraw {
    int class_id = 0;
    std::size_t query = 0;
    std::vector<std::size_t> support;
};

/// Draws episodes from the classes of one test fold.
///
/// Eval mode walks the candidate query images in dataset order (wrapping
/// around); train mode picks the query uniformly among them. The class is then
/// drawn uniformly from the query's eligible classes and the support uniformly
/// without replacement from the other images of that class, so the query is
/// never in its support and no support image repeats.
class EpisodeSampler {
public:
    EpisodeSampler(const DatasetIndex& index, std::size_t test_fold, std::size_t shots, SamplingMode mode,
                   std::uint64_t seed);

    [[nodiscard]] EpisodeDraw next();

    /// Classes of the test fold with at least shots + 1 images.
    [[nodiscard]] const std::vector<int>& eligible_classes() const noexcept { return eligible_; }

private:
    const DatasetIndex* index_;
    std::size_t shots_;
    SamplingMode mode_;
    Rng rng_;
    std::vector<int> eligible_;
    std::map<int, std::vector<std::size_t>> images_of_class_;
    std::vector<std::size_t> query_candidates_;
    std::size_t cursor_ = 0;
};

struct Episode {
    int class_id = 0;
    std::string query_id;
    std::vector<std::string> support_ids;
    std::vector<FeatureMap> support_features;
    std::vector<MaskMap> support_masks;
    FeatureMap query_features;
    MaskMap query_mask;

    [[nodiscard]] std::size_t shots() const noexcept { return support_features.size(); }
    /// Copy keeping only the first `k` support examples.
    [[nodiscard]] Episode with_shots(std::size_t k) const;
};

[[nodiscard]] Episode load_episode(const DatasetIndex& index, const EpisodeDraw& draw);

/// Draw one episode and load its files.
[[nodiscard]] Episode sample_episode(const DatasetIndex& index, EpisodeSampler& sampler);

/// Desk-scale stand-in for frozen encoders. Each class owns `prototypes_per_class`
/// random directions of norm `separation`; each image picks one of them per class
/// and its foreground cells scatter around it with noise of norm ≈ `noise`.
/// Background cells draw from a shared mixture of `background_components` centres.
struct SynthConfig {
    std::size_t n_classes = 8;
    std::size_t n_folds = 4;
    std::size_t images_per_class = 12;
    std::size_t height = 28;
    std::size_t width = 28;
    std::size_t dim = 64;
    std::uint32_t stride = 16;
    std::size_t prototypes_per_class = 1;
    std::size_t background_components = 4;
    double separation = 4.0;
    double noise = 1.0;
    double second_class_prob = 0.25;
    FmapDtype dtype = FmapDtype::Float32;

    void validate() const;
};

/// Writes features/, masks/ and index.json under `dir`; returns the index.
DatasetIndex synth_dataset(const SynthConfig& config, std::uint64_t seed, const std::filesystem::path& dir);

}  // namespace gpfs
