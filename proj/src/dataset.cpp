#include "gpfs/dataset.hpp"

#include "gpfs/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace gpfs {

using nlohmann::json;

void DatasetIndex::validate() const {
    std::map<int, std::size_t> fold_of;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        for (int c : folds[f]) {
            if (!fold_of.emplace(c, f).second) {
                throw Error(ErrorKind::InvalidConfig, "class " + std::to_string(c) + " appears in more than one fold");
            }
        }
    }
    std::set<std::string> ids;
    for (const auto& e : entries) {
        if (!ids.insert(e.id).second) {
            throw Error(ErrorKind::InvalidConfig, "duplicate image id " + e.id);
        }
        for (const auto& [c, path] : e.masks) {
            if (!fold_of.contains(c)) {
                throw Error(ErrorKind::InvalidConfig,
                            "image " + e.id + " has class " + std::to_string(c) + " outside every fold");
            }
        }
    }
}

DatasetIndex read_index(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open index " + path.string());
    }
    DatasetIndex index;
    index.root = path.parent_path();
    try {
        const json doc = json::parse(in);
        index.folds = doc.at("folds").get<std::vector<std::vector<int>>>();
        for (const auto& item : doc.at("entries")) {
            DatasetEntry entry;
            entry.id = item.at("id").get<std::string>();
            entry.features = item.at("features").get<std::string>();
            for (const auto& [key, value] : item.at("masks").items()) {
                entry.masks.emplace(std::stoi(key), value.get<std::string>());
            }
            index.entries.push_back(std::move(entry));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, "malformed index " + path.string() + ": " + e.what());
    }
    index.validate();
    return index;
}

void write_index(const std::filesystem::path& path, const DatasetIndex& index) {
    json doc;
    doc["folds"] = index.folds;
    doc["entries"] = json::array();
    for (const auto& e : index.entries) {
        json masks = json::object();
        for (const auto& [c, p] : e.masks) {
            masks[std::to_string(c)] = p.generic_string();
        }
        doc["entries"].push_back({{"id", e.id}, {"features", e.features.generic_string()}, {"masks", masks}});
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::IoFailure, "cannot write index " + path.string());
    }
    out << doc.dump(1) << '\n';
}

EpisodeSampler::EpisodeSampler(const DatasetIndex& index, std::size_t test_fold, std::size_t shots,
                               SamplingMode mode, std::uint64_t seed)
    : index_(&index), shots_(shots), mode_(mode), rng_(seed) {
    if (test_fold >= index.folds.size()) {
        throw Error(ErrorKind::InvalidConfig, "test fold " + std::to_string(test_fold) + " does not exist");
    }
    if (shots == 0) {
        throw Error(ErrorKind::InvalidConfig, "shots must be positive");
    }
    for (int c : index.folds[test_fold]) {
        std::vector<std::size_t> images;
        for (std::size_t i = 0; i < index.entries.size(); ++i) {
            if (index.entries[i].contains(c)) images.push_back(i);
        }
        if (images.size() >= shots + 1) {
            eligible_.push_back(c);
            images_of_class_.emplace(c, std::move(images));
        }
    }
    if (eligible_.empty()) {
        throw Error(ErrorKind::InsufficientImages, "no class in fold " + std::to_string(test_fold) + " has " +
                                                       std::to_string(shots + 1) + " images");
    }
    for (std::size_t i = 0; i < index.entries.size(); ++i) {
        for (int c : eligible_) {
            if (index.entries[i].contains(c)) {
                query_candidates_.push_back(i);
                break;
            }
        }
    }
}

EpisodeDraw EpisodeSampler::next() {
    EpisodeDraw draw;
    if (mode_ == SamplingMode::Eval) {
        draw.query = query_candidates_[cursor_];
        cursor_ = (cursor_ + 1) % query_candidates_.size();
    } else {
        draw.query = query_candidates_[rng_.below(query_candidates_.size())];
    }

    std::vector<int> classes;
    for (int c : eligible_) {
        if (index_->entries[draw.query].contains(c)) classes.push_back(c);
    }
    draw.class_id = classes[rng_.below(classes.size())];

    std::vector<std::size_t> pool;
    for (std::size_t i : images_of_class_.at(draw.class_id)) {
        if (i != draw.query) pool.push_back(i);
    }
    // Partial Fisher-Yates: the first `shots_` slots become a uniform sample without replacement.
    for (std::size_t k = 0; k < shots_; ++k) {
        const std::size_t pick = k + rng_.below(pool.size() - k);
        std::swap(pool[k], pool[pick]);
    }
    draw.support.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(shots_));
    return draw;
}

Episode Episode::with_shots(std::size_t k) const {
    if (k > shots()) {
        throw Error(ErrorKind::InvalidConfig,
                    "episode has " + std::to_string(shots()) + " shots, asked for " + std::to_string(k));
    }
    Episode ep;
    ep.class_id = class_id;
    ep.query_id = query_id;
    ep.support_ids.assign(support_ids.begin(), support_ids.begin() + static_cast<std::ptrdiff_t>(k));
    ep.support_features.assign(support_features.begin(), support_features.begin() + static_cast<std::ptrdiff_t>(k));
    ep.support_masks.assign(support_masks.begin(), support_masks.begin() + static_cast<std::ptrdiff_t>(k));
    ep.query_features = query_features;
    ep.query_mask = query_mask;
    return ep;
}

Episode load_episode(const DatasetIndex& index, const EpisodeDraw& draw) {
    Episode ep;
    ep.class_id = draw.class_id;
    const auto& query = index.entries.at(draw.query);
    ep.query_id = query.id;
    ep.query_features = fmap_read(index.resolve(query.features));
    ep.query_mask = mask_read(index.resolve(query.masks.at(draw.class_id)));
    for (std::size_t i : draw.support) {
        const auto& entry = index.entries.at(i);
        ep.support_ids.push_back(entry.id);
        ep.support_features.push_back(fmap_read(index.resolve(entry.features)));
        ep.support_masks.push_back(mask_read(index.resolve(entry.masks.at(draw.class_id))));
    }
    return ep;
}

Episode sample_episode(const DatasetIndex& index, EpisodeSampler& sampler) {
    return load_episode(index, sampler.next());
}

void SynthConfig::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); };
    if (n_classes < 2) fail("n_classes must be at least 2");
    if (n_folds < 1 || n_folds > n_classes) fail("n_folds must lie in [1, n_classes]");
    if (images_per_class < 2) fail("images_per_class must be at least 2");
    if (height < 2 || width < 2 || height % 2 != 0 || width % 2 != 0) fail("height and width must be even and >= 2");
    if (dim < 1) fail("dim must be positive");
    if (stride < 1) fail("stride must be positive");
    if (prototypes_per_class < 1) fail("prototypes_per_class must be positive");
    if (background_components < 1) fail("background_components must be positive");
    if (!std::isfinite(separation) || separation <= 0.0) fail("separation must be positive");
    if (!std::isfinite(noise) || noise < 0.0) fail("noise must be non-negative");
    if (!(second_class_prob >= 0.0 && second_class_prob <= 1.0)) fail("second_class_prob must lie in [0, 1]");
}

namespace {

std::vector<double> random_direction(Rng& rng, std::size_t dim, double norm) {
    std::vector<double> v(dim);
    double sq = 0.0;
    do {
        sq = 0.0;
        for (double& x : v) {
            x = rng.normal();
            sq += x * x;
        }
    } while (sq == 0.0);
    const double scale = norm / std::sqrt(sq);
    for (double& x : v) x *= scale;
    return v;
}

std::vector<std::uint8_t> random_blob(Rng& rng, std::size_t h, std::size_t w) {
    const double cy = static_cast<double>(rng.below(h));
    const double cx = static_cast<double>(rng.below(w));
    const double ry = std::max(1.0, rng.uniform(0.15, 0.35) * static_cast<double>(h));
    const double rx = std::max(1.0, rng.uniform(0.15, 0.35) * static_cast<double>(w));
    std::vector<std::uint8_t> cells(h * w, 0);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const double dy = (static_cast<double>(r) - cy) / ry;
            const double dx = (static_cast<double>(c) - cx) / rx;
            if (dy * dy + dx * dx <= 1.0) cells[r * w + c] = 1;
        }
    }
    return cells;
}

std::string image_id(std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "img_%05zu", k);
    return buf;
}

}  // namespace

DatasetIndex synth_dataset(const SynthConfig& config, std::uint64_t seed, const std::filesystem::path& dir) {
    config.validate();
    std::filesystem::create_directories(dir / "features");
    std::filesystem::create_directories(dir / "masks");
    Rng rng(seed);

    std::vector<std::vector<std::vector<double>>> prototypes(config.n_classes);
    for (auto& modes : prototypes) {
        for (std::size_t m = 0; m < config.prototypes_per_class; ++m) {
            modes.push_back(random_direction(rng, config.dim, config.separation));
        }
    }
    std::vector<std::vector<double>> background;
    for (std::size_t b = 0; b < config.background_components; ++b) {
        background.push_back(random_direction(rng, config.dim, config.separation));
    }

    DatasetIndex index;
    index.root = dir;
    index.folds.resize(config.n_folds);
    for (std::size_t c = 0; c < config.n_classes; ++c) {
        index.folds[c % config.n_folds].push_back(static_cast<int>(c));
    }

    const std::size_t h = config.height;
    const std::size_t w = config.width;
    const double noise_scale = config.noise / std::sqrt(static_cast<double>(config.dim));
    std::size_t next_id = 0;
    for (std::size_t primary = 0; primary < config.n_classes; ++primary) {
        for (std::size_t img = 0; img < config.images_per_class; ++img) {
            DatasetEntry entry;
            entry.id = image_id(next_id++);

            // label 0 is background, otherwise class + 1. The primary class is painted last.
            std::vector<int> label(h * w, 0);
            std::vector<std::size_t> present;
            if (rng.uniform() < config.second_class_prob) {
                const std::size_t other = (primary + 1 + rng.below(config.n_classes - 1)) % config.n_classes;
                present.push_back(other);
            }
            present.push_back(primary);
            for (std::size_t c : present) {
                const auto blob = random_blob(rng, h, w);
                for (std::size_t k = 0; k < h * w; ++k) {
                    if (blob[k]) label[k] = static_cast<int>(c) + 1;
                }
            }
            std::map<std::size_t, std::size_t> mode_of;
            for (std::size_t c : present) {
                mode_of[c] = rng.below(config.prototypes_per_class);
            }

            FeatureMap fm;
            fm.h = static_cast<std::uint32_t>(h);
            fm.w = static_cast<std::uint32_t>(w);
            fm.d = static_cast<std::uint32_t>(config.dim);
            fm.stride = config.stride;
            fm.dtype = config.dtype;
            fm.data = Matrix(h * w, config.dim);
            for (std::size_t k = 0; k < h * w; ++k) {
                const std::vector<double>& centre =
                    label[k] == 0 ? background[rng.below(background.size())]
                                  : prototypes[static_cast<std::size_t>(label[k] - 1)]
                                              [mode_of.at(static_cast<std::size_t>(label[k] - 1))];
                auto row = fm.data.row(k);
                for (std::size_t j = 0; j < config.dim; ++j) {
                    double v = centre[j] + noise_scale * rng.normal();
                    if (config.dtype == FmapDtype::Float32) v = static_cast<double>(static_cast<float>(v));
                    row[j] = v;
                }
            }
            entry.features = std::filesystem::path("features") / (entry.id + ".fmap");
            fmap_write(dir / entry.features, fm);

            for (std::size_t c : present) {
                MaskMap mask;
                mask.h = fm.h;
                mask.w = fm.w;
                mask.data.resize(h * w);
                for (std::size_t k = 0; k < h * w; ++k) {
                    mask.data[k] = label[k] == static_cast<int>(c) + 1 ? 1 : 0;
                }
                if (mask.foreground() == 0) continue;  // fully covered by the primary blob
                auto rel = std::filesystem::path("masks") / (entry.id + "_c" + std::to_string(c) + ".msk");
                mask_write(dir / rel, mask);
                entry.masks.emplace(static_cast<int>(c), rel);
            }
            index.entries.push_back(std::move(entry));
        }
    }
    write_index(dir / "index.json", index);
    return index;
}

}  // namespace gpfs
