#include "gpfs/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace gpfs {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& prefix, std::initializer_list<const char*> known) {
    if (!obj.is_object()) {
        throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
    }
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError(prefix.empty() ? key : prefix + "." + key, "unknown key");
        }
    }
}

template <typename T>
T get_as(const json& value, const std::string& field) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(field, "wrong type");
    }
}

std::size_t get_count(const json& value, const std::string& field) {
    if (!value.is_number_integer() || value.get<long long>() < 0) {
        throw ConfigError(field, "expected a non-negative integer");
    }
    return value.get<std::size_t>();
}

double get_real(const json& value, const std::string& field) {
    if (!value.is_number()) {
        throw ConfigError(field, "expected a number");
    }
    return value.get<double>();
}

std::vector<std::size_t> get_counts(const json& value, const std::string& field) {
    if (!value.is_array()) {
        throw ConfigError(field, "expected an array of integers");
    }
    std::vector<std::size_t> out;
    for (const auto& item : value) out.push_back(get_count(item, field));
    return out;
}

template <typename Fn>
void maybe(const json& obj, const char* key, Fn&& fn) {
    if (const auto it = obj.find(key); it != obj.end()) fn(*it);
}

void parse_synthetic(const json& obj, SynthConfig& s) {
    const std::string p = "dataset.synthetic";
    reject_unknown(obj, p,
                   {"n_classes", "n_folds", "images_per_class", "height", "width", "dim", "stride",
                    "prototypes_per_class", "background_components", "separation", "noise", "second_class_prob",
                    "dtype"});
    maybe(obj, "n_classes", [&](const json& v) { s.n_classes = get_count(v, p + ".n_classes"); });
    maybe(obj, "n_folds", [&](const json& v) { s.n_folds = get_count(v, p + ".n_folds"); });
    maybe(obj, "images_per_class", [&](const json& v) { s.images_per_class = get_count(v, p + ".images_per_class"); });
    maybe(obj, "height", [&](const json& v) { s.height = get_count(v, p + ".height"); });
    maybe(obj, "width", [&](const json& v) { s.width = get_count(v, p + ".width"); });
    maybe(obj, "dim", [&](const json& v) { s.dim = get_count(v, p + ".dim"); });
    maybe(obj, "stride", [&](const json& v) { s.stride = static_cast<std::uint32_t>(get_count(v, p + ".stride")); });
    maybe(obj, "prototypes_per_class",
          [&](const json& v) { s.prototypes_per_class = get_count(v, p + ".prototypes_per_class"); });
    maybe(obj, "background_components",
          [&](const json& v) { s.background_components = get_count(v, p + ".background_components"); });
    maybe(obj, "separation", [&](const json& v) { s.separation = get_real(v, p + ".separation"); });
    maybe(obj, "noise", [&](const json& v) { s.noise = get_real(v, p + ".noise"); });
    maybe(obj, "second_class_prob", [&](const json& v) { s.second_class_prob = get_real(v, p + ".second_class_prob"); });
    maybe(obj, "dtype", [&](const json& v) {
        const auto name = get_as<std::string>(v, p + ".dtype");
        if (name == "float32") {
            s.dtype = FmapDtype::Float32;
        } else if (name == "float64") {
            s.dtype = FmapDtype::Float64;
        } else {
            throw ConfigError(p + ".dtype", "expected float32 or float64, got '" + name + "'");
        }
    });
}

void parse_kernel(const json& v, RunConfig& c) {
    auto set_family = [&](const json& name_json, const std::string& field) {
        const auto name = get_as<std::string>(name_json, field);
        const auto family = parse_kernel_family(name);
        if (!family) throw ConfigError(field, "unknown kernel '" + name + "' (expected se, rq or linear)");
        c.kernel_family = *family;
    };
    if (v.is_string()) {
        set_family(v, "kernel");
        return;
    }
    reject_unknown(v, "kernel", {"family", "sigma_f_sq", "length_sq", "alpha"});
    maybe(v, "family", [&](const json& f) { set_family(f, "kernel.family"); });
    maybe(v, "sigma_f_sq", [&](const json& f) { c.sigma_f_sq = get_real(f, "kernel.sigma_f_sq"); });
    maybe(v, "alpha", [&](const json& f) { c.alpha = get_real(f, "kernel.alpha"); });
    maybe(v, "length_sq", [&](const json& f) {
        if (f.is_string() && f.get<std::string>() == "auto") {
            c.length_sq.reset();
        } else {
            c.length_sq = get_real(f, "kernel.length_sq");
        }
    });
}

}  // namespace

void RunConfig::validate() const {
    if (synthetic.has_value() == index_path.has_value()) {
        throw ConfigError("dataset", "exactly one of 'synthetic' or 'index' is required");
    }
    if (synthetic) {
        try {
            synthetic->validate();
        } catch (const Error& e) {
            throw ConfigError("dataset.synthetic", e.what());
        }
    }
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(sigma_f_sq)) throw ConfigError("kernel.sigma_f_sq", "must be positive");
    if (length_sq && !positive(*length_sq)) throw ConfigError("kernel.length_sq", "must be positive or \"auto\"");
    if (!positive(alpha)) throw ConfigError("kernel.alpha", "must be positive");
    if (!std::isfinite(noise_sq) || noise_sq < 0.0) throw ConfigError("noise_sq", "must be non-negative");
    if (shots.empty()) throw ConfigError("shots", "must not be empty");
    for (std::size_t i = 0; i < shots.size(); ++i) {
        if (shots[i] == 0 || (i > 0 && shots[i] <= shots[i - 1])) {
            throw ConfigError("shots", "must be positive and strictly ascending");
        }
    }
    if (episodes_per_shot == 0) throw ConfigError("episodes_per_shot", "must be positive");
    if (folds.empty()) throw ConfigError("folds", "must not be empty");
    if (synthetic) {
        for (std::size_t f : folds) {
            if (f >= synthetic->n_folds) throw ConfigError("folds", "fold " + std::to_string(f) + " does not exist");
        }
        if (synthetic->images_per_class < shots.back() + 1) {
            throw ConfigError("dataset.synthetic.images_per_class", "must exceed the largest shot count");
        }
    }
    if (encoder == MaskEncoderKind::RandomFeatures && encoder_dim == 0) {
        throw ConfigError("mask_encoder.dim", "must be positive");
    }
    if (!std::isfinite(threshold)) throw ConfigError("threshold", "must be finite");
    if (workers == 0) throw ConfigError("workers", "must be positive");
    if (bench.dim == 0) throw ConfigError("bench.dim", "must be positive");
    if (bench.grid == 0) throw ConfigError("bench.grid", "must be positive");
    if (bench.shots.empty() || std::find(bench.shots.begin(), bench.shots.end(), 0) != bench.shots.end()) {
        throw ConfigError("bench.shots", "must be non-empty and positive");
    }
    if (bench.queries == 0) throw ConfigError("bench.queries", "must be positive");
    if (bench.repetitions == 0) throw ConfigError("bench.repetitions", "must be positive");
    if (verify.instances == 0) throw ConfigError("verify.instances", "must be positive");
}

KernelSpec RunConfig::kernel_for(std::size_t dim) const {
    return {kernel_family, sigma_f_sq, length_sq.value_or(default_length_sq(dim)), alpha};
}

PipelineConfig RunConfig::pipeline_for(std::size_t dim) const {
    PipelineConfig p;
    p.kernel = kernel_for(dim);
    p.noise_sq = noise_sq;
    p.layout = layout;
    p.encoder = encoder;
    p.encoder_dim = encoder_dim;
    p.encoder_seed = derive_seed(seed, 0xE);
    p.downsample_support = downsample_support;
    p.downsample_query = downsample_query;
    p.threshold = threshold;
    return p;
}

RunConfig parse_config(const json& doc) {
    RunConfig c;
    reject_unknown(doc, "",
                   {"dataset", "kernel", "noise_sq", "shots", "episodes_per_shot", "folds", "z_layout", "mask_encoder",
                    "downsample_support", "downsample_query", "threshold", "sampling", "seed", "workers", "output",
                    "bench", "verify"});
    maybe(doc, "dataset", [&](const json& v) {
        reject_unknown(v, "dataset", {"synthetic", "index"});
        if (v.contains("synthetic") && v.contains("index")) {
            throw ConfigError("dataset", "give either 'synthetic' or 'index', not both");
        }
        if (v.contains("index")) {
            c.synthetic.reset();
            c.index_path = get_as<std::string>(v.at("index"), "dataset.index");
        } else if (v.contains("synthetic")) {
            parse_synthetic(v.at("synthetic"), *c.synthetic);
        }
    });
    maybe(doc, "kernel", [&](const json& v) { parse_kernel(v, c); });
    maybe(doc, "noise_sq", [&](const json& v) { c.noise_sq = get_real(v, "noise_sq"); });
    maybe(doc, "shots", [&](const json& v) { c.shots = get_counts(v, "shots"); });
    maybe(doc, "episodes_per_shot", [&](const json& v) { c.episodes_per_shot = get_count(v, "episodes_per_shot"); });
    maybe(doc, "folds", [&](const json& v) { c.folds = get_counts(v, "folds"); });
    maybe(doc, "z_layout", [&](const json& v) {
        const auto name = get_as<std::string>(v, "z_layout");
        const auto layout = parse_z_layout(name);
        if (!layout) throw ConfigError("z_layout", "unknown layout '" + name + "'");
        c.layout = *layout;
    });
    maybe(doc, "mask_encoder", [&](const json& v) {
        reject_unknown(v, "mask_encoder", {"kind", "dim"});
        maybe(v, "kind", [&](const json& k) {
            const auto name = get_as<std::string>(k, "mask_encoder.kind");
            if (name == "avgpool") {
                c.encoder = MaskEncoderKind::AvgPool;
            } else if (name == "random_features") {
                c.encoder = MaskEncoderKind::RandomFeatures;
            } else {
                throw ConfigError("mask_encoder.kind", "unknown encoder '" + name + "'");
            }
        });
        maybe(v, "dim", [&](const json& d) { c.encoder_dim = get_count(d, "mask_encoder.dim"); });
    });
    maybe(doc, "downsample_support", [&](const json& v) { c.downsample_support = get_as<bool>(v, "downsample_support"); });
    maybe(doc, "downsample_query", [&](const json& v) { c.downsample_query = get_as<bool>(v, "downsample_query"); });
    maybe(doc, "threshold", [&](const json& v) { c.threshold = get_real(v, "threshold"); });
    maybe(doc, "sampling", [&](const json& v) {
        const auto name = get_as<std::string>(v, "sampling");
        if (name == "eval") {
            c.sampling = SamplingMode::Eval;
        } else if (name == "train") {
            c.sampling = SamplingMode::Train;
        } else {
            throw ConfigError("sampling", "expected eval or train, got '" + name + "'");
        }
    });
    maybe(doc, "seed", [&](const json& v) { c.seed = get_count(v, "seed"); });
    maybe(doc, "workers", [&](const json& v) { c.workers = get_count(v, "workers"); });
    maybe(doc, "output", [&](const json& v) {
        reject_unknown(v, "output", {"report", "sweep", "timings"});
        maybe(v, "report", [&](const json& f) { c.report_file = get_as<std::string>(f, "output.report"); });
        maybe(v, "sweep", [&](const json& f) { c.sweep_file = get_as<std::string>(f, "output.sweep"); });
        maybe(v, "timings", [&](const json& f) { c.timings_file = get_as<std::string>(f, "output.timings"); });
    });
    maybe(doc, "bench", [&](const json& v) {
        reject_unknown(v, "bench", {"dim", "grid", "shots", "queries", "repetitions"});
        maybe(v, "dim", [&](const json& f) { c.bench.dim = get_count(f, "bench.dim"); });
        maybe(v, "grid", [&](const json& f) { c.bench.grid = get_count(f, "bench.grid"); });
        maybe(v, "shots", [&](const json& f) { c.bench.shots = get_counts(f, "bench.shots"); });
        maybe(v, "queries", [&](const json& f) { c.bench.queries = get_count(f, "bench.queries"); });
        maybe(v, "repetitions", [&](const json& f) { c.bench.repetitions = get_count(f, "bench.repetitions"); });
    });
    maybe(doc, "verify", [&](const json& v) {
        reject_unknown(v, "verify", {"instances"});
        maybe(v, "instances", [&](const json& f) { c.verify.instances = get_count(f, "verify.instances"); });
    });
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("--config", "cannot open " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

json config_to_json(const RunConfig& c, std::optional<std::size_t> dim) {
    json doc;
    if (c.synthetic) {
        const SynthConfig& s = *c.synthetic;
        doc["dataset"]["synthetic"] = {
            {"n_classes", s.n_classes},
            {"n_folds", s.n_folds},
            {"images_per_class", s.images_per_class},
            {"height", s.height},
            {"width", s.width},
            {"dim", s.dim},
            {"stride", s.stride},
            {"prototypes_per_class", s.prototypes_per_class},
            {"background_components", s.background_components},
            {"separation", s.separation},
            {"noise", s.noise},
            {"second_class_prob", s.second_class_prob},
            {"dtype", s.dtype == FmapDtype::Float32 ? "float32" : "float64"},
        };
    } else {
        doc["dataset"]["index"] = c.index_path->generic_string();
    }
    json kernel = {{"family", std::string(to_string(c.kernel_family))},
                   {"sigma_f_sq", c.sigma_f_sq},
                   {"alpha", c.alpha}};
    if (c.length_sq) {
        kernel["length_sq"] = *c.length_sq;
    } else if (dim) {
        kernel["length_sq"] = default_length_sq(*dim);
    } else {
        kernel["length_sq"] = "auto";
    }
    doc["kernel"] = kernel;
    doc["noise_sq"] = c.noise_sq;
    doc["shots"] = c.shots;
    doc["episodes_per_shot"] = c.episodes_per_shot;
    doc["folds"] = c.folds;
    doc["z_layout"] = std::string(to_string(c.layout));
    doc["mask_encoder"] = {{"kind", c.encoder == MaskEncoderKind::AvgPool ? "avgpool" : "random_features"},
                           {"dim", c.encoder_dim}};
    doc["downsample_support"] = c.downsample_support;
    doc["downsample_query"] = c.downsample_query;
    doc["threshold"] = c.threshold;
    doc["sampling"] = c.sampling == SamplingMode::Eval ? "eval" : "train";
    doc["seed"] = c.seed;
    doc["workers"] = c.workers;
    doc["output"] = {{"report", c.report_file}, {"sweep", c.sweep_file}, {"timings", c.timings_file}};
    doc["bench"] = {{"dim", c.bench.dim},
                    {"grid", c.bench.grid},
                    {"shots", c.bench.shots},
                    {"queries", c.bench.queries},
                    {"repetitions", c.bench.repetitions}};
    doc["verify"] = {{"instances", c.verify.instances}};
    return doc;
}

}  // namespace gpfs
