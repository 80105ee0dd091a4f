#pragma once

#include "gpfs/dataset.hpp"
#include "gpfs/error.hpp"
#include "gpfs/pipeline.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gpfs {

/// Invalid configuration value; `field()` is the dotted path of the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(ErrorKind::InvalidConfig, "field '" + field + "': " + what), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct BenchConfig {
    std::size_t dim = 512;
    std::size_t grid = 16;  // stride-32 grid of a 512×512 image
    std::vector<std::size_t> shots = {1, 5};
    std::size_t queries = 256;
    std::size_t repetitions = 100;
};

struct VerifyConfig {
    std::size_t instances = 200;
};

/// Everything a CLI invocation needs. Defaults: σ_y² = 0.01, σ_f² = 1, ℓ² = √D.
struct RunConfig {
    std::optional<SynthConfig> synthetic = SynthConfig{};
    std::optional<std::filesystem::path> index_path;

    KernelFamily kernel_family = KernelFamily::SquaredExponential;
    double sigma_f_sq = 1.0;
    std::optional<double> length_sq;  // nullopt → √D
    double alpha = 1.0;
    double noise_sq = 0.01;

    std::vector<std::size_t> shots = {1, 2, 3, 5, 10};
    std::size_t episodes_per_shot = 50;
    std::vector<std::size_t> folds = {0};
    ZLayout layout = ZLayout::MeanVar;
    MaskEncoderKind encoder = MaskEncoderKind::AvgPool;
    std::size_t encoder_dim = 16;
    bool downsample_support = true;
    bool downsample_query = false;
    double threshold = kDefaultThreshold;
    SamplingMode sampling = SamplingMode::Eval;
    std::uint64_t seed = 1;
    std::size_t workers = 1;

    std::string report_file = "report.json";
    std::string sweep_file = "sweep.csv";
    std::string timings_file = "timings.json";

    BenchConfig bench;
    VerifyConfig verify;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;

    /// Kernel with ℓ² resolved for feature dimension `dim`.
    [[nodiscard]] KernelSpec kernel_for(std::size_t dim) const;
    [[nodiscard]] PipelineConfig pipeline_for(std::size_t dim) const;
};

/// Parses a config document; unknown keys are rejected. Throws ConfigError.
[[nodiscard]] RunConfig parse_config(const nlohmann::json& doc);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved config, defaults included. `dim` resolves the automatic ℓ².
[[nodiscard]] nlohmann::json config_to_json(const RunConfig& config, std::optional<std::size_t> dim = std::nullopt);

}  // namespace gpfs
