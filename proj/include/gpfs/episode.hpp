#pragma once

#include "gpfs/kernel.hpp"
#include "gpfs/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace gpfs {

/// Storage precision of an FMAP payload; the in-memory values are always doubles.
enum class FmapDtype : std::uint32_t { Float32 = 0, Float64 = 1 };

/// Spatial grid of d-dimensional features. Row (r * w + c) of `data` is the
/// feature vector of cell (r, c).
struct FeatureMap {
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    std::uint32_t d = 0;
    std::uint32_t stride = 16;
    FmapDtype dtype = FmapDtype::Float32;
    Matrix data;

    [[nodiscard]] std::size_t cells() const noexcept { return std::size_t{h} * w; }
    [[nodiscard]] FeatureSet features() const { return FeatureSet(data); }
};

/// Binary annotation grid, row-major, values exactly 0 or 1.
struct MaskMap {
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    std::vector<std::uint8_t> data;

    [[nodiscard]] std::uint8_t at(std::size_t r, std::size_t c) const noexcept { return data[r * w + c]; }
    [[nodiscard]] std::size_t foreground() const noexcept;
};

/// Mask encoding on a feature grid: one E-dimensional row per cell.
struct EncodedMask {
    std::size_t h = 0;
    std::size_t w = 0;
    Matrix data;

    [[nodiscard]] std::size_t dim() const noexcept { return data.cols(); }
};

// FMAP: "FMAP", u32 version=1, u32 h, w, d, stride, dtype; then h*w*d values, all little-endian.
// MSK0: "MSK0", u32 version=1, u32 h, w; then h*w bytes of {0,1}.
inline constexpr std::uint32_t kFmapVersion = 1;
inline constexpr std::uint32_t kMaskVersion = 1;

[[nodiscard]] std::vector<std::uint8_t> encode_fmap(const FeatureMap& fm);
[[nodiscard]] FeatureMap decode_fmap(std::span<const std::uint8_t> bytes);
[[nodiscard]] std::vector<std::uint8_t> encode_mask(const MaskMap& mask);
[[nodiscard]] MaskMap decode_mask(std::span<const std::uint8_t> bytes);

[[nodiscard]] FeatureMap fmap_read(const std::filesystem::path& path);
void fmap_write(const std::filesystem::path& path, const FeatureMap& fm);
[[nodiscard]] MaskMap mask_read(const std::filesystem::path& path);
void mask_write(const std::filesystem::path& path, const MaskMap& mask);

/// 2×2 average pooling; doubles the stride.
[[nodiscard]] FeatureMap downsample_half(const FeatureMap& fm);

/// Foreground fraction of each source block (E = 1).
[[nodiscard]] EncodedMask encode_mask_avgpool(const MaskMap& mask, std::size_t target_h, std::size_t target_w);

/// Applies `weights` (E × block area) to each flattened source block.
[[nodiscard]] EncodedMask encode_mask_linear(const MaskMap& mask, std::size_t target_h, std::size_t target_w,
                                             const Matrix& weights);

/// Linear encoder with N(0, 1/area) weights drawn from `seed`.
[[nodiscard]] EncodedMask encode_mask_random_features(const MaskMap& mask, std::size_t target_h,
                                                      std::size_t target_w, std::size_t e, std::uint64_t seed);

/// Ground truth at a coarser grid: a cell is foreground iff more than half of its block is.
[[nodiscard]] MaskMap mask_to_grid(const MaskMap& mask, std::size_t target_h, std::size_t target_w);

}  // namespace gpfs
