#include "gpfs/episode.hpp"

#include "gpfs/error.hpp"
#include "gpfs/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace gpfs {

namespace {

constexpr std::size_t kFmapHeaderBytes = 4 + 6 * 4;
constexpr std::size_t kMaskHeaderBytes = 4 + 3 * 4;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) {
        out.push_back(static_cast<std::uint8_t>(v >> shift));
    }
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int shift = 0; shift < 64; shift += 8) {
        out.push_back(static_cast<std::uint8_t>(v >> shift));
    }
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
    std::uint32_t v = 0;
    for (int b = 3; b >= 0; --b) {
        v = (v << 8) | in[at + static_cast<std::size_t>(b)];
    }
    return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t at) {
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) {
        v = (v << 8) | in[at + static_cast<std::size_t>(b)];
    }
    return v;
}

void check_magic(std::span<const std::uint8_t> bytes, const char* magic) {
    if (bytes.size() < 4) {
        throw Error(ErrorKind::TruncatedFile, "file shorter than its magic bytes");
    }
    if (std::memcmp(bytes.data(), magic, 4) != 0) {
        throw Error(ErrorKind::BadMagic, std::string("expected magic ") + magic);
    }
}

void check_payload(std::size_t have, std::uint64_t want) {
    if (have < want) {
        throw Error(ErrorKind::TruncatedFile,
                    "expected " + std::to_string(want) + " bytes, found " + std::to_string(have));
    }
    if (have > want) {
        throw Error(ErrorKind::TrailingBytes, std::to_string(have - want) + " bytes after payload");
    }
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
    }
}

void check_divisible(std::size_t h, std::size_t w, std::size_t th, std::size_t tw) {
    if (th == 0 || tw == 0 || h % th != 0 || w % tw != 0) {
        throw Error(ErrorKind::IndivisibleDimensions, std::to_string(h) + "x" + std::to_string(w) +
                                                          " mask onto " + std::to_string(th) + "x" +
                                                          std::to_string(tw) + " grid");
    }
}

}  // namespace

std::size_t MaskMap::foreground() const noexcept {
    return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

std::vector<std::uint8_t> encode_fmap(const FeatureMap& fm) {
    if (fm.data.rows() != fm.cells() || fm.data.cols() != fm.d) {
        throw Error(ErrorKind::ShapeMismatch, "feature map header does not match its data");
    }
    const std::size_t value_bytes = fm.dtype == FmapDtype::Float32 ? 4 : 8;
    std::vector<std::uint8_t> out;
    out.reserve(kFmapHeaderBytes + fm.data.data().size() * value_bytes);
    out.insert(out.end(), {'F', 'M', 'A', 'P'});
    put_u32(out, kFmapVersion);
    put_u32(out, fm.h);
    put_u32(out, fm.w);
    put_u32(out, fm.d);
    put_u32(out, fm.stride);
    put_u32(out, static_cast<std::uint32_t>(fm.dtype));
    for (double v : fm.data.data()) {
        if (fm.dtype == FmapDtype::Float32) {
            const float f = static_cast<float>(v);
            if (!std::isfinite(f)) {
                throw Error(ErrorKind::NonFiniteData, "feature value overflows float32");
            }
            put_u32(out, std::bit_cast<std::uint32_t>(f));
        } else {
            put_u64(out, std::bit_cast<std::uint64_t>(v));
        }
    }
    return out;
}

FeatureMap decode_fmap(std::span<const std::uint8_t> bytes) {
    check_magic(bytes, "FMAP");
    if (bytes.size() < kFmapHeaderBytes) {
        throw Error(ErrorKind::TruncatedFile, "FMAP header incomplete");
    }
    const std::uint32_t version = get_u32(bytes, 4);
    if (version != kFmapVersion) {
        throw Error(ErrorKind::UnsupportedVersion, "FMAP version " + std::to_string(version));
    }
    FeatureMap fm;
    fm.h = get_u32(bytes, 8);
    fm.w = get_u32(bytes, 12);
    fm.d = get_u32(bytes, 16);
    fm.stride = get_u32(bytes, 20);
    const std::uint32_t dtype = get_u32(bytes, 24);
    if (dtype > 1) {
        throw Error(ErrorKind::UnsupportedVersion, "FMAP dtype code " + std::to_string(dtype));
    }
    if (fm.h == 0 || fm.w == 0 || fm.d == 0 || fm.stride == 0) {
        throw Error(ErrorKind::ShapeMismatch, "FMAP header has a zero dimension or stride");
    }
    fm.dtype = static_cast<FmapDtype>(dtype);
    const std::size_t value_bytes = fm.dtype == FmapDtype::Float32 ? 4 : 8;
    const std::uint64_t count = std::uint64_t{fm.h} * fm.w * fm.d;
    check_payload(bytes.size() - kFmapHeaderBytes, count * value_bytes);

    std::vector<double> values(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t at = kFmapHeaderBytes + k * value_bytes;
        values[k] = fm.dtype == FmapDtype::Float32 ? static_cast<double>(std::bit_cast<float>(get_u32(bytes, at)))
                                                   : std::bit_cast<double>(get_u64(bytes, at));
        if (!std::isfinite(values[k])) {
            throw Error(ErrorKind::NonFiniteData, "FMAP value " + std::to_string(k) + " is not finite");
        }
    }
    fm.data = Matrix(fm.cells(), fm.d, std::move(values));
    return fm;
}

std::vector<std::uint8_t> encode_mask(const MaskMap& mask) {
    if (mask.data.size() != std::size_t{mask.h} * mask.w) {
        throw Error(ErrorKind::ShapeMismatch, "mask header does not match its data");
    }
    std::vector<std::uint8_t> out;
    out.reserve(kMaskHeaderBytes + mask.data.size());
    out.insert(out.end(), {'M', 'S', 'K', '0'});
    put_u32(out, kMaskVersion);
    put_u32(out, mask.h);
    put_u32(out, mask.w);
    for (std::uint8_t v : mask.data) {
        if (v > 1) throw Error(ErrorKind::InvalidMaskValue, "mask value " + std::to_string(v));
        out.push_back(v);
    }
    return out;
}

MaskMap decode_mask(std::span<const std::uint8_t> bytes) {
    check_magic(bytes, "MSK0");
    if (bytes.size() < kMaskHeaderBytes) {
        throw Error(ErrorKind::TruncatedFile, "MSK0 header incomplete");
    }
    const std::uint32_t version = get_u32(bytes, 4);
    if (version != kMaskVersion) {
        throw Error(ErrorKind::UnsupportedVersion, "MSK0 version " + std::to_string(version));
    }
    MaskMap mask;
    mask.h = get_u32(bytes, 8);
    mask.w = get_u32(bytes, 12);
    check_payload(bytes.size() - kMaskHeaderBytes, std::uint64_t{mask.h} * mask.w);
    mask.data.assign(bytes.begin() + kMaskHeaderBytes, bytes.end());
    for (std::uint8_t v : mask.data) {
        if (v > 1) throw Error(ErrorKind::InvalidMaskValue, "mask value " + std::to_string(v));
    }
    return mask;
}

FeatureMap fmap_read(const std::filesystem::path& path) {
    return decode_fmap(read_bytes(path));
}

void fmap_write(const std::filesystem::path& path, const FeatureMap& fm) {
    write_bytes(path, encode_fmap(fm));
}

MaskMap mask_read(const std::filesystem::path& path) {
    return decode_mask(read_bytes(path));
}

void mask_write(const std::filesystem::path& path, const MaskMap& mask) {
    write_bytes(path, encode_mask(mask));
}

FeatureMap downsample_half(const FeatureMap& fm) {
    if (fm.h % 2 != 0 || fm.w % 2 != 0) {
        throw Error(ErrorKind::OddDimensions,
                    "cannot halve a " + std::to_string(fm.h) + "x" + std::to_string(fm.w) + " map");
    }
    FeatureMap out;
    out.h = fm.h / 2;
    out.w = fm.w / 2;
    out.d = fm.d;
    out.stride = fm.stride * 2;
    out.dtype = fm.dtype;
    out.data = Matrix(out.cells(), fm.d);
    for (std::size_t r = 0; r < out.h; ++r) {
        for (std::size_t c = 0; c < out.w; ++c) {
            const auto top_left = fm.data.row((2 * r) * fm.w + 2 * c);
            const auto top_right = fm.data.row((2 * r) * fm.w + 2 * c + 1);
            const auto bottom_left = fm.data.row((2 * r + 1) * fm.w + 2 * c);
            const auto bottom_right = fm.data.row((2 * r + 1) * fm.w + 2 * c + 1);
            auto dst = out.data.row(r * out.w + c);
            for (std::size_t k = 0; k < fm.d; ++k) {
                dst[k] = ((top_left[k] + top_right[k]) + (bottom_left[k] + bottom_right[k])) * 0.25;
            }
        }
    }
    return out;
}

EncodedMask encode_mask_avgpool(const MaskMap& mask, std::size_t target_h, std::size_t target_w) {
    check_divisible(mask.h, mask.w, target_h, target_w);
    const std::size_t bh = mask.h / target_h;
    const std::size_t bw = mask.w / target_w;
    const double area = static_cast<double>(bh * bw);
    EncodedMask enc{target_h, target_w, Matrix(target_h * target_w, 1)};
    for (std::size_t r = 0; r < target_h; ++r) {
        for (std::size_t c = 0; c < target_w; ++c) {
            std::size_t count = 0;
            for (std::size_t y = r * bh; y < (r + 1) * bh; ++y) {
                for (std::size_t x = c * bw; x < (c + 1) * bw; ++x) {
                    count += mask.at(y, x);
                }
            }
            enc.data(r * target_w + c, 0) = static_cast<double>(count) / area;
        }
    }
    return enc;
}

EncodedMask encode_mask_linear(const MaskMap& mask, std::size_t target_h, std::size_t target_w,
                               const Matrix& weights) {
    check_divisible(mask.h, mask.w, target_h, target_w);
    const std::size_t bh = mask.h / target_h;
    const std::size_t bw = mask.w / target_w;
    if (weights.cols() != bh * bw || weights.rows() == 0) {
        throw Error(ErrorKind::DimensionMismatch, "encoder weights need " + std::to_string(bh * bw) + " columns");
    }
    const std::size_t e = weights.rows();
    EncodedMask enc{target_h, target_w, Matrix(target_h * target_w, e)};
    std::vector<double> block(bh * bw);
    for (std::size_t r = 0; r < target_h; ++r) {
        for (std::size_t c = 0; c < target_w; ++c) {
            for (std::size_t y = 0; y < bh; ++y) {
                for (std::size_t x = 0; x < bw; ++x) {
                    block[y * bw + x] = mask.at(r * bh + y, c * bw + x);
                }
            }
            auto dst = enc.data.row(r * target_w + c);
            for (std::size_t k = 0; k < e; ++k) {
                dst[k] = dot(weights.row(k), block);
            }
        }
    }
    return enc;
}

EncodedMask encode_mask_random_features(const MaskMap& mask, std::size_t target_h, std::size_t target_w,
                                        std::size_t e, std::uint64_t seed) {
    check_divisible(mask.h, mask.w, target_h, target_w);
    if (e == 0) {
        throw Error(ErrorKind::DimensionMismatch, "encoding dimension must be positive");
    }
    const std::size_t area = (mask.h / target_h) * (mask.w / target_w);
    Rng rng(seed);
    Matrix weights(e, area);
    const double scale = 1.0 / std::sqrt(static_cast<double>(area));
    for (double& v : weights.data()) {
        v = rng.normal() * scale;
    }
    return encode_mask_linear(mask, target_h, target_w, weights);
}

MaskMap mask_to_grid(const MaskMap& mask, std::size_t target_h, std::size_t target_w) {
    if (mask.h == target_h && mask.w == target_w) {
        return mask;
    }
    const EncodedMask frac = encode_mask_avgpool(mask, target_h, target_w);
    MaskMap out;
    out.h = static_cast<std::uint32_t>(target_h);
    out.w = static_cast<std::uint32_t>(target_w);
    out.data.resize(target_h * target_w);
    for (std::size_t k = 0; k < out.data.size(); ++k) {
        out.data[k] = frac.data(k, 0) > 0.5 ? 1 : 0;
    }
    return out;
}

}  // namespace gpfs
