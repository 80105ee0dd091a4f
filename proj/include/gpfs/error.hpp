#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gpfs {

enum class ErrorKind {
    DimensionMismatch,
    NotSymmetric,
    NotPositiveDefinite,
    NonFiniteData,
    EmptySupport,
    SingularJoint,
    NumericalInvariant,
    MissingFullCov,
    SpatialMismatch,
    BadMagic,
    UnsupportedVersion,
    TruncatedFile,
    TrailingBytes,
    InvalidMaskValue,
    IoFailure,
    OddDimensions,
    IndivisibleDimensions,
    InsufficientImages,
    InvalidConfig,
    IncompatibleLayout,
    ShapeMismatch,
    EmptyClass,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace gpfs
