#include "gpfs/error.hpp"

namespace gpfs {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NotSymmetric: return "NotSymmetric";
        case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorKind::NonFiniteData: return "NonFiniteData";
        case ErrorKind::EmptySupport: return "EmptySupport";
        case ErrorKind::SingularJoint: return "SingularJoint";
        case ErrorKind::NumericalInvariant: return "NumericalInvariant";
        case ErrorKind::MissingFullCov: return "MissingFullCov";
        case ErrorKind::SpatialMismatch: return "SpatialMismatch";
        case ErrorKind::BadMagic: return "BadMagic";
        case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorKind::TruncatedFile: return "TruncatedFile";
        case ErrorKind::TrailingBytes: return "TrailingBytes";
        case ErrorKind::InvalidMaskValue: return "InvalidMaskValue";
        case ErrorKind::IoFailure: return "IoFailure";
        case ErrorKind::OddDimensions: return "OddDimensions";
        case ErrorKind::IndivisibleDimensions: return "IndivisibleDimensions";
        case ErrorKind::InsufficientImages: return "InsufficientImages";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::IncompatibleLayout: return "IncompatibleLayout";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::EmptyClass: return "EmptyClass";
    }
    return "Unknown";
}

}  // namespace gpfs
