#include "dlcov/error.hpp"

namespace dlcov {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
        case ErrorCode::InvalidRange: return "InvalidRange";
        case ErrorCode::NotPSD: return "NotPSD";
        case ErrorCode::ProjectionNotConverged: return "ProjectionNotConverged";
        case ErrorCode::NonPositiveDiagonal: return "NonPositiveDiagonal";
        case ErrorCode::SolveFailed: return "SolveFailed";
        case ErrorCode::NormalizationDegenerate: return "NormalizationDegenerate";
        case ErrorCode::ZeroReference: return "ZeroReference";
        case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
        case ErrorCode::EmptyDictionary: return "EmptyDictionary";
        case ErrorCode::TooManyPilots: return "TooManyPilots";
        case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorCode::EmptyNeighborhood: return "EmptyNeighborhood";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IOError: return "IOError";
        case ErrorCode::FormatError: return "FormatError";
    }
    return "Unknown";
}

}  // namespace dlcov
