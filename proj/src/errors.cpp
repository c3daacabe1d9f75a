#include "chromacs/errors.hpp"

namespace chromacs {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::NonFinite: return "NonFinite";
        case Errc::FormatError: return "FormatError";
        case Errc::HeaderError: return "HeaderError";
        case Errc::OutOfBounds: return "OutOfBounds";
        case Errc::NonPositiveWavelength: return "NonPositiveWavelength";
        case Errc::VirtualImage: return "VirtualImage";
        case Errc::KernelTooLarge: return "KernelTooLarge";
        case Errc::NormalizationError: return "NormalizationError";
        case Errc::BadDensity: return "BadDensity";
        case Errc::BadDimensions: return "BadDimensions";
        case Errc::TooLarge: return "TooLarge";
        case Errc::NegativeThreshold: return "NegativeThreshold";
        case Errc::CgStagnation: return "CgStagnation";
        case Errc::Unsupported: return "Unsupported";
        case Errc::ConfigError: return "ConfigError";
        case Errc::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

} // namespace chromacs
