#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chromacs {

enum class Errc {
    DimensionMismatch,
    NonFinite,
    FormatError,
    HeaderError,
    OutOfBounds,
    NonPositiveWavelength,
    VirtualImage,
    KernelTooLarge,
    NormalizationError,
    BadDensity,
    BadDimensions,
    TooLarge,
    NegativeThreshold,
    CgStagnation,
    Unsupported,
    ConfigError,
    InvalidArgument,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
    if (!cond) fail(code, what);
}

} // namespace chromacs
